#pragma once

#include <cstddef>
#include <vector>

#include "porofreeze/constitutive/laws.hpp"
#include "porofreeze/plasticity/elastic.hpp"

namespace porofreeze::solver {

/// Spatially uniform lower solution phi of the heat equation:
/// d/dt C_V(phi) = -C phi^2, phi(0) = theta_bar.
struct ThetaFloor {
    double c = 0.0;
    std::vector<double> t;
    std::vector<double> phi;
    double theta_t = 0.0;

    /// Piecewise-linear interpolation of the trajectory.
    double at(double time) const;
};

/// C = (L / theta_c)^2 / (4 gamma_flat) + 3 beta^2 / (4 B_flat).
double floor_constant(const constitutive::MaterialLaws& laws, const constitutive::PhysicalConstants& k,
                      const plasticity::ElasticTensors& tensors, int dim);

/// One classical RK4 step of phi' = -C phi^2 / c_V(phi).
double floor_rk4_step(const constitutive::HeatCapacityLaw& cv, double c, double phi, double h);

/// RK4 trajectory on [0, t_end] with `steps` uniform steps.
ThetaFloor theta_floor(const constitutive::HeatCapacityLaw& cv, double c, double theta_bar, double t_end,
                       std::size_t steps = 1000);

}  // namespace porofreeze::solver
