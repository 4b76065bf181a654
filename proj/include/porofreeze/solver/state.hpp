#pragma once

#include <vector>

#include <Eigen/Dense>

#include "porofreeze/hysteresis/preisach.hpp"
#include "porofreeze/plasticity/stop.hpp"

namespace porofreeze::solver {

/// Discrete fields and all hysteresis memory at one time level.
struct SimState {
    double t = 0.0;
    std::vector<double> p;
    std::vector<double> theta;
    std::vector<double> chi;
    /// Full displacement vector, dofs node * dim + component; zero on the boundary.
    Eigen::VectorXd u;
    std::vector<hysteresis::PlayBank> banks;
    std::vector<plasticity::PlasticPoint> plastic;
    /// Water content (chi + rho*(1 - chi)) (f_R(p) + G0[p] + div u) per node, with the
    /// divergence taken from the start of the step that produced it.
    std::vector<double> content;
    /// Spectral coefficients of M_R(p) and K_R(theta) (spectral mode only).
    Eigen::VectorXd v_modes;
    Eigen::VectorXd z_modes;
};

/// Per-step energy accounting; all quantities integrated over the step.
struct LedgerEntry {
    double energy_before = 0.0;
    double energy_after = 0.0;
    double cut_waste = 0.0;
    double boundary_pressure = 0.0;  ///< dt * sum alpha (p - p*) p
    double boundary_heat = 0.0;      ///< dt * sum omega (theta - theta*)
    double gravity_work = 0.0;       ///< g . (u' - u)
    double external_heat = 0.0;      ///< dt * int heat_source
    double defect = 0.0;

    void close();
};

/// Energy dissipated over a step in each channel (integrated over the domain).
struct Dissipation {
    double viscous = 0.0;
    double plastic = 0.0;
    double preisach = 0.0;
    double phase = 0.0;
    double pressure = 0.0;
};

struct StepReport {
    std::size_t step = 0;
    double t = 0.0;
    double dt = 0.0;
    int substeps = 1;
    int iters_pressure = 0;
    int iters_momentum = 0;
    int iters_temperature = 0;
    int sweeps = 1;
    double res_pressure = 0.0;
    double res_momentum = 0.0;
    double res_temperature = 0.0;
    double p_min = 0.0, p_max = 0.0;
    double theta_min = 0.0, theta_max = 0.0;
    double chi_min = 0.0, chi_max = 0.0;
    double chi_rate_max = 0.0;
    /// Largest excess of |d chi / dt| over |F| / gamma; nonpositive when the bound holds.
    double chi_rate_excess = 0.0;
    bool positivity_ok = true;
    double floor_phi = 0.0;
    /// min theta - phi(t); the floor holds within tolerance when >= -floor_tol.
    double floor_margin = 0.0;
    double floor_tol = 0.0;
    bool cutoff_active = false;
    std::size_t cutoff_nodes = 0;
    double max_abs_p = 0.0;
    double max_grad_p_sq = 0.0;
    double probe_p = 0.0;
    double probe_g = 0.0;
    LedgerEntry ledger;
    Dissipation dissipation;
};

}  // namespace porofreeze::solver
