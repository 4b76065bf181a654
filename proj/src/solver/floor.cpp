#include "porofreeze/solver/floor.hpp"

#include <algorithm>

#include "porofreeze/errors.hpp"

namespace porofreeze::solver {

double ThetaFloor::at(double time) const
{
    if (t.empty()) throw InvalidState("empty floor trajectory");
    if (time <= t.front()) return phi.front();
    if (time >= t.back()) return phi.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const auto k = static_cast<std::size_t>(it - t.begin());
    const double s = (time - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - s) * phi[k - 1] + s * phi[k];
}

double floor_constant(const constitutive::MaterialLaws& laws, const constitutive::PhysicalConstants& k,
                      const plasticity::ElasticTensors& tensors, int dim)
{
    const double lt = k.latent / k.theta_c;
    return lt * lt / (4.0 * laws.relaxation.g_flat) + 3.0 * k.beta * k.beta / (4.0 * tensors.b_flat(dim));
}

double floor_rk4_step(const constitutive::HeatCapacityLaw& cv, double c, double phi, double h)
{
    const auto rate = [&](double y) { return -c * y * y / cv.value(y); };
    const double k1 = rate(phi);
    const double k2 = rate(phi + 0.5 * h * k1);
    const double k3 = rate(phi + 0.5 * h * k2);
    const double k4 = rate(phi + h * k3);
    return phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ThetaFloor theta_floor(const constitutive::HeatCapacityLaw& cv, double c, double theta_bar, double t_end,
                       std::size_t steps)
{
    if (!(theta_bar > 0.0)) throw InvalidParameter("floor datum theta_bar must be positive");
    if (!(c >= 0.0)) throw InvalidParameter("floor constant must be nonnegative");
    if (!(t_end >= 0.0) || steps == 0) throw InvalidParameter("floor horizon must be nonnegative with steps > 0");
    ThetaFloor out;
    out.c = c;
    out.t.resize(steps + 1);
    out.phi.resize(steps + 1);
    const double h = t_end / static_cast<double>(steps);
    out.t[0] = 0.0;
    out.phi[0] = theta_bar;
    for (std::size_t k = 0; k < steps; ++k) {
        out.t[k + 1] = h * static_cast<double>(k + 1);
        out.phi[k + 1] = floor_rk4_step(cv, c, out.phi[k], h);
    }
    out.theta_t = out.phi.back();
    return out;
}

}  // namespace porofreeze::solver
