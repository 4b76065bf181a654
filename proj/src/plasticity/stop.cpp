#include "porofreeze/plasticity/stop.hpp"

#include <cmath>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::plasticity {

SymTensor stop_init(const SymTensor& eps0, const YieldSurface& z) { return z.project(eps0); }

StopIncrement stop_step(PlasticPoint& point, const SymTensor& d_eps, const ElasticTensors& t,
                        const YieldSurface& z)
{
    const SymTensor predictor = point.sigma_p + t.ae.apply(d_eps);
    const SymTensor next = z.project(predictor, t.ae);
    StopIncrement inc;
    inc.d_sigma_p = next - point.sigma_p;
    inc.d_dp = d_eps - t.ae.apply_inverse(inc.d_sigma_p);
    inc.d_dissipation = z.support(inc.d_dp);
    point.sigma_p = next;
    point.dissipation += inc.d_dissipation;
    return inc;
}

SymTensor p_eval(const SymTensor& eps, const PlasticPoint& point, const ElasticTensors& t)
{
    return t.ah.apply(eps) + point.sigma_p;
}

double plastic_potential(const SymTensor& eps, const SymTensor& sigma_p, const ElasticTensors& t)
{
    return 0.5 * t.ah.energy(eps) + 0.5 * t.ae.apply_inverse(sigma_p).dot(sigma_p);
}

double energy_audit(const SymTensor& sigma_before, const PlasticPoint& after, const SymTensor& eps_before,
                    const SymTensor& d_eps, const StopIncrement& inc, const ElasticTensors& t, double tol)
{
    const SymTensor eps_after = eps_before + d_eps;
    const double work = p_eval(eps_after, after, t).dot(d_eps);
    const double du = plastic_potential(eps_after, after.sigma_p, t) - plastic_potential(eps_before, sigma_before, t);
    const double residual = work - du - inc.d_dissipation;
    const double scale = 1.0 + std::abs(work) + std::abs(du) + inc.d_dissipation;
    if (residual < -tol * scale) {
        throw SchemeViolation("plastic energy residual " + std::to_string(residual) + " is negative");
    }
    return residual;
}

}  // namespace porofreeze::plasticity
