#pragma once

#include "porofreeze/plasticity/elastic.hpp"
#include "porofreeze/plasticity/sym_tensor.hpp"
#include "porofreeze/plasticity/yield_surface.hpp"

namespace porofreeze::plasticity {

/// Plastic state at one quadrature point.
struct PlasticPoint {
    SymTensor sigma_p;
    /// Total dissipation h_Z(dDP) accumulated over all steps.
    double dissipation = 0.0;
};

struct StopIncrement {
    SymTensor d_sigma_p;
    /// Plastic flow increment dEps - Ae^{-1} dSigmaP.
    SymTensor d_dp;
    double d_dissipation = 0.0;
};

/// sigma_p(0) = Frobenius projection of the initial strain onto Z.
SymTensor stop_init(const SymTensor& eps0, const YieldSurface& z);

/// Implicit catch-up step: sigma_p' = Proj(sigma_p + Ae dEps) in the Ae^{-1} metric.
StopIncrement stop_step(PlasticPoint& point, const SymTensor& d_eps, const ElasticTensors& t,
                        const YieldSurface& z);

/// P = Ah eps + sigma_p.
SymTensor p_eval(const SymTensor& eps, const PlasticPoint& point, const ElasticTensors& t);

/// U_P = 1/2 Ah eps:eps + 1/2 Ae^{-1} sigma_p:sigma_p.
double plastic_potential(const SymTensor& eps, const SymTensor& sigma_p, const ElasticTensors& t);

/// P(eps + dEps):dEps - (U_P after - U_P before) - dDissipation for the step that took
/// `before` to `after`. Nonnegative up to rounding; throws SchemeViolation below -tol.
double energy_audit(const SymTensor& sigma_before, const PlasticPoint& after, const SymTensor& eps_before,
                    const SymTensor& d_eps, const StopIncrement& inc, const ElasticTensors& t,
                    double tol = 1e-12);

}  // namespace porofreeze::plasticity
