#include "porofreeze/plasticity/yield_surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "porofreeze/errors.hpp"

namespace porofreeze::plasticity {

void YieldSurface::validate() const
{
    if (!(sigma_y > 0.0) || !std::isfinite(sigma_y)) {
        throw InvalidParameter("yield radius must be positive and finite, got " + std::to_string(sigma_y));
    }
    if (trace_bound && !(*trace_bound > 0.0)) {
        throw InvalidParameter("trace bound must be positive, got " + std::to_string(*trace_bound));
    }
}

bool YieldSurface::contains(const SymTensor& z, double tol) const
{
    if (kind == Kind::Ball) return z.norm() <= sigma_y + tol;
    if (z.dim() > 1 && z.dev().norm() > sigma_y + tol) return false;
    return !trace_bound || std::abs(z.trace()) <= *trace_bound + tol;
}

double YieldSurface::support(const SymTensor& x, double trace_tol) const
{
    if (kind == Kind::Ball) return sigma_y * x.norm();
    const double tr = x.trace();
    double h = x.dim() > 1 ? sigma_y * x.dev().norm() : 0.0;
    if (trace_bound) return h + *trace_bound * std::abs(tr) / x.dim();
    if (std::abs(tr) > trace_tol * std::max(1.0, x.norm())) {
        throw FlaggedInconsistency("plastic flow has a trace component " + std::to_string(tr) +
                                   " on a yield cylinder without trace bound");
    }
    return h;
}

namespace {

SymTensor project_cylinder(const SymTensor& tau, double sigma_y, const std::optional<double>& trace_bound)
{
    const int d = tau.dim();
    double tr = tau.trace();
    if (trace_bound) tr = std::clamp(tr, -*trace_bound, *trace_bound);
    SymTensor out = SymTensor::identity(d) * (tr / d);
    if (d > 1) {
        SymTensor dv = tau.dev();
        const double n = dv.norm();
        if (n > sigma_y) dv *= sigma_y / n;
        out += dv;
    }
    return out;
}

SymTensor scale_to_radius(SymTensor x, double radius)
{
    const double n = x.norm();
    if (n > radius) x *= radius / n;
    return x;
}

}  // namespace

SymTensor YieldSurface::project(const SymTensor& tau) const
{
    if (kind == Kind::Cylinder) return project_cylinder(tau, sigma_y, trace_bound);
    return scale_to_radius(tau, sigma_y);
}

SymTensor YieldSurface::project(const SymTensor& tau, const IsoTensor& metric) const
{
    if (kind == Kind::Cylinder) return project_cylinder(tau, sigma_y, trace_bound);
    const double n = tau.norm();
    if (n <= sigma_y) return tau;

    // Stationarity metric^{-1}(x - tau) + lambda x = 0 decouples on the volumetric and
    // deviatoric subspaces: x_k = m_k / (m_k + lambda) tau_k with m_k = 1 / eigen_k.
    const int d = tau.dim();
    const SymTensor tv = tau.vol();
    const SymTensor td = tau.dev();
    const double m1 = 1.0 / metric.vol_eigen(d);
    const double m2 = d > 1 ? 1.0 / metric.dev_eigen() : m1;
    const double nv2 = tv.dot(tv), nd2 = td.dot(td);
    auto excess = [&](double lambda) {
        const double f1 = m1 / (m1 + lambda), f2 = m2 / (m2 + lambda);
        return f1 * f1 * nv2 + f2 * f2 * nd2 - sigma_y * sigma_y;
    };
    const double hi = std::max(m1, m2) * (n / sigma_y - 1.0);
    double lambda = hi;
    if (excess(hi) < 0.0) {
        std::uintmax_t iters = 200;
        const auto bracket = boost::math::tools::toms748_solve(
            excess, 0.0, hi, excess(0.0), excess(hi), boost::math::tools::eps_tolerance<double>(52), iters);
        lambda = 0.5 * (bracket.first + bracket.second);
    }
    SymTensor x = tv * (m1 / (m1 + lambda)) + td * (m2 / (m2 + lambda));
    return scale_to_radius(x, sigma_y);
}

}  // namespace porofreeze::plasticity
