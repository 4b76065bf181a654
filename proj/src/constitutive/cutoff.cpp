#include "porofreeze/constitutive/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "porofreeze/errors.hpp"

namespace porofreeze::constitutive {

CutoffPack::CutoffPack(MaterialLaws laws, double r) : laws_(std::move(laws)), r_(r)
{
    if (!(r_ > 0.0)) throw InvalidParameter("cut-off level must be positive, got " + std::to_string(r_));
    const bool finite = std::isfinite(r_);
    m_lo_ = finite ? laws_.mobility.kirchhoff(-r_) : -r_;
    m_hi_ = finite ? laws_.mobility.kirchhoff(r_) : r_;
    k_hi_ = finite ? laws_.conductivity.kirchhoff(r_) : r_;
}

double CutoffPack::q_pos(double theta) const { return std::min(std::max(theta, 0.0), r_); }

double CutoffPack::f(double p) const
{
    const auto& s = laws_.saturation;
    if (p > r_) return s.value(r_) + s.derivative(r_) * (p - r_);
    if (p < -r_) return s.value(-r_) + s.derivative(-r_) * (p + r_);
    return s.value(p);
}

double CutoffPack::f_prime(double p) const { return laws_.saturation.derivative(q(p)); }

double CutoffPack::phi(double p) const
{
    const auto& s = laws_.saturation;
    if (p > r_) {
        const double d = p - r_;
        return s.antiderivative(r_) + s.value(r_) * d + 0.5 * s.derivative(r_) * d * d;
    }
    if (p < -r_) {
        const double d = p + r_;
        return s.antiderivative(-r_) + s.value(-r_) * d + 0.5 * s.derivative(-r_) * d * d;
    }
    return s.antiderivative(p);
}

double CutoffPack::mu(double p) const { return laws_.mobility.value(q(p)); }

double CutoffPack::kappa(double theta) const { return laws_.conductivity.value(q_pos(theta)); }

double CutoffPack::gamma(double p, double theta, double div) const
{
    const double excess = std::max(p * p - r_ * r_, 0.0);
    return laws_.relaxation.value(q_pos(theta) + excess, div);
}

double CutoffPack::m(double p) const
{
    const auto& mob = laws_.mobility;
    if (p > r_) return m_hi_ + mob.value(r_) * (p - r_);
    if (p < -r_) return m_lo_ + mob.value(-r_) * (p + r_);
    return mob.kirchhoff(p);
}

double CutoffPack::m_inverse(double v) const
{
    const auto& mob = laws_.mobility;
    if (v > m_hi_) return r_ + (v - m_hi_) / mob.value(r_);
    if (v < m_lo_) return -r_ + (v - m_lo_) / mob.value(-r_);
    if (mob.modulation == 0.0) return v / mob.mu_flat;
    return invert_increasing([&](double p) { return mob.kirchhoff(p); }, [&](double p) { return mob.value(p); }, v,
                             mob.mu_flat);
}

double CutoffPack::m_inverse(double v, double guess) const
{
    const auto& mob = laws_.mobility;
    if (v > m_hi_ || v < m_lo_ || mob.modulation == 0.0) return m_inverse(v);
    return invert_increasing_from([&](double p) { return mob.kirchhoff(p); }, [&](double p) { return mob.value(p); },
                                  v, mob.mu_flat, q(guess));
}

double CutoffPack::k(double theta) const
{
    const auto& c = laws_.conductivity;
    if (theta > r_) return k_hi_ + c.value(r_) * (theta - r_);
    return c.kirchhoff(theta);
}

double CutoffPack::k_inverse(double z) const
{
    const auto& c = laws_.conductivity;
    if (z <= 0.0) return z / c.k_flat;
    if (z > k_hi_) return r_ + (z - k_hi_) / c.value(r_);
    return invert_increasing([&](double t) { return c.kirchhoff(t); }, [&](double t) { return c.value(t); }, z,
                             c.k_flat);
}

double CutoffPack::k_inverse(double z, double guess) const
{
    const auto& c = laws_.conductivity;
    if (z <= 0.0 || z > k_hi_) return k_inverse(z);
    return invert_increasing_from([&](double t) { return c.kirchhoff(t); }, [&](double t) { return c.value(t); }, z,
                                  c.k_flat, std::clamp(guess, 0.0, r_));
}

double kirchhoff_quadrature(const std::function<double(double)>& rate, double x)
{
    if (x == 0.0) return 0.0;
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    return Quad::integrate(rate, 0.0, x, 15, 1e-14);
}

double invert_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                         double target, double slope_floor, double tol)
{
    return invert_increasing_from(f, df, target, slope_floor, 0.0, tol);
}

double invert_increasing_from(const std::function<double(double)>& f, const std::function<double(double)>& df,
                              double target, double slope_floor, double guess, double tol)
{
    if (!(slope_floor > 0.0)) throw InvalidParameter("inversion needs a positive slope bound");
    const double f0 = f(guess);
    // F' >= slope_floor brackets the root within |target - F(guess)| / slope_floor of the guess.
    const double reach = std::abs(target - f0) / slope_floor;
    double lo = f0 < target ? guess : guess - reach;
    double hi = f0 < target ? guess + reach : guess;
    double flo = f(lo) - target, fhi = f(hi) - target;
    if (flo > 0.0 || fhi < 0.0) {
        throw InternalError("Kirchhoff inversion failed to bracket target " + std::to_string(target));
    }
    const double goal = tol * (1.0 + std::abs(target));
    if (std::abs(f0 - target) <= goal) return guess;
    double x = guess;
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x) - target;
        if (std::abs(fx) <= goal) return x;
        if (fx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double next = x - fx / df(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
        x = next;
    }
    return x;
}

}  // namespace porofreeze::constitutive
