#include "porofreeze/constitutive/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace porofreeze::constitutive {

namespace {
double sgn(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace

double SaturationLaw::value(double p) const
{
    if (kind == Kind::Linear) return c0 + slope * p;
    return c0 + sgn(p) * (f_flat / nu) * (1.0 - std::pow(1.0 + std::abs(p), -nu));
}

double SaturationLaw::derivative(double p) const
{
    if (kind == Kind::Linear) return slope;
    return f_flat * std::pow(1.0 + std::abs(p), -1.0 - nu);
}

double SaturationLaw::antiderivative(double p) const
{
    if (kind == Kind::Linear) return c0 * p + 0.5 * slope * p * p;
    const double a = std::abs(p);
    // (1+a)^(1-nu) - 1 via expm1/log1p keeps accuracy for small |p|
    const double tail = std::expm1((1.0 - nu) * std::log1p(a)) / (1.0 - nu);
    return c0 * p + (f_flat / nu) * (a - tail);
}

double SaturationLaw::range_lo() const
{
    if (kind == Kind::Linear) return -std::numeric_limits<double>::infinity();
    return c0 - f_flat / nu;
}

double SaturationLaw::range_hi() const
{
    if (kind == Kind::Linear) return std::numeric_limits<double>::infinity();
    return c0 + f_flat / nu;
}

double MobilityLaw::value(double p) const
{
    return mu_flat * (1.0 + modulation * (1.0 - 1.0 / (1.0 + p * p)));
}

double MobilityLaw::kirchhoff(double p) const
{
    return mu_flat * (p + modulation * (p - std::atan(p)));
}

double HeatCapacityLaw::value(double theta) const
{
    return theta > 0.0 ? c_flat * (1.0 + std::pow(theta, b)) : c_flat;
}

double HeatCapacityLaw::antiderivative(double theta) const
{
    if (theta <= 0.0) return c_flat * theta;
    return c_flat * (theta + std::pow(theta, 1.0 + b) / (1.0 + b));
}

double ConductivityLaw::value(double theta) const
{
    return theta > 0.0 ? k_flat * (1.0 + std::pow(theta, 1.0 + a)) : k_flat;
}

double ConductivityLaw::kirchhoff(double theta) const
{
    if (theta <= 0.0) return k_flat * theta;
    return k_flat * (theta + std::pow(theta, 2.0 + a) / (2.0 + a));
}

double RelaxationLaw::value(double theta, double div) const
{
    return g_flat * (1.0 + std::max(theta, 0.0) + div * div);
}

double q_r(double z, double r) { return std::max(-r, std::min(z, r)); }

}  // namespace porofreeze::constitutive
