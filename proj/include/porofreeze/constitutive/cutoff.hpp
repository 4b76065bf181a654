#pragma once

#include <functional>
#include <limits>

#include "porofreeze/constitutive/laws.hpp"

namespace porofreeze::constitutive {

/// Laws with their nonlinearities cut off at level R: f_R is f on [-R, R] with a C^1
/// linear continuation, mu_R = mu o Q_R, kappa_R = kappa o Q_R o (.)^+, and gamma_R
/// grows with (p^2 - R^2)^+. R = infinity gives the uncut laws.
class CutoffPack {
public:
    CutoffPack(MaterialLaws laws, double r = std::numeric_limits<double>::infinity());

    double r() const { return r_; }
    const MaterialLaws& laws() const { return laws_; }

    double q(double z) const { return q_r(z, r_); }
    /// Q_R(theta^+).
    double q_pos(double theta) const;

    double f(double p) const;
    double f_prime(double p) const;
    double phi(double p) const;
    double v(double p) const { return p * f(p) - phi(p); }
    double mu(double p) const;
    double kappa(double theta) const;
    double gamma(double p, double theta, double div) const;

    /// M_R(p) = int_0^p mu_R and its inverse.
    double m(double p) const;
    double m_inverse(double v) const;
    /// Same, with Newton started from a nearby guess.
    double m_inverse(double v, double guess) const;
    /// K_R(theta) = int_0^theta kappa(Q_R(z^+)) dz and its inverse.
    double k(double theta) const;
    double k_inverse(double z) const;
    double k_inverse(double z, double guess) const;

private:
    MaterialLaws laws_;
    double r_;
    double m_lo_, m_hi_, k_hi_;
};

/// int_0^x rate(z) dz by adaptive Gauss-Kronrod quadrature (for laws without closed form).
double kirchhoff_quadrature(const std::function<double(double)>& rate, double x);

/// Solves F(x) = target for strictly increasing F with F' >= slope_floor > 0, using
/// Newton steps safeguarded by bisection. |F(x) - target| <= tol (1 + |target|).
double invert_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                         double target, double slope_floor, double tol = 1e-13);
/// Same, bracketing around `guess` instead of zero.
double invert_increasing_from(const std::function<double(double)>& f, const std::function<double(double)>& df,
                              double target, double slope_floor, double guess, double tol = 1e-13);

}  // namespace porofreeze::constitutive
