#pragma once

namespace porofreeze::constitutive {

/// Non-hysteretic part f of the pressure-saturation relation.
///
/// Power: f(p) = c0 + sgn(p) (f_flat / nu) (1 - (1 + |p|)^(-nu)), so that
/// f'(p) = f_flat (1 + |p|)^(-1-nu) and f takes values in c0 -+ f_flat / nu.
/// Linear: f(p) = c0 + slope p; unbounded, meant only for linearized test problems.
struct SaturationLaw {
    enum class Kind { Power, Linear };

    Kind kind = Kind::Power;
    double c0 = 0.5;
    double f_flat = 0.1;
    double f_sharp = 0.2;
    double nu = 0.5;
    double slope = 0.1;

    double value(double p) const;
    double derivative(double p) const;
    /// Phi(p) = int_0^p f.
    double antiderivative(double p) const;
    /// V(p) = p f(p) - Phi(p) = int_0^p f'(z) z dz.
    double potential(double p) const { return p * value(p) - antiderivative(p); }

    /// Infimum and supremum of f over the real line.
    double range_lo() const;
    double range_hi() const;
};

/// mu(p) = mu_flat (1 + modulation (1 - 1 / (1 + p^2))) >= mu_flat.
struct MobilityLaw {
    double mu_flat = 1.0;
    double modulation = 0.0;

    double value(double p) const;
    /// M(p) = int_0^p mu.
    double kirchhoff(double p) const;
};

/// c_V(theta) = c_flat (1 + theta^b) for theta >= 0, continued by c_flat below zero.
struct HeatCapacityLaw {
    double c_flat = 1.0;
    double c_sharp = 2.0;
    double b = 0.5;
    double b_hat = 0.75;

    double value(double theta) const;
    /// C_V(theta) = int_0^theta c_V.
    double antiderivative(double theta) const;
};

/// kappa(theta) = k_flat (1 + theta^(1+a)) for theta >= 0, continued by k_flat below zero.
struct ConductivityLaw {
    double k_flat = 0.03;
    double k_sharp = 0.06;
    double a = 0.25;
    double a_hat = 1.0;

    double value(double theta) const;
    /// K(theta) = int_0^theta kappa.
    double kirchhoff(double theta) const;
};

/// gamma(theta, d) = g_flat (1 + theta + d^2), theta >= 0.
struct RelaxationLaw {
    double g_flat = 1e-4;
    double g_sharp = 2e-4;

    double value(double theta, double div) const;
};

struct PhysicalConstants {
    double rho_star = 0.917;  ///< ice / water density ratio
    double latent = 1.0;
    double theta_c = 273.15;
    double beta = 0.1;
    double theta_bar = 1.0;
    double rho_w = 1.0;
};

struct MaterialLaws {
    SaturationLaw saturation;
    MobilityLaw mobility;
    HeatCapacityLaw heat_capacity;
    ConductivityLaw conductivity;
    RelaxationLaw relaxation;
};

/// max(-R, min(z, R)).
double q_r(double z, double r);

}  // namespace porofreeze::constitutive
