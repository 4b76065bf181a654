#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>

#include "porofreeze/constitutive/validate.hpp"
#include "porofreeze/discretization/mesh.hpp"

namespace porofreeze::solver {

using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<std::array<double, 2>(double x, double y, double t)>;
/// Boundary coefficient as a function of the facet marker and a point on the facet.
using FacetField = std::function<double(int marker, double x, double y)>;

/// Robin data: mu grad p . n = alpha (p* - p), kappa grad theta . n = omega (theta* - theta).
struct BoundaryData {
    FacetField alpha = [](int, double, double) { return 0.0; };
    FacetField omega = [](int, double, double) { return 0.0; };
    ScalarField p_star = [](double, double, double) { return 0.0; };
    ScalarField theta_star = [](double, double, double) { return 1.0; };
};

struct InitialData {
    std::function<double(double x, double y)> p = [](double, double) { return 0.0; };
    std::function<double(double x, double y)> theta = [](double, double) { return 1.0; };
    std::function<double(double x, double y)> chi = [](double, double) { return 1.0; };
    std::function<std::array<double, 2>(double x, double y)> u = [](double, double) {
        return std::array<double, 2>{0.0, 0.0};
    };
    /// Amplitude of a uniform random perturbation added to p at interior nodes.
    double p_noise = 0.0;
};

struct Problem {
    constitutive::ModelParameters model;
    discretization::Mesh mesh;
    BoundaryData boundary;
    InitialData initial;
    VectorField gravity = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
    /// External volumetric heat supply (zero in the physical model; used by verification runs).
    ScalarField heat_source = [](double, double, double) { return 0.0; };
    std::size_t probe_node = 0;
    std::uint64_t seed = 0;
};

enum class Mode { Fem, Spectral };
enum class Linearization { Secant, Tangent };

/// Switches for the heat sources; all on in the physical model.
struct SourceToggles {
    bool viscous = true;
    bool plastic = true;
    bool pressure = true;
    bool preisach = true;
    bool phase = true;
};

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    double cutoff_r = std::numeric_limits<double>::infinity();
    /// Fourth-order regularization of the pressure equation (spectral mode only).
    double eta = 0.0;
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 5;
    Mode mode = Mode::Fem;
    /// Number of cosine modes in spectral mode; 0 means nodes - 1.
    std::size_t spectral_modes = 0;
    std::size_t preisach_levels = 64;
    Linearization pressure_linearization = Linearization::Secant;
    /// Repeat the phase-pressure-momentum-temperature sweep until the fields settle.
    bool iterated_splitting = false;
    int max_sweeps = 10;
    bool freeze_phase = false;
    bool freeze_pressure = false;
    bool freeze_mechanics = false;
    bool freeze_temperature = false;
    SourceToggles sources;
    /// Coefficient c of the temperature-floor tolerance c * dt.
    double floor_tolerance = 1.0;

    /// Throws InvalidParameter on inconsistent settings.
    void validate() const;
    std::size_t num_steps() const;
};

}  // namespace porofreeze::solver
