#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "porofreeze/constitutive/validate.hpp"
#include "porofreeze/discretization/mesh.hpp"
#include "porofreeze/hysteresis/density.hpp"
#include "porofreeze/io/expression.hpp"
#include "porofreeze/solver/problem.hpp"

namespace porofreeze::io {

/// Structured mesh (box + cells) or a mesh file in the text format of read_mesh.
struct MeshSpec {
    int dim = 1;
    discretization::Box box;
    int nx = 100;
    int ny = -1;
    std::string file;
};

struct DensitySpec {
    enum class Kind { Uniform, Exponential, Zero, Table };

    Kind kind = Kind::Uniform;
    double value = 0.2;
    double r_max = 1.0;
    double v_min = -1.0;
    double v_max = 1.0;
    hysteresis::SeparableExponential exponential;
    std::string file;
};

struct OutputSpec {
    /// Snapshot cadence in steps; 0 writes only the initial and final fields.
    std::size_t snapshot_every = 0;
    /// Node for the (p, G) probe series; -1 selects the node nearest to the domain centre.
    long probe = -1;
    std::uint64_t seed = 0;
};

/// Thresholds of the qualitative freeze-thaw check: the smallest chi over the run must
/// drop below chi_low and the smallest chi at the final time must end above chi_high.
struct ChiChecks {
    double chi_low = 0.5;
    double chi_high = 0.5;
};

/// A complete run description. Expressions see
///   boundary alpha, omega:          marker, x, y
///   p_star, theta_star, forcing:    x, y, t
///   initial fields:                 x, y
/// and the constants theta_c and theta_bar.
struct Scenario {
    std::string name = "default";
    std::string description;
    MeshSpec mesh;
    constitutive::ModelParameters model;
    DensitySpec density;

    Expression alpha = Expression::constant(1.0);
    Expression omega = Expression::constant(1.0);
    Expression p_star = Expression::constant(0.0);
    Expression theta_star = Expression::constant(273.15);

    Expression p0 = Expression::constant(0.0);
    Expression theta0 = Expression::constant(273.15);
    Expression chi0 = Expression::constant(1.0);
    Expression u0_x = Expression::constant(0.0);
    Expression u0_y = Expression::constant(0.0);
    double p_noise = 0.0;

    Expression gravity_x = Expression::constant(0.0);
    Expression gravity_y = Expression::constant(0.0);
    Expression heat_source = Expression::constant(0.0);

    solver::SolverConfig solver;
    OutputSpec output;
    std::optional<ChiChecks> checks;

    /// Directory against which relative mesh and density file names are resolved.
    std::string base_dir = ".";
};

/// Parses the YAML scenario format. Unknown keys, malformed numbers and bad expressions
/// raise ParseError with the 1-based line and column of the offending text.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
/// Emits every setting, including defaults; parse_scenario(to_yaml(s)) reproduces s.
std::string to_yaml(const Scenario& s);

discretization::Mesh build_mesh(const Scenario& s);
hysteresis::PreisachDensity build_density(const DensitySpec& spec, const std::string& base_dir);
solver::Problem build_problem(const Scenario& s);

/// Material clauses from validate_hypotheses plus the data clauses (ii)-(v), checked on
/// every mesh node (boundary facet midpoints for alpha, omega) at `time_samples` times.
constitutive::ValidationReport validate_scenario(const Scenario& s, std::size_t time_samples = 65);

}  // namespace porofreeze::io
