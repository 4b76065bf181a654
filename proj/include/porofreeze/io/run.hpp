#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porofreeze/constitutive/validate.hpp"
#include "porofreeze/io/scenario.hpp"
#include "porofreeze/solver/state.hpp"

namespace porofreeze::io {

/// Version of the timeseries, snapshot and summary layouts.
inline constexpr int kSchemaVersion = 1;

/// Column names of timeseries.csv, in order.
const std::vector<std::string>& timeseries_columns();
/// Column names of snapshots/fields_NNNNNN.csv, in order.
const std::vector<std::string>& snapshot_columns();

struct RunOptions {
    /// Run even when validation fails.
    bool force = false;
    /// Overrides output.seed of the scenario.
    std::optional<std::uint64_t> seed;
    /// Directory for timeseries.csv, snapshots/ and summary.json; empty writes nothing.
    std::string out_dir;
};

enum class RunStatus { Completed, ValidationFailed, StepFailed };

/// Outcome of the structural checks over a whole run.
struct Invariants {
    bool completed = false;
    bool chi_confined = true;
    bool theta_positive = true;
    bool floor_respected = true;
    bool dissipation_nonnegative = true;
    bool chi_rate_bounded = true;
    bool cutoff_inactive = true;
    /// Present when the scenario has a checks section.
    std::optional<bool> chi_excursion;

    bool all() const;
};

struct RunMetrics {
    std::size_t steps = 0;
    std::size_t halvings = 0;
    double t_final = 0.0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double defect_abs_sum = 0.0;
    double defect_abs_max = 0.0;
    double chi_min = 1.0;
    double chi_final_min = 0.0;
    double chi_final_max = 0.0;
    double theta_min = 0.0;
    double floor_margin_min = 0.0;
    /// Largest per-step floor tolerance c * dt.
    double floor_tol = 0.0;
    /// max(0, max over steps of phi(t) - min theta).
    double floor_violation = 0.0;
    double chi_rate_excess_max = 0.0;
    double max_abs_p = 0.0;
    double max_grad_p_sq = 0.0;
    std::size_t cutoff_steps = 0;
    solver::Dissipation dissipation_total;
    /// Smallest per-step value of each channel.
    solver::Dissipation dissipation_min;
    /// Signed shoelace area of the probe series (p, G[p]).
    double loop_area = 0.0;
    long iterations_pressure = 0;
    long iterations_momentum = 0;
    long iterations_temperature = 0;
};

struct RunResult {
    RunStatus status = RunStatus::Completed;
    std::string failure;
    constitutive::ValidationReport validation;
    Invariants invariants;
    RunMetrics metrics;
};

/// Validates, runs and (when out_dir is set) writes timeseries.csv, snapshots/ and
/// summary.json. A step failure leaves the partial outputs plus a FAILED marker file.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Fields of one run sampled at the coarse time levels.
struct LevelResult {
    double dt = 0.0;
    std::size_t steps = 0;
    bool ok = false;
    std::string failure;
    double defect_abs_sum = 0.0;
    double floor_margin_min = 0.0;
    double floor_tol = 0.0;
    double floor_violation = 0.0;
    /// Samples at t = n * dt_0, n = 0..N: nodal p and theta, displacement dofs.
    std::vector<std::vector<double>> p, theta, u;
};

struct ConvergeOptions {
    std::size_t levels = 4;
    /// dt ratio between consecutive levels; 1 repeats the same run.
    std::size_t factor = 2;
    bool force = false;
    std::optional<std::uint64_t> seed;
    /// Worker threads; 0 reads POROFREEZE_THREADS and falls back to the hardware count.
    unsigned threads = 0;
};

/// Time-step refinement study: level k runs with dt / factor^k on the scenario mesh.
/// Differences are L2(Omega x (0, T)) norms on the level-0 time grid with lumped weights.
struct ConvergeReport {
    constitutive::ValidationReport validation;
    bool validation_failed = false;
    std::vector<LevelResult> levels;
    std::vector<double> diff_p, diff_theta, diff_u;
    /// diff[k] / diff[k + 1].
    std::vector<double> factor_p, factor_theta, factor_u;
    /// log_factor(defect_abs_sum[k] / defect_abs_sum[k + 1]).
    std::vector<double> defect_order;
    /// floor_tol[k] / floor_tol[k + 1].
    std::vector<double> floor_tol_ratio;

    bool all_levels_ok() const;
    std::string to_text() const;
    std::string to_json() const;
};

ConvergeReport converge(const Scenario& scenario, const ConvergeOptions& options = {});

}  // namespace porofreeze::io
