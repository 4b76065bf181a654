#include "porofreeze/io/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "porofreeze/errors.hpp"
#include "porofreeze/solver/simulator.hpp"

namespace porofreeze::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string>& timeseries_columns()
{
    static const std::vector<std::string> cols{
        "step",           "t",               "dt",
        "substeps",       "sweeps",          "iters_pressure",
        "iters_momentum", "iters_temperature", "res_pressure",
        "res_momentum",   "res_temperature", "p_min",
        "p_max",          "theta_min",       "theta_max",
        "chi_min",        "chi_max",         "chi_rate_max",
        "chi_rate_excess", "positivity_ok",  "floor_phi",
        "floor_margin",   "floor_tol",       "energy",
        "cut_waste",      "boundary_pressure", "boundary_heat",
        "gravity_work",   "external_heat",   "defect",
        "defect_abs_cum", "diss_viscous",    "diss_plastic",
        "diss_preisach",  "diss_phase",      "diss_pressure",
        "cutoff_active",  "cutoff_nodes",    "max_abs_p",
        "max_grad_p_sq",  "probe_p",         "probe_g"};
    return cols;
}

const std::vector<std::string>& snapshot_columns()
{
    static const std::vector<std::string> cols{"node", "x", "y", "p", "theta", "chi", "u_x", "u_y", "g"};
    return cols;
}

bool Invariants::all() const
{
    return completed && chi_confined && theta_positive && floor_respected && dissipation_nonnegative &&
           chi_rate_bounded && cutoff_inactive && chi_excursion.value_or(true);
}

namespace {

/// One CSV line; fields are numeric so no quoting is needed.
class Row {
public:
    Row& operator<<(double v)
    {
        sep();
        line_ += format_double(v);
        return *this;
    }
    Row& operator<<(std::size_t v)
    {
        sep();
        line_ += std::to_string(v);
        return *this;
    }
    Row& operator<<(int v)
    {
        sep();
        line_ += std::to_string(v);
        return *this;
    }
    Row& operator<<(bool v)
    {
        sep();
        line_ += v ? "1" : "0";
        return *this;
    }
    const std::string& str() const { return line_; }

private:
    void sep()
    {
        if (!first_) line_ += ',';
        first_ = false;
    }
    std::string line_;
    bool first_ = true;
};

std::string header(const std::vector<std::string>& cols)
{
    std::string h;
    for (const auto& c : cols) h += (h.empty() ? "" : ",") + c;
    return h;
}

std::string timeseries_row(const solver::StepReport& r, double energy, double defect_cum)
{
    Row row;
    row << r.step << r.t << r.dt << r.substeps << r.sweeps << r.iters_pressure << r.iters_momentum
        << r.iters_temperature << r.res_pressure << r.res_momentum << r.res_temperature << r.p_min << r.p_max
        << r.theta_min << r.theta_max << r.chi_min << r.chi_max << r.chi_rate_max << r.chi_rate_excess
        << r.positivity_ok << r.floor_phi << r.floor_margin << r.floor_tol << energy << r.ledger.cut_waste
        << r.ledger.boundary_pressure << r.ledger.boundary_heat << r.ledger.gravity_work << r.ledger.external_heat
        << r.ledger.defect << defect_cum << r.dissipation.viscous << r.dissipation.plastic << r.dissipation.preisach
        << r.dissipation.phase << r.dissipation.pressure << r.cutoff_active << r.cutoff_nodes << r.max_abs_p
        << r.max_grad_p_sq << r.probe_p << r.probe_g;
    return row.str();
}

/// Report describing the initial state as step 0.
solver::StepReport initial_report(const solver::Simulator& sim)
{
    const auto& s = sim.state();
    solver::StepReport r;
    r.t = s.t;
    r.dt = 0.0;
    r.substeps = 0;
    r.sweeps = 0;
    const auto [pmin, pmax] = std::minmax_element(s.p.begin(), s.p.end());
    const auto [tmin, tmax] = std::minmax_element(s.theta.begin(), s.theta.end());
    const auto [cmin, cmax] = std::minmax_element(s.chi.begin(), s.chi.end());
    r.p_min = *pmin;
    r.p_max = *pmax;
    r.theta_min = *tmin;
    r.theta_max = *tmax;
    r.chi_min = *cmin;
    r.chi_max = *cmax;
    r.positivity_ok = r.theta_min > 0.0;
    r.floor_phi = sim.floor_value();
    r.floor_margin = r.theta_min - r.floor_phi;
    const auto mon = sim.monitor();
    r.cutoff_active = mon.active();
    r.cutoff_nodes = mon.p_nodes.size() + mon.theta_nodes.size();
    r.max_abs_p = mon.max_abs_p;
    r.max_grad_p_sq = mon.max_grad_p_sq;
    const std::size_t probe = sim.problem().probe_node;
    r.probe_p = s.p[probe];
    r.probe_g = sim.saturation(s)[probe];
    return r;
}

void write_snapshot(const fs::path& dir, std::size_t step, const solver::Simulator& sim)
{
    char name[64];
    std::snprintf(name, sizeof(name), "fields_%06zu.csv", step);
    std::ofstream out(dir / name, std::ios::binary);
    out << header(snapshot_columns()) << '\n';
    const auto& s = sim.state();
    const auto& mesh = sim.problem().mesh;
    const auto g = sim.saturation(s);
    const int dim = mesh.dim;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        Row row;
        const double ux = s.u[static_cast<Eigen::Index>(i * dim)];
        const double uy = dim == 2 ? s.u[static_cast<Eigen::Index>(i * dim + 1)] : 0.0;
        row << i << mesh.nodes[i][0] << mesh.nodes[i][1] << s.p[i] << s.theta[i] << s.chi[i] << ux << uy << g[i];
        out << row.str() << '\n';
    }
}

json validation_json(const constitutive::ValidationReport& rep)
{
    json arr = json::array();
    for (const auto& c : rep.clauses) {
        arr.push_back({{"id", c.id},
                       {"description", c.description},
                       {"evaluated", c.evaluated},
                       {"passed", c.passed},
                       {"witness", c.witness}});
    }
    return {{"passed", rep.all_passed()}, {"clauses", arr}};
}

json dissipation_json(const solver::Dissipation& d)
{
    return {{"viscous", d.viscous},
            {"plastic", d.plastic},
            {"preisach", d.preisach},
            {"phase", d.phase},
            {"pressure", d.pressure}};
}

/// Finite numbers as JSON numbers, infinities as the strings "inf" / "-inf".
json number(double v)
{
    if (std::isfinite(v)) return v;
    return format_double(v);
}

const char* status_text(RunStatus s)
{
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::ValidationFailed: return "validation_failed";
        case RunStatus::StepFailed: return "step_failed";
    }
    return "unknown";
}

json summary_json(const Scenario& sc, const RunResult& res, std::uint64_t seed, std::size_t probe)
{
    const auto& m = res.metrics;
    const auto& inv = res.invariants;
    json invariants = {{"completed", inv.completed},
                       {"chi_confined", inv.chi_confined},
                       {"theta_positive", inv.theta_positive},
                       {"floor_respected", inv.floor_respected},
                       {"dissipation_nonnegative", inv.dissipation_nonnegative},
                       {"chi_rate_bounded", inv.chi_rate_bounded},
                       {"cutoff_inactive", inv.cutoff_inactive}};
    if (inv.chi_excursion) invariants["chi_excursion"] = *inv.chi_excursion;
    invariants["all"] = inv.all();

    json thresholds = {{"floor_tolerance_coefficient", sc.solver.floor_tolerance}};
    if (sc.checks) {
        thresholds["chi_low"] = sc.checks->chi_low;
        thresholds["chi_high"] = sc.checks->chi_high;
    }

    json metrics = {{"steps", m.steps},
                    {"halvings", m.halvings},
                    {"t_final", m.t_final},
                    {"energy_initial", m.energy_initial},
                    {"energy_final", m.energy_final},
                    {"defect_abs_sum", m.defect_abs_sum},
                    {"defect_abs_max", m.defect_abs_max},
                    {"chi_min", m.chi_min},
                    {"chi_final_min", m.chi_final_min},
                    {"chi_final_max", m.chi_final_max},
                    {"theta_min", m.theta_min},
                    {"floor_margin_min", m.floor_margin_min},
                    {"floor_tol", m.floor_tol},
                    {"floor_violation", m.floor_violation},
                    {"chi_rate_excess_max", m.chi_rate_excess_max},
                    {"max_abs_p", m.max_abs_p},
                    {"max_grad_p_sq", m.max_grad_p_sq},
                    {"cutoff_steps", m.cutoff_steps},
                    {"dissipation_total", dissipation_json(m.dissipation_total)},
                    {"dissipation_min", dissipation_json(m.dissipation_min)},
                    {"loop_area", m.loop_area},
                    {"iterations",
                     {{"pressure", m.iterations_pressure},
                      {"momentum", m.iterations_momentum},
                      {"temperature", m.iterations_temperature}}}};

    return {{"schema_version", kSchemaVersion},
            {"scenario", sc.name},
            {"status", status_text(res.status)},
            {"failure", res.failure},
            {"seed", seed},
            {"probe_node", probe},
            {"cutoff_r", number(sc.solver.cutoff_r)},
            {"config", to_yaml(sc)},
            {"validation", validation_json(res.validation)},
            {"invariants", invariants},
            {"metrics", metrics},
            {"thresholds", thresholds}};
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options)
{
    Scenario sc = scenario;
    if (options.seed) sc.output.seed = *options.seed;

    RunResult res;
    res.validation = validate_scenario(sc);
    const bool write = !options.out_dir.empty();
    const fs::path dir(options.out_dir);
    if (write) {
        fs::create_directories(dir / "snapshots");
        fs::remove(dir / "FAILED");
    }

    auto problem = build_problem(sc);
    const std::size_t probe = problem.probe_node;
    if (!res.validation.all_passed() && !options.force) {
        res.status = RunStatus::ValidationFailed;
        res.failure = "validation failed";
        if (write) write_text(dir / "summary.json", summary_json(sc, res, sc.output.seed, probe).dump(2) + "\n");
        return res;
    }

    solver::Simulator sim(std::move(problem), sc.solver);
    auto& m = res.metrics;
    auto& inv = res.invariants;

    std::ofstream ts;
    if (write) {
        ts.open(dir / "timeseries.csv", std::ios::binary);
        ts << header(timeseries_columns()) << '\n';
    }
    const auto r0 = initial_report(sim);
    m.energy_initial = m.energy_final = sim.internal_energy(sim.state());
    m.chi_min = r0.chi_min;
    m.theta_min = r0.theta_min;
    m.floor_margin_min = r0.floor_margin;
    m.max_abs_p = r0.max_abs_p;
    m.max_grad_p_sq = r0.max_grad_p_sq;
    m.chi_final_min = r0.chi_min;
    m.chi_final_max = r0.chi_max;
    inv.chi_confined = r0.chi_min >= 0.0 && r0.chi_max <= 1.0;
    inv.theta_positive = r0.positivity_ok;
    inv.cutoff_inactive = !r0.cutoff_active;
    if (write) {
        ts << timeseries_row(r0, m.energy_initial, 0.0) << '\n';
        write_snapshot(dir / "snapshots", 0, sim);
    }

    bool first_min = true;
    double prev_p = r0.probe_p, prev_g = r0.probe_g;
    try {
        while (!sim.finished()) {
            const auto r = sim.step();
            const double energy = sim.internal_energy(sim.state());
            m.steps = r.step;
            m.halvings += static_cast<std::size_t>(r.substeps - 1);
            m.t_final = r.t;
            m.energy_final = energy;
            m.defect_abs_sum += std::abs(r.ledger.defect);
            m.defect_abs_max = std::max(m.defect_abs_max, std::abs(r.ledger.defect));
            m.chi_min = std::min(m.chi_min, r.chi_min);
            m.chi_final_min = r.chi_min;
            m.chi_final_max = r.chi_max;
            m.theta_min = std::min(m.theta_min, r.theta_min);
            m.floor_margin_min = std::min(m.floor_margin_min, r.floor_margin);
            m.floor_tol = std::max(m.floor_tol, r.floor_tol);
            m.floor_violation = std::max(m.floor_violation, -r.floor_margin);
            m.chi_rate_excess_max = std::max(m.chi_rate_excess_max, r.chi_rate_excess);
            m.max_abs_p = std::max(m.max_abs_p, r.max_abs_p);
            m.max_grad_p_sq = std::max(m.max_grad_p_sq, r.max_grad_p_sq);
            m.cutoff_steps += r.cutoff_active ? 1 : 0;
            const auto& d = r.dissipation;
            auto& tot = m.dissipation_total;
            tot.viscous += d.viscous;
            tot.plastic += d.plastic;
            tot.preisach += d.preisach;
            tot.phase += d.phase;
            tot.pressure += d.pressure;
            auto& lo = m.dissipation_min;
            if (first_min) {
                lo = d;
                first_min = false;
            } else {
                lo.viscous = std::min(lo.viscous, d.viscous);
                lo.plastic = std::min(lo.plastic, d.plastic);
                lo.preisach = std::min(lo.preisach, d.preisach);
                lo.phase = std::min(lo.phase, d.phase);
                lo.pressure = std::min(lo.pressure, d.pressure);
            }
            m.loop_area += 0.5 * (prev_p * r.probe_g - r.probe_p * prev_g);
            prev_p = r.probe_p;
            prev_g = r.probe_g;
            m.iterations_pressure += r.iters_pressure;
            m.iterations_momentum += r.iters_momentum;
            m.iterations_temperature += r.iters_temperature;

            inv.chi_confined = inv.chi_confined && r.chi_min >= 0.0 && r.chi_max <= 1.0;
            inv.theta_positive = inv.theta_positive && r.positivity_ok && r.theta_min > 0.0;
            inv.floor_respected = inv.floor_respected && r.floor_margin >= -r.floor_tol;
            inv.dissipation_nonnegative = inv.dissipation_nonnegative && d.viscous >= 0.0 && d.plastic >= 0.0 &&
                                          d.preisach >= 0.0 && d.phase >= 0.0 && d.pressure >= 0.0;
            inv.chi_rate_bounded = inv.chi_rate_bounded && r.chi_rate_excess <= 0.0;
            inv.cutoff_inactive = inv.cutoff_inactive && !r.cutoff_active;

            if (write) {
                ts << timeseries_row(r, energy, m.defect_abs_sum) << '\n';
                const std::size_t every = sc.output.snapshot_every;
                if ((every > 0 && r.step % every == 0) || sim.finished()) {
                    write_snapshot(dir / "snapshots", r.step, sim);
                }
            }
        }
        inv.completed = true;
    } catch (const StepFailure& e) {
        res.status = RunStatus::StepFailed;
        res.failure = e.what();
    } catch (const SchemeViolation& e) {
        res.status = RunStatus::StepFailed;
        res.failure = e.what();
    }
    if (sc.checks) {
        inv.chi_excursion = m.chi_min < sc.checks->chi_low && m.chi_final_min > sc.checks->chi_high;
    }
    if (write) {
        ts.close();
        if (res.status == RunStatus::StepFailed) {
            write_snapshot(dir / "snapshots", m.steps, sim);
            write_text(dir / "FAILED", "step " + std::to_string(m.steps + 1) + " at t = " + format_double(m.t_final) +
                                           ": " + res.failure + "\n");
        }
        write_text(dir / "summary.json", summary_json(sc, res, sc.output.seed, probe).dump(2) + "\n");
    }
    return res;
}

namespace {

unsigned thread_count(unsigned requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("POROFREEZE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

LevelResult run_level(const solver::Problem& problem, solver::SolverConfig cfg, std::size_t stride)
{
    LevelResult lv;
    lv.dt = cfg.dt;
    solver::Simulator sim(problem, cfg);
    const auto sample = [&] {
        const auto& s = sim.state();
        lv.p.push_back(s.p);
        lv.theta.push_back(s.theta);
        lv.u.emplace_back(s.u.data(), s.u.data() + s.u.size());
    };
    sample();
    lv.floor_margin_min = sim.state().theta.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    try {
        while (!sim.finished()) {
            const auto r = sim.step();
            lv.steps = r.step;
            lv.defect_abs_sum += std::abs(r.ledger.defect);
            lv.floor_margin_min = std::min(lv.floor_margin_min, r.floor_margin);
            lv.floor_tol = std::max(lv.floor_tol, r.floor_tol);
            lv.floor_violation = std::max(lv.floor_violation, -r.floor_margin);
            if (r.step % stride == 0) sample();
        }
        lv.ok = true;
    } catch (const Error& e) {
        lv.failure = e.what();
    }
    return lv;
}

double l2_difference(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                     const std::vector<double>& weight, std::size_t per_node, double dt0)
{
    const std::size_t n = std::min(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t j = 0; j < a[k].size(); ++j) {
            const double d = a[k][j] - b[k][j];
            sum += weight[j / per_node] * d * d;
        }
    }
    return std::sqrt(dt0 * sum);
}

double safe_ratio(double a, double b)
{
    if (b == 0.0) return a == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return a / b;
}

}  // namespace

bool ConvergeReport::all_levels_ok() const
{
    return !validation_failed && std::all_of(levels.begin(), levels.end(), [](const auto& l) { return l.ok; });
}

ConvergeReport converge(const Scenario& scenario, const ConvergeOptions& options)
{
    if (options.levels < 2) throw InvalidParameter("a refinement study needs at least two levels");
    if (options.factor < 1) throw InvalidParameter("refinement factor must be at least 1");
    Scenario sc = scenario;
    if (options.seed) sc.output.seed = *options.seed;

    ConvergeReport rep;
    rep.validation = validate_scenario(sc);
    if (!rep.validation.all_passed() && !options.force) {
        rep.validation_failed = true;
        return rep;
    }
    const auto problem = build_problem(sc);
    const discretization::Geometry geo(problem.mesh);

    const std::size_t n_levels = options.levels;
    rep.levels.resize(n_levels);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < n_levels; k = next++) {
            auto cfg = sc.solver;
            std::size_t stride = 1;
            for (std::size_t j = 0; j < k; ++j) stride *= options.factor;
            cfg.dt = sc.solver.dt / static_cast<double>(stride);
            rep.levels[k] = run_level(problem, cfg, stride);
        }
    };
    const unsigned n_threads = std::min<unsigned>(thread_count(options.threads), static_cast<unsigned>(n_levels));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const double dt0 = sc.solver.dt;
    const std::size_t dim = static_cast<std::size_t>(problem.mesh.dim);
    const double lf = std::log(static_cast<double>(std::max<std::size_t>(options.factor, 2)));
    for (std::size_t k = 0; k + 1 < n_levels; ++k) {
        const auto& a = rep.levels[k];
        const auto& b = rep.levels[k + 1];
        rep.diff_p.push_back(l2_difference(a.p, b.p, geo.lumped, 1, dt0));
        rep.diff_theta.push_back(l2_difference(a.theta, b.theta, geo.lumped, 1, dt0));
        rep.diff_u.push_back(l2_difference(a.u, b.u, geo.lumped, dim, dt0));
        rep.defect_order.push_back(std::log(safe_ratio(a.defect_abs_sum, b.defect_abs_sum)) / lf);
        rep.floor_tol_ratio.push_back(safe_ratio(a.floor_tol, b.floor_tol));
    }
    for (std::size_t k = 0; k + 1 < rep.diff_p.size(); ++k) {
        rep.factor_p.push_back(safe_ratio(rep.diff_p[k], rep.diff_p[k + 1]));
        rep.factor_theta.push_back(safe_ratio(rep.diff_theta[k], rep.diff_theta[k + 1]));
        rep.factor_u.push_back(safe_ratio(rep.diff_u[k], rep.diff_u[k + 1]));
    }
    return rep;
}

namespace {

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + format_double(x);
    return s.empty() ? "-" : s;
}

}  // namespace

std::string ConvergeReport::to_text() const
{
    std::ostringstream out;
    if (validation_failed) {
        out << "validation failed\n" << validation.to_text();
        return out.str();
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& l = levels[k];
        out << "level " << k << ": dt = " << format_double(l.dt) << ", steps = " << l.steps
            << (l.ok ? "" : ", FAILED: " + l.failure) << ", sum|defect| = " << format_double(l.defect_abs_sum)
            << ", floor margin min = " << format_double(l.floor_margin_min)
            << ", floor tol = " << format_double(l.floor_tol) << '\n';
    }
    out << "L2 differences p:     " << join(diff_p) << '\n';
    out << "L2 differences theta: " << join(diff_theta) << '\n';
    out << "L2 differences u:     " << join(diff_u) << '\n';
    out << "Cauchy factors p:     " << join(factor_p) << '\n';
    out << "Cauchy factors theta: " << join(factor_theta) << '\n';
    out << "Cauchy factors u:     " << join(factor_u) << '\n';
    out << "defect orders:        " << join(defect_order) << '\n';
    out << "floor tol ratios:     " << join(floor_tol_ratio) << '\n';
    return out.str();
}

std::string ConvergeReport::to_json() const
{
    json lv = json::array();
    for (const auto& l : levels) {
        lv.push_back({{"dt", l.dt},
                      {"steps", l.steps},
                      {"ok", l.ok},
                      {"failure", l.failure},
                      {"defect_abs_sum", l.defect_abs_sum},
                      {"floor_margin_min", number(l.floor_margin_min)},
                      {"floor_tol", l.floor_tol},
                      {"floor_violation", l.floor_violation}});
    }
    const auto arr = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(number(x));
        return a;
    };
    json j = {{"schema_version", kSchemaVersion},
              {"validation", validation_json(validation)},
              {"validation_failed", validation_failed},
              {"levels", lv},
              {"diff_p", arr(diff_p)},
              {"diff_theta", arr(diff_theta)},
              {"diff_u", arr(diff_u)},
              {"factor_p", arr(factor_p)},
              {"factor_theta", arr(factor_theta)},
              {"factor_u", arr(factor_u)},
              {"defect_order", arr(defect_order)},
              {"floor_tol_ratio", arr(floor_tol_ratio)}};
    return j.dump(2) + "\n";
}

}  // namespace porofreeze::io
