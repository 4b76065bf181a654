#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "porofreeze/errors.hpp"
#include "porofreeze/io/expression.hpp"
#include "porofreeze/io/run.hpp"
#include "porofreeze/io/scenario.hpp"

using namespace porofreeze;
using namespace porofreeze::io;

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kVars{"x", "y", "t"};

double ev(const std::string& text, double x = 0.0, double y = 0.0, double t = 0.0)
{
    return Expression::parse(text, kVars).eval({x, y, t});
}

int error_column(const std::string& text)
{
    try {
        Expression::parse(text, kVars);
    } catch (const ParseError& e) {
        return e.column();
    }
    return -1;
}

std::string preset(const std::string& name) { return std::string(PF_PRESET_DIR) + "/" + name + ".yaml"; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("porofreeze_test_io_" + name);
    fs::remove_all(dir);
    return dir;
}

std::pair<int, int> parse_error_position(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return {e.line(), e.column()};
    }
    return {-1, -1};
}

/// Short cycle used by several run tests.
Scenario small_cycle(double t_end = 0.1)
{
    auto s = load_scenario(preset("freeze_thaw"));
    s.mesh.nx = 20;
    s.output.probe = 10;
    s.solver.dt = 0.01;
    s.solver.t_end = t_end;
    return s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

int run_cli(const std::string& args, const fs::path& log)
{
    const std::string cmd = std::string(PF_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST(Expression, PrecedenceAndAssociativity)
{
    EXPECT_EQ(ev("1 + 2 * 3"), 7.0);
    EXPECT_EQ(ev("(1 + 2) * 3"), 9.0);
    EXPECT_EQ(ev("2 ^ 3 ^ 2"), 512.0);
    EXPECT_EQ(ev("-2 ^ 2"), -4.0);
    EXPECT_EQ(ev("2 ^ -1"), 0.5);
    EXPECT_EQ(ev("8 / 4 / 2"), 1.0);
    EXPECT_EQ(ev("10 - 4 - 3"), 3.0);
    EXPECT_EQ(ev("--3"), 3.0);
    EXPECT_EQ(ev("1.5e2 + .5"), 150.5);
}

TEST(Expression, VariablesAndFunctions)
{
    EXPECT_DOUBLE_EQ(ev("x * y + t", 2.0, 3.0, 4.0), 10.0);
    EXPECT_DOUBLE_EQ(ev("sin(pi / 2) + cos(0) + tan(0)"), 2.0);
    EXPECT_DOUBLE_EQ(ev("exp(log(3)) + sqrt(16) + abs(-2) + tanh(0)"), 9.0);
    EXPECT_EQ(ev("min(3, x) + max(3, x) + pow(2, 5)", 1.0), 36.0);
    EXPECT_EQ(ev("step(x - 0.5)", 0.5), 1.0);
    EXPECT_EQ(ev("step(x - 0.5)", 0.4), 0.0);
    const auto e = Expression::parse("3 * t + x", kVars);
    EXPECT_TRUE(e.uses("t"));
    EXPECT_TRUE(e.uses("x"));
    EXPECT_FALSE(e.uses("y"));
    EXPECT_FALSE(e.is_constant());
    EXPECT_TRUE(Expression::parse("2 * pi", kVars).is_constant());
    EXPECT_EQ(e.text(), "3 * t + x");
}

TEST(Expression, ErrorsCarryColumns)
{
    EXPECT_EQ(error_column("1 + foo"), 5);
    EXPECT_EQ(error_column("bar(2)"), 1);
    EXPECT_EQ(error_column("sin(1, 2)"), 1);
    EXPECT_EQ(error_column("(1 + 2"), 7);
    EXPECT_EQ(error_column("1 + * 2"), 5);
    EXPECT_EQ(error_column("1 2"), 3);
    EXPECT_EQ(error_column(""), 1);
    EXPECT_EQ(error_column("x $ y"), 3);
}

TEST(Expression, NumbersRoundTrip)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(mant(rng), expo(rng));
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
        EXPECT_EQ(Expression::parse(format_double(std::abs(v)), {}).eval({}), std::abs(v));
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Scenario, EmptyTextGivesDefaults)
{
    const auto s = parse_scenario("");
    EXPECT_EQ(s.mesh.dim, 1);
    EXPECT_EQ(s.solver.dt, solver::SolverConfig{}.dt);
    EXPECT_EQ(s.model.constants.theta_c, 273.15);
    EXPECT_FALSE(s.checks.has_value());
}

TEST(Scenario, PresetsRoundTrip)
{
    for (const char* name : {"default", "freeze_thaw", "zero_forcing", "linear_regime"}) {
        const auto s = load_scenario(preset(name));
        const std::string text = to_yaml(s);
        const auto again = parse_scenario(text);
        EXPECT_EQ(to_yaml(again), text) << name;
        EXPECT_EQ(again.name, s.name);
        EXPECT_EQ(again.solver.dt, s.solver.dt);
        EXPECT_EQ(again.p_star.text(), s.p_star.text());
        EXPECT_EQ(again.mesh.nx, s.mesh.nx);
        EXPECT_EQ(again.model.yield.sigma_y, s.model.yield.sigma_y);
        EXPECT_EQ(again.checks.has_value(), s.checks.has_value());
    }
}

TEST(Scenario, EverySettingRoundTrips)
{
    Scenario s;
    s.name = "all: settings";
    s.description = "quoted # text";
    s.mesh.dim = 2;
    s.mesh.box = {-1.0, 2.0, 0.25, 0.75};
    s.mesh.nx = 7;
    s.mesh.ny = 3;
    s.model.dim = 2;
    s.model.laws.saturation.nu = 0.1 + 0.2;
    s.model.laws.mobility.modulation = 1.0 / 3.0;
    s.model.yield = plasticity::YieldSurface::cylinder(0.7, 2.5);
    s.density.kind = DensitySpec::Kind::Exponential;
    s.density.exponential.r_scale = 0.3;
    s.alpha = Expression::parse("1 + step(marker - 2)", {"marker", "x", "y", "theta_c", "theta_bar"});
    s.theta_star = Expression::parse("theta_c - 3 * sin(2 * pi * t)", {"x", "y", "t", "theta_c", "theta_bar"});
    s.p_noise = 1e-3;
    s.solver.cutoff_r = std::numeric_limits<double>::infinity();
    s.solver.iterated_splitting = true;
    s.solver.sources.phase = false;
    s.solver.pressure_linearization = solver::Linearization::Tangent;
    s.output.seed = 123456789012345ULL;
    s.output.probe = 4;
    s.checks = ChiChecks{0.25, 0.75};
    const std::string text = to_yaml(s);
    const auto t = parse_scenario(text);
    EXPECT_EQ(to_yaml(t), text);
    EXPECT_EQ(t.name, s.name);
    EXPECT_EQ(t.description, s.description);
    EXPECT_EQ(t.mesh.ny, 3);
    EXPECT_EQ(t.mesh.box.x0, -1.0);
    EXPECT_EQ(t.model.laws.saturation.nu, 0.1 + 0.2);
    EXPECT_EQ(t.model.laws.mobility.modulation, 1.0 / 3.0);
    EXPECT_EQ(t.model.yield.kind, plasticity::YieldSurface::Kind::Cylinder);
    EXPECT_EQ(*t.model.yield.trace_bound, 2.5);
    EXPECT_EQ(t.density.kind, DensitySpec::Kind::Exponential);
    EXPECT_EQ(t.density.exponential.r_scale, 0.3);
    EXPECT_TRUE(std::isinf(t.solver.cutoff_r));
    EXPECT_TRUE(t.solver.iterated_splitting);
    EXPECT_FALSE(t.solver.sources.phase);
    EXPECT_EQ(t.solver.pressure_linearization, solver::Linearization::Tangent);
    EXPECT_EQ(t.output.seed, 123456789012345ULL);
    EXPECT_EQ(t.checks->chi_high, 0.75);
    EXPECT_EQ(t.alpha.eval({3.0, 0.0, 0.0, 0.0, 0.0}), 2.0);
}

TEST(Scenario, ParseErrorsReportLineAndColumn)
{
    EXPECT_EQ(parse_error_position("mesh:\n  dim: 1\n  cels: 4\n"), std::make_pair(3, 3));
    EXPECT_EQ(parse_error_position("solver:\n  dt: fast\n"), std::make_pair(2, 7));
    EXPECT_EQ(parse_error_position("boundary:\n  p_star: 1 + bogus * t\n"), std::make_pair(2, 15));
    EXPECT_EQ(parse_error_position("boundary:\n  p_star: \"1 + bogus\"\n"), std::make_pair(2, 16));
    EXPECT_EQ(parse_error_position("initial:\n  p: t\n"), std::make_pair(2, 6));
    EXPECT_EQ(parse_error_position("solver: [1, 2\n").first, 2);
    EXPECT_EQ(parse_error_position("solver:\n  dt: -1\n").first, 2);
    EXPECT_EQ(parse_error_position("extra: 1\n"), std::make_pair(1, 1));
    EXPECT_EQ(parse_error_position("solver:\n  freeze_phase: yes\n"), std::make_pair(2, 17));
    EXPECT_EQ(parse_error_position("density:\n  kind: table\n").first, 2);
}

TEST(Scenario, ValidationCatchesDataClauses)
{
    const auto ok = validate_scenario(load_scenario(preset("default")));
    EXPECT_TRUE(ok.all_passed()) << ok.to_text();
    for (const char* id : {"(ii)", "(iii)", "(iv)", "(v)"}) EXPECT_TRUE(ok.find(id)->evaluated);

    auto s = parse_scenario("boundary:\n  theta_star: theta_c - 300 * t\nsolver:\n  t_end: 1\n");
    auto rep = validate_scenario(s);
    EXPECT_FALSE(rep.find("(iv)")->passed);
    EXPECT_NE(rep.find("(iv)")->witness.find("theta_bar"), std::string::npos);

    s = parse_scenario("initial:\n  chi: 1.5 * x\n");
    EXPECT_FALSE(validate_scenario(s).find("(v)")->passed);
    s = parse_scenario("initial:\n  theta: 0.5\n");
    EXPECT_FALSE(validate_scenario(s).find("(v)")->passed);
    s = parse_scenario("boundary:\n  alpha: x - 0.5\n");
    EXPECT_FALSE(validate_scenario(s).find("(iii)")->passed);
    s = parse_scenario("boundary:\n  omega: 0\n");
    EXPECT_FALSE(validate_scenario(s).find("(iii)")->passed);

    const std::string two_d = "mesh:\n  dim: 2\n  cells: [4, 4]\n";
    EXPECT_FALSE(validate_scenario(parse_scenario(two_d + "forcing:\n  gravity_x: y\n")).find("(ii)")->passed);
    EXPECT_TRUE(
        validate_scenario(parse_scenario(two_d + "forcing:\n  gravity_x: 2 * x * y\n  gravity_y: x ^ 2 - 1\n"))
            .find("(ii)")
            ->passed);

    s = parse_scenario("materials:\n  saturation:\n    nu: 0.9\n");
    EXPECT_FALSE(validate_scenario(s).find("(vi)")->passed);
}

TEST(Scenario, FilesResolveAgainstConfigDirectory)
{
    const auto dir = scratch("files");
    fs::create_directories(dir / "data");
    std::ofstream(dir / "data" / "column.mesh") << "porofreeze-mesh 1\ndim 1\nnodes 3\n0\n0.4\n1\n"
                                                   "elements 2\n0 1\n1 2\nboundary 2\n0 1\n2 2\n";
    std::ofstream(dir / "data" / "psi.txt") << "# two cells\nr_range 0 1\nv_range -1 1\nshape 1 2\n0.1 0.3\n";
    std::ofstream(dir / "case.yaml") << "mesh:\n  file: data/column.mesh\ndensity:\n  kind: table\n  file: data/psi.txt\n";

    const auto s = load_scenario((dir / "case.yaml").string());
    const auto problem = build_problem(s);
    ASSERT_EQ(problem.mesh.num_nodes(), 3u);
    EXPECT_DOUBLE_EQ(problem.mesh.nodes[1][0], 0.4);
    EXPECT_EQ(problem.mesh.boundary[1].marker, 2);
    const auto density = build_density(s.density, s.base_dir);
    EXPECT_NEAR(density.c_plus(), 0.3, 1e-14);
    EXPECT_NEAR(density.c_minus(), 0.1, 1e-14);

    std::ofstream(dir / "bad.yaml") << "mesh:\n  file: data/missing.mesh\n";
    EXPECT_THROW(build_problem(load_scenario((dir / "bad.yaml").string())), Error);
}

TEST(Run, ZeroForcingIsConstant)
{
    const auto dir = scratch("zero");
    RunOptions opt;
    opt.out_dir = dir.string();
    const auto res = run_scenario(load_scenario(preset("zero_forcing")), opt);
    EXPECT_EQ(res.status, RunStatus::Completed);
    EXPECT_TRUE(res.invariants.all());
    EXPECT_LE(std::abs(res.metrics.loop_area), 1e-12);
    const auto rows = read_csv(dir / "timeseries.csv");
    ASSERT_EQ(rows.size(), 52u);
    const auto& cols = timeseries_columns();
    for (const char* name : {"p_min", "p_max", "theta_min", "theta_max", "chi_min", "chi_max", "energy", "probe_g"}) {
        const auto c = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
        for (std::size_t r = 2; r < rows.size(); ++r) EXPECT_EQ(rows[r][c], rows[1][c]) << name << " row " << r;
    }
}

TEST(Run, OutputsFollowTheSchema)
{
    const auto dir = scratch("schema");
    auto s = small_cycle();
    s.output.snapshot_every = 4;
    RunOptions opt;
    opt.out_dir = dir.string();
    const auto res = run_scenario(s, opt);
    ASSERT_EQ(res.status, RunStatus::Completed);
    const auto rows = read_csv(dir / "timeseries.csv");
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0], timeseries_columns());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ASSERT_EQ(rows[r].size(), timeseries_columns().size());
        EXPECT_EQ(rows[r][0], std::to_string(r - 1));
        for (const auto& cell : rows[r]) EXPECT_EQ(format_double(std::strtod(cell.c_str(), nullptr)), cell);
    }
    for (const char* f : {"fields_000000.csv", "fields_000004.csv", "fields_000008.csv", "fields_000010.csv"}) {
        const auto snap = read_csv(dir / "snapshots" / f);
        ASSERT_EQ(snap.size(), 22u) << f;
        EXPECT_EQ(snap[0], snapshot_columns());
    }
    EXPECT_FALSE(fs::exists(dir / "snapshots" / "fields_000002.csv"));
    const std::string summary = slurp(dir / "summary.json");
    EXPECT_NE(summary.find("\"schema_version\": 1"), std::string::npos);
    EXPECT_NE(summary.find("\"loop_area\""), std::string::npos);
    EXPECT_NE(summary.find("\"chi_excursion\""), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "FAILED"));
}

TEST(Run, SameSeedGivesIdenticalFiles)
{
    auto s = small_cycle();
    s.p_noise = 1e-3;
    const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
    RunOptions opt;
    opt.seed = 7;
    opt.out_dir = a.string();
    run_scenario(s, opt);
    opt.out_dir = b.string();
    run_scenario(s, opt);
    opt.seed = 8;
    opt.out_dir = c.string();
    run_scenario(s, opt);
    for (const char* f : {"timeseries.csv", "summary.json", "snapshots/fields_000010.csv"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_NE(slurp(a / "timeseries.csv"), slurp(c / "timeseries.csv"));
}

TEST(Run, StepFailureLeavesMarker)
{
    auto s = small_cycle();
    s.solver.max_iter = 1;
    s.solver.tol = 1e-15;
    s.solver.max_halvings = 1;
    const auto dir = scratch("fail");
    RunOptions opt;
    opt.out_dir = dir.string();
    const auto res = run_scenario(s, opt);
    EXPECT_EQ(res.status, RunStatus::StepFailed);
    EXPECT_FALSE(res.invariants.completed);
    EXPECT_TRUE(fs::exists(dir / "FAILED"));
    EXPECT_TRUE(fs::exists(dir / "timeseries.csv"));
    EXPECT_NE(slurp(dir / "summary.json").find("step_failed"), std::string::npos);
}

TEST(Run, ValidationFailureStopsUnlessForced)
{
    auto s = small_cycle();
    s.model.laws.saturation.nu = 0.9;
    EXPECT_EQ(run_scenario(s).status, RunStatus::ValidationFailed);
    RunOptions opt;
    opt.force = true;
    EXPECT_EQ(run_scenario(s, opt).status, RunStatus::Completed);
}

TEST(Converge, IdenticalLevelsGiveZeroDifferences)
{
    ConvergeOptions opt;
    opt.levels = 3;
    opt.factor = 1;
    const auto rep = converge(small_cycle(0.05), opt);
    ASSERT_TRUE(rep.all_levels_ok());
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(rep.diff_p[k], 0.0);
        EXPECT_EQ(rep.diff_theta[k], 0.0);
        EXPECT_EQ(rep.diff_u[k], 0.0);
    }
}

TEST(Converge, HalvingShrinksDifferences)
{
    ConvergeOptions opt;
    opt.levels = 3;
    opt.threads = 2;
    const auto rep = converge(small_cycle(0.2), opt);
    ASSERT_TRUE(rep.all_levels_ok()) << rep.to_text();
    ASSERT_EQ(rep.factor_p.size(), 1u);
    EXPECT_GT(rep.factor_p[0], 1.5);
    EXPECT_GT(rep.factor_theta[0], 1.5);
    EXPECT_GT(rep.factor_u[0], 1.5);
    EXPECT_EQ(rep.levels[2].steps, 80u);
    EXPECT_NE(rep.to_json().find("\"defect_order\""), std::string::npos);
}

TEST(Cli, ExitCodes)
{
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    const auto log = dir / "log.txt";

    EXPECT_EQ(run_cli("validate --config " + preset("default"), log), 0);
    EXPECT_NE(slurp(log).find("PASS"), std::string::npos);

    std::ofstream(dir / "nu.yaml") << "materials:\n  saturation:\n    nu: 0.9\n";
    EXPECT_EQ(run_cli("validate --config " + (dir / "nu.yaml").string(), log), 1);
    EXPECT_NE(slurp(log).find("(vi)  FAIL"), std::string::npos);

    std::ofstream(dir / "bad.yaml") << "solver:\n  dt: [1\n";
    EXPECT_EQ(run_cli("validate --config " + (dir / "bad.yaml").string(), log), 2);
    EXPECT_NE(slurp(log).find("bad.yaml:"), std::string::npos);

    EXPECT_EQ(run_cli("validate --config " + (dir / "missing.yaml").string(), log), 2);
    EXPECT_EQ(run_cli("frobnicate", log), 2);
    EXPECT_EQ(run_cli("converge --config " + preset("default") + " --levels 2", log), 2);

    EXPECT_EQ(run_cli("run --config " + preset("zero_forcing") + " --out-dir " + (dir / "out").string(), log), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
    EXPECT_EQ(run_cli("run --config " + preset("linear_regime") + " --out-dir " + (dir / "lin").string(), log), 1);
    EXPECT_EQ(
        run_cli("run --config " + preset("linear_regime") + " --out-dir " + (dir / "lin").string() + " --force", log),
        0);
}
