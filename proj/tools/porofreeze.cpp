#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "porofreeze/errors.hpp"
#include "porofreeze/io/run.hpp"
#include "porofreeze/io/scenario.hpp"

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

using namespace porofreeze;

int cmd_validate(const std::string& config)
{
    const auto scenario = io::load_scenario(config);
    const auto rep = io::validate_scenario(scenario);
    std::cout << rep.to_text();
    std::cout << (rep.all_passed() ? "PASS" : "FAIL") << '\n';
    return rep.all_passed() ? kOk : kFailed;
}

int cmd_run(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed, bool force)
{
    const auto scenario = io::load_scenario(config);
    io::RunOptions opt;
    opt.out_dir = out_dir;
    opt.seed = seed;
    opt.force = force;
    const auto res = io::run_scenario(scenario, opt);
    if (res.status == io::RunStatus::ValidationFailed) {
        std::cerr << res.validation.to_text() << "validation failed; use --force to run anyway\n";
        return kFailed;
    }
    const auto& m = res.metrics;
    const auto& inv = res.invariants;
    std::cout << "steps " << m.steps << ", t = " << io::format_double(m.t_final) << '\n'
              << "chi min " << io::format_double(m.chi_min) << ", chi at end in [" << io::format_double(m.chi_final_min)
              << ", " << io::format_double(m.chi_final_max) << "]\n"
              << "theta min " << io::format_double(m.theta_min) << ", floor margin min "
              << io::format_double(m.floor_margin_min) << '\n'
              << "sum |defect| " << io::format_double(m.defect_abs_sum) << ", loop area "
              << io::format_double(m.loop_area) << '\n'
              << "invariants " << (inv.all() ? "green" : "VIOLATED") << '\n';
    if (res.status == io::RunStatus::StepFailed) {
        std::cerr << "step failure: " << res.failure << '\n';
        return kFailed;
    }
    return inv.all() ? kOk : kFailed;
}

int cmd_converge(const std::string& config, const std::string& out_dir, std::size_t levels, std::size_t factor,
                 std::optional<std::uint64_t> seed, bool force)
{
    const auto scenario = io::load_scenario(config);
    io::ConvergeOptions opt;
    opt.levels = levels;
    opt.factor = factor;
    opt.seed = seed;
    opt.force = force;
    const auto rep = io::converge(scenario, opt);
    std::cout << rep.to_text();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "converge.json", std::ios::binary) << rep.to_json();
    }
    return rep.all_levels_ok() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coupled freezing and water diffusion in a visco-elasto-plastic porous solid"};
    app.require_subcommand(1);

    std::string config, out_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
    std::size_t levels = 4, factor = 2;

    auto* validate = app.add_subcommand("validate", "check a scenario against the model hypotheses");
    validate->add_option("--config", config, "scenario file")->required();

    auto* run = app.add_subcommand("run", "run a scenario and write timeseries, snapshots and summary");
    run->add_option("--config", config, "scenario file")->required();
    run->add_option("--out-dir", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "seed for the initial pressure noise");
    run->add_flag("--force", force, "run even when validation fails");

    auto* conv = app.add_subcommand("converge", "time-step refinement study");
    conv->add_option("--config", config, "scenario file")->required();
    conv->add_option("--levels", levels, "number of refinement levels")->check(CLI::Range(3, 12));
    conv->add_option("--factor", factor, "dt ratio between levels (1 repeats the same run)")->check(CLI::Range(1, 8));
    conv->add_option("--out-dir", out_dir, "directory for converge.json");
    conv->add_option("--seed", seed, "seed for the initial pressure noise");
    conv->add_flag("--force", force, "run even when validation fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) return cmd_validate(config);
        if (*run) return cmd_run(config, out_dir, seed, force);
        return cmd_converge(config, out_dir, levels, factor, seed, force);
    } catch (const ParseError& e) {
        std::cerr << config << ":" << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
}
