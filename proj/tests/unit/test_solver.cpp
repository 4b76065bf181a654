#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "porofreeze/errors.hpp"
#include "porofreeze/solver/floor.hpp"
#include "porofreeze/solver/simulator.hpp"

using namespace porofreeze;
using namespace porofreeze::solver;

namespace {

constexpr double kPi = std::numbers::pi;

Problem line_problem(int elements)
{
    Problem pr;
    pr.mesh = discretization::build_mesh(1, {0.0, 1.0, 0.0, 1.0}, elements);
    return pr;
}

/// Short freeze-thaw cycle with every coupling and dissipation channel active.
Problem cycle_problem(int elements, double yield = 1.0)
{
    Problem pr = line_problem(elements);
    const double tc = pr.model.constants.theta_c;
    pr.model.yield.sigma_y = yield;
    pr.boundary.alpha = [](int, double, double) { return 10.0; };
    pr.boundary.omega = [](int, double, double) { return 100.0; };
    pr.boundary.p_star = [](double, double, double t) { return 0.5 * std::sin(kPi * t); };
    pr.boundary.theta_star = [tc](double, double, double t) { return tc - 15.0 * std::sin(kPi * t); };
    pr.initial.theta = [tc](double, double) { return tc; };
    pr.probe_node = static_cast<std::size_t>(elements / 2);
    return pr;
}

SolverConfig short_run(double dt, double t_end)
{
    SolverConfig c;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Amplitude of cos(pi x) in a nodal field under lumped weights.
double cosine_amplitude(const Simulator& sim, const std::vector<double>& field)
{
    const auto& m = sim.geometry().lumped;
    const auto& nodes = sim.problem().mesh.nodes;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double e = std::cos(kPi * nodes[i][0]);
        num += m[i] * field[i] * e;
        den += m[i] * e * e;
    }
    return num / den;
}

// Pure diffusion: linear saturation, no hysteresis, constant mobility, other equations frozen.
Problem linear_diffusion(int elements, double slope)
{
    Problem pr = line_problem(elements);
    pr.model.laws.saturation.kind = constitutive::SaturationLaw::Kind::Linear;
    pr.model.laws.saturation.slope = slope;
    pr.model.density = hysteresis::PreisachDensity::zero();
    pr.initial.p = [](double x, double) { return std::cos(kPi * x); };
    return pr;
}

SolverConfig frozen_except_pressure(double dt, double t_end)
{
    SolverConfig c = short_run(dt, t_end);
    c.freeze_phase = true;
    c.freeze_mechanics = true;
    c.freeze_temperature = true;
    return c;
}

}  // namespace

TEST(Phase, ClampedUpdateExamples)
{
    EXPECT_EQ(phase_update(0.4, 0.0, 1.0, 0.1), 0.4);
    EXPECT_EQ(phase_update(0.9, 2.0, 1.0, 0.1), 1.0);
    EXPECT_NEAR(phase_update(0.5, -2.0, 1.0, 0.1), 0.3, 1e-15);
    EXPECT_EQ(phase_update(0.05, -2.0, 1.0, 0.1), 0.0);
}

TEST(Config, RejectsInconsistentSettings)
{
    SolverConfig c;
    c.cutoff_r = 1.0;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = SolverConfig{};
    c.eta = 0.1;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c.mode = Mode::Spectral;
    EXPECT_NO_THROW(c.validate());
    c.eta = 1.0;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = SolverConfig{};
    c.dt = 0.0;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = short_run(0.3, 1.0);
    EXPECT_EQ(c.num_steps(), 4u);
}

TEST(Simulator, InitialDataIsChecked)
{
    Problem pr = line_problem(4);
    pr.initial.theta = [](double, double) { return 0.5; };
    EXPECT_THROW(Simulator(pr, SolverConfig{}), InvalidSetup);
    pr = line_problem(4);
    pr.initial.chi = [](double x, double) { return 1.0 + x; };
    EXPECT_THROW(Simulator(pr, SolverConfig{}), InvalidSetup);
    pr = line_problem(4);
    pr.model.dim = 2;
    EXPECT_THROW(Simulator(pr, SolverConfig{}), InvalidSetup);
}

TEST(Simulator, StationaryStateIsKept)
{
    for (int dim : {1, 2}) {
        Problem pr;
        pr.mesh = discretization::build_mesh(dim, {0.0, 1.0, 0.0, 1.0}, 6, 5);
        pr.model.dim = dim;
        pr.boundary.alpha = [](int, double, double) { return 1.0; };
        pr.boundary.omega = [](int, double, double) { return 1.0; };
        pr.boundary.p_star = [](double, double, double) { return 0.3; };
        pr.boundary.theta_star = [](double, double, double) { return 1.0; };
        pr.initial.p = [](double, double) { return 0.3; };
        pr.initial.chi = [](double, double) { return 0.0; };
        Simulator sim(pr, short_run(0.1, 0.5));
        const SimState start = sim.state();
        for (const auto& rep : sim.run()) {
            EXPECT_LE(std::abs(rep.ledger.defect), 1e-12);
            EXPECT_EQ(rep.substeps, 1);
        }
        EXPECT_LE(max_diff(sim.state().p, start.p), 1e-13);
        EXPECT_LE(max_diff(sim.state().theta, start.theta), 1e-13);
        EXPECT_EQ(sim.state().chi, start.chi);
        EXPECT_LE(sim.state().u.cwiseAbs().maxCoeff(), 1e-13);
    }
}

// One element with uniform data is a single scalar ODE: (1/2) dc/dt = -alpha (p - p*),
// c = f(p) + G0(p). Loading a virgin uniform density monotonically gives G0(p) = 0.1 p^2.
TEST(Pressure, ZeroDimensionalRelaxationMatchesOdeOracle)
{
    const double p_target = 0.8, t_end = 0.1;
    const constitutive::SaturationLaw f;
    const auto content = [&](double p) { return f.value(p) + 0.1 * p * p; };
    const auto pressure_of = [&](double c) {
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (lo + hi);
            (content(mid) < c ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    // classical RK4 in the content variable
    const int fine = 20000;
    std::vector<double> oracle{0.0};
    double c = content(0.0);
    const auto rhs = [&](double cc) { return -2.0 * (pressure_of(cc) - p_target); };
    const double h = t_end / fine;
    for (int k = 0; k < fine; ++k) {
        const double k1 = rhs(c), k2 = rhs(c + 0.5 * h * k1), k3 = rhs(c + 0.5 * h * k2), k4 = rhs(c + h * k3);
        c += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if ((k + 1) % 2000 == 0) oracle.push_back(pressure_of(c));
    }

    std::vector<double> errors;
    for (double dt : {0.01, 0.005, 0.0025}) {
        Problem pr = line_problem(1);
        pr.boundary.alpha = [](int, double, double) { return 1.0; };
        pr.boundary.p_star = [&](double, double, double) { return p_target; };
        SolverConfig cfg = frozen_except_pressure(dt, t_end);
        cfg.preisach_levels = 2000;
        Simulator sim(pr, cfg);
        double err = 0.0, prev = 0.0;
        const auto every = static_cast<std::size_t>(std::lround(0.01 / dt));
        sim.run([&](const StepReport& rep, const SimState& s) {
            const double p = s.p[0];
            EXPECT_NEAR(p, s.p[1], 1e-14);
            EXPECT_GT(p, prev);
            EXPECT_LT(p, p_target);
            prev = p;
            if (rep.step % every == 0) err = std::max(err, std::abs(p - oracle[rep.step / every]));
            return true;
        });
        errors.push_back(err);
    }
    EXPECT_LT(errors[0], 0.02);
    for (int k = 0; k < 2; ++k) {
        const double ratio = errors[static_cast<std::size_t>(k)] / errors[static_cast<std::size_t>(k) + 1];
        EXPECT_GT(ratio, 1.7);
        EXPECT_LT(ratio, 2.3);
    }
}

// cos(pi x) is an exact eigenvector of the lumped P1 Neumann Laplacian on a uniform grid with
// eigenvalue (2 - 2 cos(pi h)) / h^2.
TEST(Pressure, EigenmodeDecayInFemMode)
{
    const int elements = 32;
    const double slope = 0.5, t_end = 0.1, h = 1.0 / elements;
    const double lambda = (2.0 - 2.0 * std::cos(kPi * h)) / (h * h) / slope;
    std::vector<double> errors;
    for (double dt : {0.004, 0.002, 0.001}) {
        Simulator sim(linear_diffusion(elements, slope), frozen_except_pressure(dt, t_end));
        sim.run();
        const double amp = cosine_amplitude(sim, sim.state().p);
        const double steps = std::round(t_end / dt);
        EXPECT_NEAR(amp, std::pow(1.0 + dt * lambda, -steps), 1e-10);
        errors.push_back(std::abs(amp - std::exp(-lambda * t_end)));
    }
    EXPECT_GT(errors[0] / errors[1], 1.8);
    EXPECT_GT(errors[1] / errors[2], 1.8);
    EXPECT_LT(errors[0] / errors[1], 2.2);
}

TEST(Pressure, EigenmodeDecayInSpectralMode)
{
    const double slope = 0.5, dt = 0.002, t_end = 0.1;
    for (double eta : {0.0, 0.01}) {
        SolverConfig cfg = frozen_except_pressure(dt, t_end);
        cfg.mode = Mode::Spectral;
        cfg.eta = eta;
        Simulator sim(linear_diffusion(32, slope), cfg);
        sim.run();
        const double l = kPi * kPi;
        const double expected = std::pow(1.0 + dt * (l + eta * l * l) / slope, -std::round(t_end / dt));
        EXPECT_NEAR(cosine_amplitude(sim, sim.state().p), expected, 1e-10);
        EXPECT_NEAR(sim.state().v_modes[1], expected / std::sqrt(2.0), 1e-10);
    }
}

TEST(Pressure, HigherOrderTermDampsHighModes)
{
    auto pr = linear_diffusion(32, 0.5);
    pr.initial.p = [](double x, double) { return std::cos(kPi * x) + 0.2 * std::cos(6.0 * kPi * x); };
    std::vector<double> high;
    for (double eta : {0.0, 0.005}) {
        SolverConfig cfg = frozen_except_pressure(0.001, 0.01);
        cfg.mode = Mode::Spectral;
        cfg.eta = eta;
        Simulator sim(pr, cfg);
        sim.run();
        const auto& q = sim.state().v_modes;
        high.push_back(q.tail(q.size() - 2).squaredNorm());
    }
    EXPECT_GT(high[0], 0.0);
    EXPECT_LT(high[1], high[0]);
}

TEST(Pressure, TangentAndSecantAgree)
{
    std::vector<std::vector<double>> p;
    for (auto lin : {Linearization::Secant, Linearization::Tangent}) {
        SolverConfig cfg = short_run(0.01, 0.1);
        cfg.pressure_linearization = lin;
        Simulator sim(cycle_problem(20), cfg);
        sim.run();
        p.push_back(sim.state().p);
    }
    EXPECT_LE(max_diff(p[0], p[1]), 1e-8);
}

// With a huge yield stress the stop operator stays elastic and P = (Ah + Ae) eps. For
// -2 u'' = 1, u(0) = u(1) = 0 the P1 solution with lumped load is nodally exact: x (1 - x) / 4.
TEST(Momentum, RelaxesToElasticEquilibrium)
{
    Problem pr = line_problem(16);
    pr.model.yield.sigma_y = 1e12;
    pr.gravity = [](double, double, double) { return std::array<double, 2>{1.0, 0.0}; };
    SolverConfig cfg = short_run(5.0, 100.0);
    cfg.freeze_phase = true;
    cfg.freeze_pressure = true;
    cfg.freeze_temperature = true;
    Simulator sim(pr, cfg);
    Eigen::VectorXd prev = sim.state().u;
    double last_change = 0.0;
    sim.run([&](const StepReport&, const SimState& s) {
        last_change = (s.u - prev).cwiseAbs().maxCoeff();
        prev = s.u;
        return true;
    });
    EXPECT_LT(last_change, 1e-10);
    const auto& nodes = pr.mesh.nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x = nodes[i][0];
        EXPECT_NEAR(sim.state().u[static_cast<Eigen::Index>(i)], x * (1.0 - x) / 4.0, 1e-10);
    }
}

TEST(Momentum, PlasticStressStaysAdmissible)
{
    Simulator sim(cycle_problem(20, 0.002), short_run(0.01, 0.5));
    double plastic = 0.0;
    for (const auto& rep : sim.run()) plastic += rep.dissipation.plastic;
    EXPECT_GT(plastic, 0.0);
    for (const auto& pt : sim.state().plastic) EXPECT_TRUE(sim.problem().model.yield.contains(pt.sigma_p, 1e-12));
}

// Backward Euler in C_V is exact for a constant source, so the scheme matches the ODE
// C_V(theta)' = S to solver tolerance.
TEST(Temperature, AdiabaticHeatingMatchesOdeOracle)
{
    const double source = 2.0, t_end = 1.0;
    Problem pr = line_problem(4);
    pr.heat_source = [&](double, double, double) { return source; };
    SolverConfig cfg = short_run(0.1, t_end);
    cfg.freeze_phase = true;
    cfg.freeze_pressure = true;
    cfg.freeze_mechanics = true;
    Simulator sim(pr, cfg);
    for (const auto& rep : sim.run()) EXPECT_LE(std::abs(rep.ledger.defect), 1e-10);

    const constitutive::HeatCapacityLaw cv;
    const auto rhs = [&](double th) { return source / cv.value(th); };
    double th = 1.0;
    const int fine = 10000;
    const double h = t_end / fine;
    for (int k = 0; k < fine; ++k) {
        const double k1 = rhs(th), k2 = rhs(th + 0.5 * h * k1), k3 = rhs(th + 0.5 * h * k2), k4 = rhs(th + h * k3);
        th += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    for (double t : sim.state().theta) EXPECT_NEAR(t, th, 1e-9);
}

TEST(Temperature, DisablingSourcesLowersTemperature)
{
    SolverConfig cfg = short_run(0.01, 0.3);
    std::vector<double> means;
    const std::vector<std::function<void(SourceToggles&)>> off{
        [](SourceToggles&) {},
        [](SourceToggles& s) { s.viscous = false; },
        [](SourceToggles& s) { s.plastic = false; },
        [](SourceToggles& s) { s.pressure = false; },
        [](SourceToggles& s) { s.preisach = false; },
        [](SourceToggles& s) { s.phase = false; },
    };
    Dissipation totals;
    for (const auto& toggle : off) {
        toggle(cfg.sources);
        Simulator sim(cycle_problem(20, 0.002), cfg);
        for (const auto& rep : sim.run()) {
            if (means.empty()) {
                totals.viscous += rep.dissipation.viscous;
                totals.plastic += rep.dissipation.plastic;
                totals.pressure += rep.dissipation.pressure;
                totals.preisach += rep.dissipation.preisach;
                totals.phase += rep.dissipation.phase;
            }
        }
        means.push_back(mean(sim.state().theta));
    }
    EXPECT_GT(totals.viscous, 0.0);
    EXPECT_GT(totals.plastic, 0.0);
    EXPECT_GT(totals.pressure, 0.0);
    EXPECT_GT(totals.preisach, 0.0);
    EXPECT_GT(totals.phase, 0.0);
    for (std::size_t k = 1; k < means.size(); ++k) EXPECT_LT(means[k], means[k - 1]) << "toggle " << k;
}

TEST(Floor, ClosedForms)
{
    constitutive::HeatCapacityLaw linear;  // c_V = 1, C_V(theta) = theta
    linear.c_flat = 0.5;
    linear.b = 0.0;
    const auto fl = theta_floor(linear, 1.0, 1.0, 1.0);
    EXPECT_NEAR(fl.theta_t, 0.5, 1e-12);
    EXPECT_NEAR(fl.at(0.5), 1.0 / 1.5, 1e-9);
    for (std::size_t k = 1; k < fl.phi.size(); ++k) {
        EXPECT_LT(fl.phi[k], fl.phi[k - 1]);
        EXPECT_GT(fl.phi[k], 0.0);
    }
    const auto flat = theta_floor(constitutive::HeatCapacityLaw{}, 0.0, 2.0, 3.0);
    for (double phi : flat.phi) EXPECT_EQ(phi, 2.0);

    const constitutive::ModelParameters params;
    const double expected = std::pow(1.0 / 273.15, 2) / (4.0 * 1e-4) + 3.0 * 0.01 / 4.0;
    EXPECT_NEAR(floor_constant(params.laws, params.constants, params.tensors, 1), expected, 1e-14);
}

// Melting at high pressure draws latent heat through the sink while the boundary cools
// the column towards theta_bar.
TEST(Temperature, CoolingStaysAboveFloor)
{
    for (double r : {100.0, std::numeric_limits<double>::infinity()}) {
        Problem pr = line_problem(10);
        pr.model.laws.relaxation.g_flat = 0.05;
        pr.model.laws.relaxation.g_sharp = 0.1;
        pr.initial.p = [](double, double) { return 40.0; };
        pr.initial.chi = [](double, double) { return 0.0; };
        pr.initial.theta = [](double, double) { return 3.0; };
        pr.boundary.alpha = [](int, double, double) { return 10.0; };
        pr.boundary.p_star = [](double, double, double) { return 40.0; };
        pr.boundary.omega = [](int, double, double) { return 50.0; };
        SolverConfig cfg = short_run(0.01, 2.0);
        cfg.cutoff_r = r;
        Simulator sim(pr, cfg);
        double first = 0.0, last = 0.0;
        for (const auto& rep : sim.run()) {
            EXPECT_GE(rep.floor_margin, -rep.floor_tol);
            EXPECT_TRUE(rep.positivity_ok);
            EXPECT_EQ(rep.chi_rate_excess, 0.0);
            if (rep.step == 1) first = rep.theta_min;
            last = rep.theta_min;
        }
        EXPECT_LT(last, first);
        EXPECT_EQ(sim.state().chi.front(), 1.0);
    }
}

TEST(Cutoff, MonitorFlagsExactNodes)
{
    Problem pr = line_problem(10);
    pr.initial.p = [](double x, double) { return 3.0 * x; };
    SolverConfig cfg;
    cfg.cutoff_r = 2.0;
    const Simulator sim(pr, cfg);
    const auto rep = sim.monitor();
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < pr.mesh.num_nodes(); ++i) {
        if (3.0 * pr.mesh.nodes[i][0] > 2.0) expected.push_back(i);
    }
    EXPECT_EQ(rep.p_nodes, expected);
    EXPECT_TRUE(rep.theta_nodes.empty());
    EXPECT_EQ(rep.grad_elements.size(), 10u);
    EXPECT_TRUE(rep.active());

    cfg.cutoff_r = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(Simulator(pr, cfg).monitor().active());
}

TEST(Cutoff, InactiveLevelDoesNotChangeTrajectory)
{
    const SolverConfig base = short_run(0.01, 0.3);
    Simulator probe(cycle_problem(20), base);
    double peak = 0.0;
    for (const auto& rep : probe.run()) peak = std::max({peak, rep.max_abs_p, rep.theta_max, rep.max_grad_p_sq});

    std::vector<SimState> ends;
    for (double r : {2.0 * peak, 4.0 * peak}) {
        SolverConfig cfg = base;
        cfg.cutoff_r = r;
        Simulator sim(cycle_problem(20), cfg);
        for (const auto& rep : sim.run()) EXPECT_FALSE(rep.cutoff_active);
        ends.push_back(sim.state());
    }
    EXPECT_LE(max_diff(ends[0].p, ends[1].p), 1e-12);
    EXPECT_LE(max_diff(ends[0].theta, ends[1].theta), 1e-12);
    EXPECT_LE(max_diff(ends[0].chi, ends[1].chi), 1e-12);
    EXPECT_LE((ends[0].u - ends[1].u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ledger, DefectIsFirstOrder)
{
    std::vector<double> totals;
    for (double dt : {0.02, 0.01, 0.005}) {
        Simulator sim(cycle_problem(20, 0.002), short_run(dt, 0.4));
        double total = 0.0;
        for (const auto& rep : sim.run()) {
            total += std::abs(rep.ledger.defect);
            EXPECT_GE(rep.ledger.cut_waste, 0.0);
        }
        totals.push_back(total);
    }
    for (int k = 0; k < 2; ++k) {
        const double order = std::log2(totals[static_cast<std::size_t>(k)] / totals[static_cast<std::size_t>(k) + 1]);
        EXPECT_GT(order, 0.8);
        EXPECT_LT(order, 1.2);
    }
}

TEST(Simulator, InvariantsHoldInTwoDimensions)
{
    Problem pr = cycle_problem(4, 0.002);
    pr.mesh = discretization::build_mesh(2, {0.0, 1.0, 0.0, 1.0}, 6, 6);
    pr.model.dim = 2;
    pr.probe_node = 24;
    pr.gravity = [](double, double, double) { return std::array<double, 2>{0.0, -0.1}; };
    Simulator sim(pr, short_run(0.02, 0.4));
    double defect = 0.0;
    for (const auto& rep : sim.run()) {
        EXPECT_GE(rep.chi_min, 0.0);
        EXPECT_LE(rep.chi_max, 1.0);
        EXPECT_GT(rep.theta_min, 0.0);
        EXPECT_EQ(rep.chi_rate_excess, 0.0);
        EXPECT_GE(rep.dissipation.viscous, 0.0);
        EXPECT_GE(rep.dissipation.plastic, 0.0);
        EXPECT_GE(rep.dissipation.preisach, 0.0);
        EXPECT_GE(rep.dissipation.phase, 0.0);
        defect += std::abs(rep.ledger.defect);
    }
    EXPECT_LT(defect, 1e-2);
    EXPECT_LT(sim.state().chi[24], 1.0);
}

TEST(Simulator, IteratedSplittingStaysClose)
{
    std::vector<SimState> ends;
    int sweeps = 0;
    for (bool iterate : {false, true}) {
        SolverConfig cfg = short_run(0.005, 0.2);
        cfg.iterated_splitting = iterate;
        Simulator sim(cycle_problem(20), cfg);
        for (const auto& rep : sim.run()) sweeps = std::max(sweeps, rep.sweeps);
        ends.push_back(sim.state());
    }
    EXPECT_GE(sweeps, 2);
    EXPECT_LT(max_diff(ends[0].p, ends[1].p), 1e-2);
    EXPECT_LT(max_diff(ends[0].theta, ends[1].theta), 0.5);
}

TEST(Simulator, SameSeedSameTrajectory)
{
    const auto final_state = [](std::uint64_t seed) {
        Problem pr = cycle_problem(20);
        pr.initial.p_noise = 0.05;
        pr.seed = seed;
        Simulator sim(pr, short_run(0.01, 0.1));
        sim.run();
        return sim.state();
    };
    const auto a = final_state(7), b = final_state(7), c = final_state(8);
    EXPECT_EQ(a.p, b.p);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.u, b.u);
    EXPECT_NE(a.p, c.p);
}

TEST(Simulator, GivesUpAfterBoundedHalvings)
{
    SolverConfig cfg = short_run(0.05, 0.1);
    cfg.max_iter = 1;
    cfg.tol = 1e-15;
    cfg.max_halvings = 2;
    Simulator sim(cycle_problem(20), cfg);
    EXPECT_THROW(sim.step(), StepFailure);
}

TEST(Simulator, RunStopsWhenCallbackDeclines)
{
    Simulator sim(cycle_problem(10), short_run(0.01, 0.1));
    const auto reps = sim.run([](const StepReport& r, const SimState&) { return r.step < 3; });
    EXPECT_EQ(reps.size(), 3u);
    EXPECT_FALSE(sim.finished());
    EXPECT_NEAR(sim.state().t, 0.03, 1e-15);
}
