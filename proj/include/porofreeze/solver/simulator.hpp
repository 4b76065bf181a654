#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "porofreeze/constitutive/cutoff.hpp"
#include "porofreeze/discretization/fem.hpp"
#include "porofreeze/solver/monitor.hpp"
#include "porofreeze/solver/problem.hpp"
#include "porofreeze/solver/state.hpp"

namespace porofreeze::solver {

/// Backward-Euler resolvent of gamma chi_t + dI_[0,1](chi) ∋ F with F frozen.
double phase_update(double chi, double drive, double gamma, double dt);

/// Semi-implicit splitting scheme for the coupled system: each step advances the phase
/// fraction, pressure, displacement and temperature in this order.
class Simulator {
public:
    Simulator(Problem problem, SolverConfig config);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    const Problem& problem() const;
    const SolverConfig& config() const;
    const discretization::Geometry& geometry() const;
    const constitutive::CutoffPack& pack() const;
    const hysteresis::PreisachModel& preisach() const;
    const SimState& state() const;

    bool finished() const;
    /// Advances by config.dt, halving the step on solver failure up to max_halvings times.
    StepReport step();
    /// Steps to t_end; the callback sees every report and may return false to stop.
    std::vector<StepReport> run(const std::function<bool(const StepReport&, const SimState&)>& on_step = {});

    /// Discrete internal energy of the ledger for a state.
    double internal_energy(const SimState& s) const;
    /// Phase drive (numerator of chi_t) and relaxation at every node.
    std::vector<double> phase_drive(const SimState& s) const;
    std::vector<double> relaxation(const SimState& s) const;
    /// f_R(p) + G0[p] at every node.
    std::vector<double> saturation(const SimState& s) const;
    std::vector<double> nodal_divergence(const SimState& s) const;
    CutoffReport monitor() const;
    /// Current floor value phi(t).
    double floor_value() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace porofreeze::solver
