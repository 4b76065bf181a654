#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "porofreeze/hysteresis/density.hpp"

namespace porofreeze::hysteresis {

/// Density paired with the r-grid used to discretize the superposition of plays.
class PreisachModel {
public:
    PreisachModel(PreisachDensity density, RGrid grid);

    /// Midpoint grid with `levels` nodes over the r-support of the density.
    static PreisachModel with_levels(PreisachDensity density, std::size_t levels);

    const PreisachDensity& density() const { return density_; }
    const RGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.size(); }

    double radius(std::size_t j) const { return grid_.levels[j]; }
    double weight(std::size_t j) const { return grid_.weights[j]; }
    double cum0(std::size_t j, double v) const { return density_.cum0(grid_.levels[j], v); }
    double cum1(std::size_t j, double v) const { return density_.cum1(grid_.levels[j], v); }
    double value(std::size_t j, double v) const { return density_.value(grid_.levels[j], v); }

    /// True if psi vanishes identically; callers may skip the memory update.
    bool trivial() const { return trivial_; }

private:
    PreisachDensity density_;
    RGrid grid_;
    bool trivial_ = false;
};

/// Memory state of all plays at one spatial point.
struct PlayBank {
    std::vector<double> xi;
    double last_input = 0.0;
};

/// Changes of G0, U0 and D0 over one update of a bank.
struct HysteresisIncrement {
    double dG0 = 0.0;
    double dU0 = 0.0;
    double dD0abs = 0.0;
    /// Input work int p dG0 along the straight input segment of the step.
    double work = 0.0;
    /// p_new * dG0 - work >= 0; the excess of the end-point product over the path work.
    double endpoint_excess = 0.0;

    double identity_residual() const { return work - dU0 - dD0abs; }
};

PlayBank init_bank(const PreisachModel& model, double p0);

/// G0 = sum_j w_j cum0(r_j, xi_j). Throws InvalidState on a size mismatch.
double preisach_eval(const PlayBank& bank, const PreisachModel& model);
/// Preisach potential U0 = sum_j w_j cum1(r_j, xi_j).
double preisach_potential(const PlayBank& bank, const PreisachModel& model);
/// Signed dissipation state D0 = sum_j w_j r_j cum0(r_j, xi_j).
double preisach_dissipation_state(const PlayBank& bank, const PreisachModel& model);

/// Advances every play of the bank to the input p_new and reports the increments.
HysteresisIncrement preisach_step(PlayBank& bank, double p_new, const PreisachModel& model);

/// G0 after a hypothetical update to p_new, without touching the bank, together
/// with dG0/dp along the direction of the update (plays that move contribute).
struct TrialValue {
    double g0 = 0.0;
    double slope = 0.0;
};
TrialValue preisach_trial(const PlayBank& bank, double p_new, const PreisachModel& model);

/// U_h = sum_j w_j int_0^{xi_j} h(v) psi(r_j, v) dv for a nondecreasing h.
/// Throws InvalidParameter if sampled slopes of h are negative.
double modified_potential(const PlayBank& bank, const PreisachModel& model,
                          const std::function<double(double)>& h);

/// G[p] = f(p) + G0[p] with f supplied by the caller (typically the saturation law).
double g_eval(double p, const PlayBank& bank, const PreisachModel& model,
              const std::function<double(double)>& f);

}  // namespace porofreeze::hysteresis
