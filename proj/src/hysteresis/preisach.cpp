#include "porofreeze/hysteresis/preisach.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "porofreeze/errors.hpp"
#include "porofreeze/hysteresis/play.hpp"

namespace porofreeze::hysteresis {

PreisachModel::PreisachModel(PreisachDensity density, RGrid grid)
    : density_(std::move(density)), grid_(std::move(grid))
{
    if (grid_.levels.size() != grid_.weights.size() || grid_.levels.empty()) {
        throw InvalidParameter("r-grid levels and weights must be non-empty and of equal length");
    }
    for (std::size_t j = 0; j < grid_.size(); ++j) {
        if (!(grid_.weights[j] > 0.0) || !(grid_.levels[j] >= 0.0) ||
            (j > 0 && !(grid_.levels[j] > grid_.levels[j - 1]))) {
            throw InvalidParameter("r-grid needs strictly increasing levels and positive weights");
        }
    }
    trivial_ = density_.kind() == PreisachDensity::Kind::Table &&
               std::all_of(density_.table().values.begin(), density_.table().values.end(),
                           [](double psi) { return psi == 0.0; });
}

PreisachModel PreisachModel::with_levels(PreisachDensity density, std::size_t levels)
{
    auto grid = RGrid::midpoint(density.r_lo(), density.r_hi(), levels);
    return PreisachModel(std::move(density), std::move(grid));
}

namespace {
void require_consistent(const PlayBank& bank, const PreisachModel& model)
{
    if (bank.xi.size() != model.size()) {
        throw InvalidState("play bank has " + std::to_string(bank.xi.size()) +
                           " levels but the r-grid has " + std::to_string(model.size()));
    }
}
}  // namespace

PlayBank init_bank(const PreisachModel& model, double p0)
{
    PlayBank bank;
    bank.xi.resize(model.size());
    for (std::size_t j = 0; j < model.size(); ++j) bank.xi[j] = play_init(p0, model.radius(j));
    bank.last_input = p0;
    return bank;
}

double preisach_eval(const PlayBank& bank, const PreisachModel& model)
{
    require_consistent(bank, model);
    double g = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) g += model.weight(j) * model.cum0(j, bank.xi[j]);
    return g;
}

double preisach_potential(const PlayBank& bank, const PreisachModel& model)
{
    require_consistent(bank, model);
    double u = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) u += model.weight(j) * model.cum1(j, bank.xi[j]);
    return u;
}

double preisach_dissipation_state(const PlayBank& bank, const PreisachModel& model)
{
    require_consistent(bank, model);
    double d = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        d += model.weight(j) * model.radius(j) * model.cum0(j, bank.xi[j]);
    }
    return d;
}

HysteresisIncrement preisach_step(PlayBank& bank, double p_new, const PreisachModel& model)
{
    require_consistent(bank, model);
    HysteresisIncrement inc;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double r = model.radius(j);
        const double w = model.weight(j);
        const double xi_old = bank.xi[j];
        const double xi_new = play_step(xi_old, p_new, r);
        if (xi_new == xi_old) continue;
        const double d0 = model.cum0(j, xi_new) - model.cum0(j, xi_old);
        const double d1 = model.cum1(j, xi_new) - model.cum1(j, xi_old);
        // While the play moves the input sits on the band edge p = xi + r*sign.
        const double side = xi_new > xi_old ? r : -r;
        inc.dG0 += w * d0;
        inc.dU0 += w * d1;
        inc.dD0abs += w * r * std::abs(d0);
        inc.work += w * (d1 + side * d0);
        bank.xi[j] = xi_new;
    }
    inc.endpoint_excess = p_new * inc.dG0 - inc.work;
    bank.last_input = p_new;
    return inc;
}

TrialValue preisach_trial(const PlayBank& bank, double p_new, const PreisachModel& model)
{
    require_consistent(bank, model);
    TrialValue out;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double r = model.radius(j);
        const double xi = play_step(bank.xi[j], p_new, r);
        out.g0 += model.weight(j) * model.cum0(j, xi);
        if (xi != bank.xi[j]) out.slope += model.weight(j) * model.value(j, xi);
    }
    return out;
}

double modified_potential(const PlayBank& bank, const PreisachModel& model,
                          const std::function<double(double)>& h)
{
    require_consistent(bank, model);
    if (model.trivial()) return 0.0;

    double lo = 0.0, hi = 0.0;
    for (double x : bank.xi) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (std::isfinite(model.density().v_lo())) lo = std::min(lo, model.density().v_lo());
    if (std::isfinite(model.density().v_hi())) hi = std::max(hi, model.density().v_hi());
    lo -= 1.0;
    hi += 1.0;
    constexpr int samples = 2000;
    double prev = h(lo);
    for (int k = 1; k <= samples; ++k) {
        const double v = lo + (hi - lo) * k / samples;
        const double cur = h(v);
        if (cur < prev - 1e-12 * (1.0 + std::abs(prev))) {
            throw InvalidParameter("modified potential requires a nondecreasing h; slope < 0 near v = " +
                                   std::to_string(v));
        }
        prev = cur;
    }

    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto breaks = model.density().v_breaks();
    double total = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double xi = bank.xi[j];
        if (xi == 0.0) continue;
        const double r = model.radius(j);
        const double a = std::min(0.0, xi);
        const double b = std::max(0.0, xi);
        std::vector<double> cuts{a};
        for (double e : breaks) {
            if (e > a && e < b) cuts.push_back(e);
        }
        cuts.push_back(b);
        double piece = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            auto integrand = [&](double v) { return h(v) * model.density().value(r, v); };
            piece += Quad::integrate(integrand, cuts[k], cuts[k + 1], 10, 1e-14);
        }
        total += model.weight(j) * (xi >= 0.0 ? piece : -piece);
    }
    return total;
}

double g_eval(double p, const PlayBank& bank, const PreisachModel& model,
              const std::function<double(double)>& f)
{
    return f(p) + preisach_eval(bank, model);
}

}  // namespace porofreeze::hysteresis
