#include "porofreeze/solver/problem.hpp"

#include <cmath>
#include <string>

#include "porofreeze/errors.hpp"
#include "porofreeze/solver/state.hpp"

namespace porofreeze::solver {

void SolverConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive, got " + std::to_string(dt));
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be positive");
    if (!(cutoff_r > 1.0)) throw InvalidParameter("cut-off level R must exceed 1, got " + std::to_string(cutoff_r));
    if (!(eta >= 0.0 && eta < 1.0)) throw InvalidParameter("eta must lie in [0, 1)");
    if (eta > 0.0 && mode != Mode::Spectral) throw InvalidParameter("eta > 0 requires the spectral mode");
    if (!(tol > 0.0) || max_iter < 1) throw InvalidParameter("nonlinear tolerance and iteration limit must be positive");
    if (max_halvings < 0) throw InvalidParameter("max_halvings must be nonnegative");
    if (preisach_levels < 1) throw InvalidParameter("at least one Preisach level is required");
    if (max_sweeps < 1) throw InvalidParameter("max_sweeps must be at least 1");
    if (!(floor_tolerance >= 0.0)) throw InvalidParameter("floor tolerance must be nonnegative");
}

std::size_t SolverConfig::num_steps() const
{
    return static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9)));
}

void LedgerEntry::close()
{
    defect = (energy_after - energy_before) + cut_waste + boundary_pressure + boundary_heat - gravity_work -
             external_heat;
}

}  // namespace porofreeze::solver
