#include "porofreeze/hysteresis/play.hpp"

#include <algorithm>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::hysteresis {

namespace {
void require_radius(double r)
{
    if (!(r >= 0.0)) {
        throw InvalidParameter("play radius must be nonnegative, got " + std::to_string(r));
    }
}
}  // namespace

double play_init(double p0, double r)
{
    require_radius(r);
    return std::max(p0 - r, std::min(0.0, p0 + r));
}

double play_step(double xi_prev, double p_new, double r)
{
    require_radius(r);
    return std::min(p_new + r, std::max(p_new - r, xi_prev));
}

}  // namespace porofreeze::hysteresis
