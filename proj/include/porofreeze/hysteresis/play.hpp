#pragma once

namespace porofreeze::hysteresis {

/// Initial memory of the play with radius `r` for the initial input `p0`:
/// max{p0 - r, min{0, p0 + r}}. Throws InvalidParameter for r < 0.
double play_init(double p0, double r);

/// One time-discrete play update: min{p_new + r, max{p_new - r, xi_prev}}.
///
/// For an input that is monotone between the previous and the new value this is
/// the exact solution of the play variational inequality at the end of the
/// segment, and (xi_new - xi_prev) * (p_new - xi_new) == r * |xi_new - xi_prev|.
double play_step(double xi_prev, double p_new, double r);

}  // namespace porofreeze::hysteresis
