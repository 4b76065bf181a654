#pragma once

#include <cstddef>
#include <vector>

#include "porofreeze/discretization/fem.hpp"
#include "porofreeze/solver/state.hpp"

namespace porofreeze::solver {

/// Where the cut-off at level R changes the equations for the given state.
struct CutoffReport {
    double r = 0.0;
    double max_abs_p = 0.0;
    double max_theta = 0.0;
    double max_grad_p_sq = 0.0;
    std::vector<std::size_t> p_nodes;        ///< |p| > R: f_R, mu_R, Phi_R and gamma_R differ
    std::vector<std::size_t> theta_nodes;    ///< theta > R: Q_R(theta^+) differs
    std::vector<std::size_t> grad_elements;  ///< |grad p|^2 > R: heat source is cut

    bool active() const { return !p_nodes.empty() || !theta_nodes.empty() || !grad_elements.empty(); }
};

CutoffReport cutoff_monitor(const discretization::Mesh& mesh, const discretization::Geometry& geo,
                            const SimState& state, double r);

}  // namespace porofreeze::solver
