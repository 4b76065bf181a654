#include "porofreeze/solver/monitor.hpp"

#include <algorithm>
#include <cmath>

namespace porofreeze::solver {

CutoffReport cutoff_monitor(const discretization::Mesh& mesh, const discretization::Geometry& geo,
                            const SimState& state, double r)
{
    CutoffReport rep;
    rep.r = r;
    for (std::size_t i = 0; i < state.p.size(); ++i) {
        rep.max_abs_p = std::max(rep.max_abs_p, std::abs(state.p[i]));
        rep.max_theta = std::max(rep.max_theta, state.theta[i]);
        if (std::abs(state.p[i]) > r) rep.p_nodes.push_back(i);
        if (state.theta[i] > r) rep.theta_nodes.push_back(i);
    }
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto g = geo.gradient(mesh, e, state.p);
        const double g2 = g[0] * g[0] + g[1] * g[1];
        rep.max_grad_p_sq = std::max(rep.max_grad_p_sq, g2);
        if (g2 > r) rep.grad_elements.push_back(e);
    }
    return rep;
}

}  // namespace porofreeze::solver
