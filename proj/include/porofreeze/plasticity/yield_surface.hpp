#pragma once

#include <optional>

#include "porofreeze/plasticity/elastic.hpp"
#include "porofreeze/plasticity/sym_tensor.hpp"

namespace porofreeze::plasticity {

/// Convex admissible set Z for the plastic stress.
///
/// Ball: {|z| <= sigma_y}. Cylinder: {|dev z| <= sigma_y, |tr z| <= trace_bound}
/// where an absent trace_bound leaves the trace unconstrained.
struct YieldSurface {
    enum class Kind { Ball, Cylinder };

    Kind kind = Kind::Ball;
    double sigma_y = 1.0;
    std::optional<double> trace_bound;

    static YieldSurface ball(double sigma_y) { return {Kind::Ball, sigma_y, std::nullopt}; }
    static YieldSurface cylinder(double sigma_y, std::optional<double> trace_bound = std::nullopt)
    {
        return {Kind::Cylinder, sigma_y, trace_bound};
    }

    void validate() const;
    bool contains(const SymTensor& z, double tol = 1e-12) const;

    /// Support function h_Z(x) = sup_{z in Z} z:x. Throws FlaggedInconsistency when
    /// it is infinite (trace flow on a cylinder without trace bound).
    double support(const SymTensor& x, double trace_tol = 1e-12) const;

    /// Nearest point of Z in the Frobenius norm.
    SymTensor project(const SymTensor& tau) const;
    /// Nearest point of Z in the norm induced by metric^{-1}, i.e. the minimizer of
    /// (x - tau) : metric^{-1} (x - tau) over Z.
    SymTensor project(const SymTensor& tau, const IsoTensor& metric) const;
};

}  // namespace porofreeze::plasticity
