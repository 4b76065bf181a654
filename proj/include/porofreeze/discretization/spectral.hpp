#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace porofreeze::discretization {

/// Cosine eigenfunctions of the Neumann Laplacian on [x0, x1] sampled on uniform nodes.
///
/// e_0 = 1/sqrt(L), e_i = sqrt(2/L) cos(i pi (x - x0) / L), lambda_i = (i pi / L)^2.
/// The discrete product uses trapezoid weights (the lumped P1 mass), under which the
/// sampled modes i < number of nodes - 1 are exactly orthonormal.
class SpectralBasis1D {
public:
    SpectralBasis1D(double x0, double x1, std::size_t nodes, std::size_t modes);

    std::size_t modes() const { return lambda_.size(); }
    std::size_t nodes() const { return weights_.size(); }
    double lambda(std::size_t i) const { return lambda_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    /// Column i holds e_i at the nodes.
    const Eigen::MatrixXd& values() const { return values_; }

    /// Nodal field from coefficients and coefficients from a nodal field (discrete L2 projection).
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    Eigen::VectorXd analyze(std::span<const double> field) const;

private:
    std::vector<double> lambda_;
    std::vector<double> weights_;
    Eigen::MatrixXd values_;
};

}  // namespace porofreeze::discretization
