#include "porofreeze/discretization/spectral.hpp"

#include <cmath>
#include <numbers>

#include "porofreeze/errors.hpp"

namespace porofreeze::discretization {

SpectralBasis1D::SpectralBasis1D(double x0, double x1, std::size_t nodes, std::size_t modes)
{
    if (!(x1 > x0)) throw InvalidParameter("spectral interval is empty");
    if (nodes < 2 || modes < 1 || modes + 1 > nodes) {
        throw InvalidParameter("spectral basis needs 1 <= modes < number of nodes");
    }
    const double len = x1 - x0;
    const double h = len / static_cast<double>(nodes - 1);
    weights_.assign(nodes, h);
    weights_.front() = weights_.back() = 0.5 * h;
    values_.resize(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(modes));
    lambda_.resize(modes);
    for (std::size_t i = 0; i < modes; ++i) {
        const double k = static_cast<double>(i) * std::numbers::pi / len;
        lambda_[i] = k * k;
        const double scale = i == 0 ? std::sqrt(1.0 / len) : std::sqrt(2.0 / len);
        for (std::size_t n = 0; n < nodes; ++n) {
            values_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) =
                scale * std::cos(k * h * static_cast<double>(n));
        }
    }
}

Eigen::VectorXd SpectralBasis1D::synthesize(const Eigen::VectorXd& coeffs) const { return values_ * coeffs; }

Eigen::VectorXd SpectralBasis1D::analyze(std::span<const double> field) const
{
    if (field.size() != nodes()) throw InvalidState("field size does not match the spectral grid");
    Eigen::VectorXd weighted(static_cast<Eigen::Index>(nodes()));
    for (std::size_t n = 0; n < nodes(); ++n) weighted[static_cast<Eigen::Index>(n)] = weights_[n] * field[n];
    return values_.transpose() * weighted;
}

}  // namespace porofreeze::discretization
