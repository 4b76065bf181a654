#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "porofreeze/discretization/mesh.hpp"
#include "porofreeze/plasticity/elastic.hpp"
#include "porofreeze/plasticity/sym_tensor.hpp"

namespace porofreeze::discretization {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Per-element measures and constant P1 basis gradients, plus lumped nodal volumes.
struct Geometry {
    int dim = 1;
    std::vector<double> measure;
    /// grad[e][a] = gradient of the a-th local basis function (y-entry 0 in 1D)
    std::vector<std::array<std::array<double, 2>, 3>> grad;
    /// Row sums of the consistent mass matrix.
    std::vector<double> lumped;

    explicit Geometry(const Mesh& mesh);

    double total_measure() const;
    /// Gradient of a nodal field on element e.
    std::array<double, 2> gradient(const Mesh& mesh, std::size_t e, std::span<const double> field) const;
};

/// Scalar forms of the diffusion-type equations.
struct ScalarForms {
    SparseMatrix mass;
    SparseMatrix stiffness;
    /// Lumped boundary measure weighted by the facet coefficient, per node.
    std::vector<double> robin;
};

SparseMatrix assemble_mass(const Mesh& mesh, const Geometry& geo);
/// sum_e coeff_e |e| grad phi_a . grad phi_b, one coefficient per element.
SparseMatrix assemble_stiffness(const Mesh& mesh, const Geometry& geo, std::span<const double> element_coeff);
/// Nodal weights of int_{boundary} c phi ds with c constant on each facet (point values in 1D).
std::vector<double> lumped_boundary(const Mesh& mesh, std::span<const double> facet_coeff);
/// facet coefficient given by marker -> value.
std::vector<double> facet_values(const Mesh& mesh, const std::function<double(int marker)>& by_marker);

/// Throws InvalidParameter on a nonpositive coefficient.
ScalarForms assemble_scalar(const Mesh& mesh, const Geometry& geo, std::span<const double> element_coeff,
                            std::span<const double> facet_boundary_coeff);

/// Lumped Robin load: weight_i * coeff_data_i (e.g. alpha p* at the nodes).
Vector robin_load(std::span<const double> robin_weights, std::span<const double> nodal_data);

/// Vector P1 displacement with dofs (node * dim + component); all boundary nodes are
/// clamped to zero.
class Elasticity {
public:
    Elasticity(const Mesh& mesh, const Geometry& geo);

    int dim() const { return dim_; }
    std::size_t num_dofs() const { return static_cast<std::size_t>(dim_) * num_nodes_; }
    std::size_t num_free() const { return free_.size(); }
    const std::vector<int>& free_dofs() const { return free_; }

    /// Full stiffness of int T eps(u) : eps(v) over all dofs.
    SparseMatrix assemble(const plasticity::IsoTensor& t) const;
    /// Restriction of a full matrix to the free dofs.
    SparseMatrix restrict(const SparseMatrix& full) const;
    Vector restrict(const Vector& full) const;
    Vector extend(const Vector& reduced) const;

    plasticity::SymTensor strain(std::size_t e, std::span<const double> u) const;
    double divergence(std::size_t e, std::span<const double> u) const { return strain(e, u).trace(); }
    /// Lumped L2 projection of the element divergence onto the nodes.
    std::vector<double> nodal_divergence(std::span<const double> u) const;
    /// sum_e |e| sigma_e : eps(phi) for every dof.
    Vector internal_force(std::span<const plasticity::SymTensor> element_stress) const;
    /// int w div(phi) with w piecewise linear given at the nodes (exact).
    Vector coupling_force(std::span<const double> nodal_w) const;
    /// Lumped body force: volume_i * g.
    Vector body_force(const std::array<double, 2>& g) const;

private:
    const Mesh* mesh_;
    const Geometry* geo_;
    int dim_;
    std::size_t num_nodes_;
    std::vector<int> free_;
    std::vector<int> reduced_index_;
};

/// Factorizes an SPD matrix, throwing InvalidSetup when it is singular (rigid motions
/// not removed by the constraints).
class SpdSolver {
public:
    explicit SpdSolver(const SparseMatrix& a);
    Vector solve(const Vector& b) const;

private:
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

}  // namespace porofreeze::discretization
