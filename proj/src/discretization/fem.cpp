#include "porofreeze/discretization/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::discretization {

using plasticity::SymTensor;

namespace {
std::size_t node_of(const Mesh& m, std::size_t e, int a)
{
    return static_cast<std::size_t>(m.elements[e][static_cast<std::size_t>(a)]);
}
}  // namespace

Geometry::Geometry(const Mesh& mesh) : dim(mesh.dim)
{
    mesh.validate();
    const std::size_t ne = mesh.num_elements();
    measure.resize(ne);
    grad.resize(ne);
    lumped.assign(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        const double m = mesh.measure(e);
        measure[e] = m;
        auto& g = grad[e];
        if (dim == 1) {
            g[0] = {-1.0 / m, 0.0};
            g[1] = {1.0 / m, 0.0};
            g[2] = {0.0, 0.0};
        } else {
            const auto& p1 = mesh.nodes[node_of(mesh, e, 0)];
            const auto& p2 = mesh.nodes[node_of(mesh, e, 1)];
            const auto& p3 = mesh.nodes[node_of(mesh, e, 2)];
            const double s = 1.0 / (2.0 * m);
            g[0] = {(p2[1] - p3[1]) * s, (p3[0] - p2[0]) * s};
            g[1] = {(p3[1] - p1[1]) * s, (p1[0] - p3[0]) * s};
            g[2] = {(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s};
        }
        for (int a = 0; a <= dim; ++a) lumped[node_of(mesh, e, a)] += m / (dim + 1);
    }
}

double Geometry::total_measure() const
{
    double s = 0.0;
    for (double m : measure) s += m;
    return s;
}

std::array<double, 2> Geometry::gradient(const Mesh& mesh, std::size_t e, std::span<const double> field) const
{
    std::array<double, 2> g{0.0, 0.0};
    for (int a = 0; a <= dim; ++a) {
        const double v = field[node_of(mesh, e, a)];
        g[0] += v * grad[e][static_cast<std::size_t>(a)][0];
        g[1] += v * grad[e][static_cast<std::size_t>(a)][1];
    }
    return g;
}

SparseMatrix assemble_mass(const Mesh& mesh, const Geometry& geo)
{
    std::vector<Eigen::Triplet<double>> trips;
    const int d = mesh.dim;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double diag = geo.measure[e] * 2.0 / ((d + 1) * (d + 2));
        const double off = geo.measure[e] / ((d + 1) * (d + 2));
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; b <= d; ++b) {
                trips.emplace_back(static_cast<int>(node_of(mesh, e, a)), static_cast<int>(node_of(mesh, e, b)),
                                   a == b ? diag : off);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const Geometry& geo, std::span<const double> element_coeff)
{
    if (element_coeff.size() != mesh.num_elements()) throw InvalidState("one coefficient per element expected");
    std::vector<Eigen::Triplet<double>> trips;
    const int d = mesh.dim;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double c = element_coeff[e] * geo.measure[e];
        const auto& g = geo.grad[e];
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; b <= d; ++b) {
                const auto& ga = g[static_cast<std::size_t>(a)];
                const auto& gb = g[static_cast<std::size_t>(b)];
                trips.emplace_back(static_cast<int>(node_of(mesh, e, a)), static_cast<int>(node_of(mesh, e, b)),
                                   c * (ga[0] * gb[0] + ga[1] * gb[1]));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    SparseMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

std::vector<double> lumped_boundary(const Mesh& mesh, std::span<const double> facet_coeff)
{
    if (facet_coeff.size() != mesh.boundary.size()) throw InvalidState("one coefficient per boundary facet expected");
    std::vector<double> w(mesh.num_nodes(), 0.0);
    for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
        const auto& facet = mesh.boundary[f];
        if (mesh.dim == 1) {
            w[static_cast<std::size_t>(facet.nodes[0])] += facet_coeff[f];
        } else {
            const double half = 0.5 * mesh.facet_measure(f) * facet_coeff[f];
            w[static_cast<std::size_t>(facet.nodes[0])] += half;
            w[static_cast<std::size_t>(facet.nodes[1])] += half;
        }
    }
    return w;
}

std::vector<double> facet_values(const Mesh& mesh, const std::function<double(int)>& by_marker)
{
    std::vector<double> v(mesh.boundary.size());
    for (std::size_t f = 0; f < v.size(); ++f) v[f] = by_marker(mesh.boundary[f].marker);
    return v;
}

ScalarForms assemble_scalar(const Mesh& mesh, const Geometry& geo, std::span<const double> element_coeff,
                            std::span<const double> facet_boundary_coeff)
{
    for (std::size_t e = 0; e < element_coeff.size(); ++e) {
        if (!(element_coeff[e] > 0.0)) {
            throw InvalidParameter("diffusion coefficient must be positive; element " + std::to_string(e) +
                                   " has " + std::to_string(element_coeff[e]));
        }
    }
    for (double c : facet_boundary_coeff) {
        if (!(c >= 0.0)) throw InvalidParameter("boundary coefficient must be nonnegative");
    }
    return {assemble_mass(mesh, geo), assemble_stiffness(mesh, geo, element_coeff),
            lumped_boundary(mesh, facet_boundary_coeff)};
}

Vector robin_load(std::span<const double> robin_weights, std::span<const double> nodal_data)
{
    if (robin_weights.size() != nodal_data.size()) throw InvalidState("Robin weights and data differ in size");
    Vector b(static_cast<Eigen::Index>(nodal_data.size()));
    for (std::size_t i = 0; i < nodal_data.size(); ++i) b[static_cast<Eigen::Index>(i)] = robin_weights[i] * nodal_data[i];
    return b;
}

Elasticity::Elasticity(const Mesh& mesh, const Geometry& geo)
    : mesh_(&mesh), geo_(&geo), dim_(mesh.dim), num_nodes_(mesh.num_nodes())
{
    const auto on_boundary = mesh.boundary_nodes();
    reduced_index_.assign(num_dofs(), -1);
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        if (on_boundary[i]) continue;
        for (int c = 0; c < dim_; ++c) {
            const auto dof = static_cast<int>(i) * dim_ + c;
            reduced_index_[static_cast<std::size_t>(dof)] = static_cast<int>(free_.size());
            free_.push_back(dof);
        }
    }
}

namespace {
// Strain of the vector basis function phi_a e_i.
SymTensor basis_strain(int dim, const std::array<double, 2>& grad_a, int i)
{
    std::array<double, 4> g{};
    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t j = 0; j < d; ++j) g[static_cast<std::size_t>(i) * d + j] = grad_a[j];
    return SymTensor::sym_grad(dim, std::span<const double>(g.data(), d * d));
}
}  // namespace

SparseMatrix Elasticity::assemble(const plasticity::IsoTensor& t) const
{
    std::vector<Eigen::Triplet<double>> trips;
    const int d = dim_;
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
        std::vector<SymTensor> eps, teps;
        std::vector<int> dofs;
        for (int a = 0; a <= d; ++a) {
            for (int i = 0; i < d; ++i) {
                eps.push_back(basis_strain(d, geo_->grad[e][static_cast<std::size_t>(a)], i));
                teps.push_back(t.apply(eps.back()));
                dofs.push_back(static_cast<int>(node_of(*mesh_, e, a)) * d + i);
            }
        }
        for (std::size_t x = 0; x < eps.size(); ++x) {
            for (std::size_t y = 0; y < eps.size(); ++y) {
                trips.emplace_back(dofs[x], dofs[y], geo_->measure[e] * eps[x].dot(teps[y]));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(num_dofs());
    SparseMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

SparseMatrix Elasticity::restrict(const SparseMatrix& full) const
{
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index col = 0; col < full.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int r = reduced_index_[static_cast<std::size_t>(it.row())];
            const int c = reduced_index_[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
        }
    }
    const auto n = static_cast<Eigen::Index>(free_.size());
    SparseMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

Vector Elasticity::restrict(const Vector& full) const
{
    Vector r(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) r[static_cast<Eigen::Index>(k)] = full[free_[k]];
    return r;
}

Vector Elasticity::extend(const Vector& reduced) const
{
    Vector full = Vector::Zero(static_cast<Eigen::Index>(num_dofs()));
    for (std::size_t k = 0; k < free_.size(); ++k) full[free_[k]] = reduced[static_cast<Eigen::Index>(k)];
    return full;
}

SymTensor Elasticity::strain(std::size_t e, std::span<const double> u) const
{
    const auto d = static_cast<std::size_t>(dim_);
    std::array<double, 4> g{};
    for (int a = 0; a <= dim_; ++a) {
        const auto node = node_of(*mesh_, e, a);
        const auto& ga = geo_->grad[e][static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) g[i * d + j] += u[node * d + i] * ga[j];
        }
    }
    return SymTensor::sym_grad(dim_, std::span<const double>(g.data(), d * d));
}

std::vector<double> Elasticity::nodal_divergence(std::span<const double> u) const
{
    std::vector<double> div(num_nodes_, 0.0);
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
        const double share = geo_->measure[e] / (dim_ + 1) * divergence(e, u);
        for (int a = 0; a <= dim_; ++a) div[node_of(*mesh_, e, a)] += share;
    }
    for (std::size_t i = 0; i < num_nodes_; ++i) div[i] /= geo_->lumped[i];
    return div;
}

Vector Elasticity::internal_force(std::span<const SymTensor> element_stress) const
{
    Vector f = Vector::Zero(static_cast<Eigen::Index>(num_dofs()));
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
        const auto& s = element_stress[e];
        for (int a = 0; a <= dim_; ++a) {
            const auto& ga = geo_->grad[e][static_cast<std::size_t>(a)];
            const auto node = static_cast<Eigen::Index>(node_of(*mesh_, e, a));
            for (int i = 0; i < dim_; ++i) {
                double v = 0.0;
                for (int j = 0; j < dim_; ++j) v += s.entry(i, j) * ga[static_cast<std::size_t>(j)];
                f[node * dim_ + i] += geo_->measure[e] * v;
            }
        }
    }
    return f;
}

Vector Elasticity::coupling_force(std::span<const double> nodal_w) const
{
    Vector f = Vector::Zero(static_cast<Eigen::Index>(num_dofs()));
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
        double mean = 0.0;
        for (int a = 0; a <= dim_; ++a) mean += nodal_w[node_of(*mesh_, e, a)];
        mean /= dim_ + 1;
        for (int a = 0; a <= dim_; ++a) {
            const auto& ga = geo_->grad[e][static_cast<std::size_t>(a)];
            const auto node = static_cast<Eigen::Index>(node_of(*mesh_, e, a));
            for (int i = 0; i < dim_; ++i) f[node * dim_ + i] += geo_->measure[e] * mean * ga[static_cast<std::size_t>(i)];
        }
    }
    return f;
}

Vector Elasticity::body_force(const std::array<double, 2>& g) const
{
    Vector f(static_cast<Eigen::Index>(num_dofs()));
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        for (int c = 0; c < dim_; ++c) {
            f[static_cast<Eigen::Index>(i) * dim_ + c] = geo_->lumped[i] * g[static_cast<std::size_t>(c)];
        }
    }
    return f;
}

SpdSolver::SpdSolver(const SparseMatrix& a)
{
    if (a.rows() == 0) return;
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success) throw InvalidSetup("factorization of the elasticity operator failed");
    const auto& d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(d.minCoeff() > 1e-12 * dmax)) {
        throw InvalidSetup("operator is singular: rigid motions are not removed by the Dirichlet constraints");
    }
}

Vector SpdSolver::solve(const Vector& b) const
{
    if (b.size() == 0) return b;
    return ldlt_.solve(b);
}

}  // namespace porofreeze::discretization
