#include "porofreeze/plasticity/sym_tensor.hpp"

#include <cmath>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::plasticity {

SymTensor::SymTensor(int dim) : dim_(dim)
{
    if (dim < 1 || dim > 3) throw InvalidParameter("tensor dimension must be 1, 2 or 3, got " + std::to_string(dim));
}

SymTensor SymTensor::identity(int dim)
{
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) t.c_[static_cast<std::size_t>(i)] = 1.0;
    return t;
}

SymTensor SymTensor::scalar(double xx)
{
    SymTensor t(1);
    t.c_[XX] = xx;
    return t;
}

SymTensor SymTensor::plane(double xx, double yy, double xy)
{
    SymTensor t(2);
    t.c_[XX] = xx;
    t.c_[YY] = yy;
    t.c_[XY] = xy;
    return t;
}

SymTensor SymTensor::full(double xx, double yy, double zz, double yz, double xz, double xy)
{
    SymTensor t(3);
    t.c_ = {xx, yy, zz, yz, xz, xy};
    return t;
}

SymTensor SymTensor::sym_grad(int dim, std::span<const double> grad)
{
    const auto d = static_cast<std::size_t>(dim);
    if (grad.size() != d * d) throw InvalidState("gradient size does not match dimension");
    SymTensor t(dim);
    auto g = [&](std::size_t i, std::size_t j) { return grad[i * d + j]; };
    t.c_[XX] = g(0, 0);
    if (dim >= 2) {
        t.c_[YY] = g(1, 1);
        t.c_[XY] = 0.5 * (g(0, 1) + g(1, 0));
    }
    if (dim == 3) {
        t.c_[ZZ] = g(2, 2);
        t.c_[YZ] = 0.5 * (g(1, 2) + g(2, 1));
        t.c_[XZ] = 0.5 * (g(0, 2) + g(2, 0));
    }
    return t;
}

double SymTensor::entry(int i, int j) const
{
    if (i == j) return c_[static_cast<std::size_t>(i)];
    const int k = i + j;  // (0,1) -> 1, (0,2) -> 2, (1,2) -> 3
    return k == 1 ? c_[XY] : (k == 2 ? c_[XZ] : c_[YZ]);
}

double SymTensor::trace() const { return c_[XX] + c_[YY] + c_[ZZ]; }

SymTensor SymTensor::vol() const
{
    return SymTensor::identity(dim_) * (trace() / dim_);
}

SymTensor SymTensor::dev() const
{
    SymTensor t = *this;
    const double m = trace() / dim_;
    for (int i = 0; i < dim_; ++i) t.c_[static_cast<std::size_t>(i)] -= m;
    return t;
}

double SymTensor::dot(const SymTensor& o) const
{
    require_same_dim(o);
    return c_[XX] * o.c_[XX] + c_[YY] * o.c_[YY] + c_[ZZ] * o.c_[ZZ] +
           2.0 * (c_[YZ] * o.c_[YZ] + c_[XZ] * o.c_[XZ] + c_[XY] * o.c_[XY]);
}

double SymTensor::norm() const { return std::sqrt(dot(*this)); }

SymTensor& SymTensor::operator+=(const SymTensor& o)
{
    require_same_dim(o);
    for (std::size_t i = 0; i < 6; ++i) c_[i] += o.c_[i];
    return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o)
{
    require_same_dim(o);
    for (std::size_t i = 0; i < 6; ++i) c_[i] -= o.c_[i];
    return *this;
}

SymTensor& SymTensor::operator*=(double s)
{
    for (auto& v : c_) v *= s;
    return *this;
}

void SymTensor::require_same_dim(const SymTensor& o) const
{
    if (o.dim_ != dim_) {
        throw InvalidState("tensor dimensions differ: " + std::to_string(dim_) + " vs " + std::to_string(o.dim_));
    }
}

double dot(const SymTensor& a, const SymTensor& b) { return a.dot(b); }
double norm(const SymTensor& a) { return a.norm(); }

}  // namespace porofreeze::plasticity
