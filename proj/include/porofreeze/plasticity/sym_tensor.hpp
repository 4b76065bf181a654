#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace porofreeze::plasticity {

/// Symmetric tensor in Voigt order (xx, yy, zz, yz, xz, xy).
///
/// The spatial dimension selects the active components: 1 -> xx; 2 -> xx, yy, xy;
/// 3 -> all six. Inactive components stay zero. The inner product weights the
/// off-diagonal entries twice so that dot() is the Frobenius product.
class SymTensor {
public:
    static constexpr std::size_t XX = 0, YY = 1, ZZ = 2, YZ = 3, XZ = 4, XY = 5;

    SymTensor() = default;
    explicit SymTensor(int dim);

    static SymTensor zero(int dim) { return SymTensor(dim); }
    static SymTensor identity(int dim);
    static SymTensor scalar(double xx);
    static SymTensor plane(double xx, double yy, double xy);
    static SymTensor full(double xx, double yy, double zz, double yz, double xz, double xy);
    /// Symmetric part of a dim x dim gradient given row-major.
    static SymTensor sym_grad(int dim, std::span<const double> grad);

    int dim() const { return dim_; }
    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }
    double entry(int i, int j) const;

    double trace() const;
    SymTensor dev() const;
    SymTensor vol() const;
    double dot(const SymTensor& other) const;
    double norm() const;

    SymTensor& operator+=(const SymTensor& o);
    SymTensor& operator-=(const SymTensor& o);
    SymTensor& operator*=(double s);

    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend SymTensor operator-(SymTensor a) { return a *= -1.0; }
    friend bool operator==(const SymTensor&, const SymTensor&) = default;

private:
    void require_same_dim(const SymTensor& o) const;

    int dim_ = 3;
    std::array<double, 6> c_{};
};

double dot(const SymTensor& a, const SymTensor& b);
double norm(const SymTensor& a);

}  // namespace porofreeze::plasticity
