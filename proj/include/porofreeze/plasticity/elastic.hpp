#pragma once

#include "porofreeze/plasticity/sym_tensor.hpp"

namespace porofreeze::plasticity {

/// Isotropic fourth-order tensor T x = d*bulk*(tr x / d) I + 2*shear*dev x, where d is
/// the dimension of x. Volumetric eigenvalue d*bulk, deviatoric eigenvalue 2*shear.
struct IsoTensor {
    double bulk = 1.0;
    double shear = 0.5;

    /// c times the identity on tensors of dimension dim.
    static IsoTensor multiple_of_identity(double c, int dim);

    double vol_eigen(int dim) const { return dim * bulk; }
    double dev_eigen() const { return 2.0 * shear; }
    /// Smallest and largest eigenvalue on tensors of dimension dim (1D has no deviatoric part).
    double min_eigen(int dim) const;
    double max_eigen(int dim) const;

    SymTensor apply(const SymTensor& x) const;
    SymTensor apply_inverse(const SymTensor& x) const;
    double energy(const SymTensor& x) const { return dot(apply(x), x); }
};

/// Hardening tensor Ah, elasticity tensor Ae and viscosity tensor B.
struct ElasticTensors {
    IsoTensor ah;
    IsoTensor ae;
    IsoTensor b;

    /// min over Ah and Ae of the smallest eigenvalue.
    double a_flat(int dim) const;
    double b_flat(int dim) const;
    /// Throws InvalidParameter unless all three tensors are positive definite.
    void validate(int dim) const;
};

}  // namespace porofreeze::plasticity
