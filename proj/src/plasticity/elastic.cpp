#include "porofreeze/plasticity/elastic.hpp"

#include <algorithm>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::plasticity {

IsoTensor IsoTensor::multiple_of_identity(double c, int dim) { return {c / dim, 0.5 * c}; }

double IsoTensor::min_eigen(int dim) const
{
    return dim == 1 ? vol_eigen(dim) : std::min(vol_eigen(dim), dev_eigen());
}

double IsoTensor::max_eigen(int dim) const
{
    return dim == 1 ? vol_eigen(dim) : std::max(vol_eigen(dim), dev_eigen());
}

SymTensor IsoTensor::apply(const SymTensor& x) const
{
    return vol_eigen(x.dim()) * x.vol() + dev_eigen() * x.dev();
}

SymTensor IsoTensor::apply_inverse(const SymTensor& x) const
{
    SymTensor out = x.vol() * (1.0 / vol_eigen(x.dim()));
    if (x.dim() > 1) out += x.dev() * (1.0 / dev_eigen());
    return out;
}

double ElasticTensors::a_flat(int dim) const { return std::min(ah.min_eigen(dim), ae.min_eigen(dim)); }

double ElasticTensors::b_flat(int dim) const { return b.min_eigen(dim); }

void ElasticTensors::validate(int dim) const
{
    auto check = [dim](const IsoTensor& t, const char* name) {
        if (!(t.min_eigen(dim) > 0.0)) {
            throw InvalidParameter(std::string(name) + " must be positive definite (bulk " +
                                   std::to_string(t.bulk) + ", shear " + std::to_string(t.shear) + ")");
        }
    };
    check(ah, "hardening tensor");
    check(ae, "elasticity tensor");
    check(b, "viscosity tensor");
}

}  // namespace porofreeze::plasticity
