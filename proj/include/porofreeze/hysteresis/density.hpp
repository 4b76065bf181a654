#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace porofreeze::hysteresis {

/// Quadrature nodes for the memory parameter r (midpoint rule on a uniform grid).
struct RGrid {
    std::vector<double> levels;
    std::vector<double> weights;

    static RGrid midpoint(double r_lo, double r_hi, std::size_t count);

    std::size_t size() const { return levels.size(); }
};

/// Piecewise-constant density on a uniform (r, v) cell grid; rows are r cells.
struct DensityTable {
    double r_min = 0.0;
    double r_max = 1.0;
    double v_min = -1.0;
    double v_max = 1.0;
    std::size_t nr = 1;
    std::size_t nv = 1;
    std::vector<double> values;  ///< row-major, nr * nv entries
};

/// psi(r, v) = amplitude * exp(-r / r_scale) * exp(-|v| / v_scale) for r in [0, r_max].
struct SeparableExponential {
    double amplitude = 0.2;
    double r_scale = 0.5;
    double v_scale = 0.5;
    double r_max = 4.0;
};

/// Preisach density psi(r, v) >= 0 with closed-form partial integrals
///   cum0(r, v) = int_0^v psi(r, s) ds,   cum1(r, v) = int_0^v s psi(r, s) ds.
///
/// Two representations are supported: a piecewise-constant table (exact
/// cumulatives per cell) and a separable exponential.
class PreisachDensity {
public:
    enum class Kind { Table, Exponential };

    static PreisachDensity from_table(DensityTable table);
    static PreisachDensity uniform(double value, double r_max, double v_min, double v_max);
    static PreisachDensity exponential(SeparableExponential params);
    /// psi == 0; the Preisach part of G vanishes.
    static PreisachDensity zero();

    Kind kind() const { return kind_; }
    const DensityTable& table() const { return table_; }
    const SeparableExponential& exponential_params() const { return exp_; }

    double value(double r, double v) const;
    /// psi*(r) = sup_v psi(r, v).
    double envelope(double r) const;
    double cum0(double r, double v) const;
    double cum1(double r, double v) const;

    /// Lower and upper end of the r-support.
    double r_lo() const;
    double r_hi() const;
    /// v-interval outside of which psi vanishes (infinite for the exponential).
    double v_lo() const;
    double v_hi() const;

    /// int_0^inf int_0^inf psi, resp. int_0^inf int_{-inf}^0 psi.
    double c_plus() const;
    double c_minus() const;
    /// int (1 + r^2) psi*(r) dr.
    double c_star() const;

    PreisachDensity scaled(double factor) const;

    /// Breakpoints in v where psi(r, .) may jump; used by quadrature routines.
    std::vector<double> v_breaks() const;

private:
    std::size_t row_of(double r) const;
    void build_cumulatives();

    Kind kind_ = Kind::Table;
    DensityTable table_;
    SeparableExponential exp_;
    // Per table row: cumulative integrals at the v cell edges, measured from v = 0.
    std::vector<double> edge_cum0_;
    std::vector<double> edge_cum1_;
};

/// Structured text format:
///
///     # comment lines start with '#'
///     r_range <r_min> <r_max>
///     v_range <v_min> <v_max>
///     shape <nr> <nv>
///     <nr * nv values, row-major, rows indexed by r>
PreisachDensity read_density_table(std::istream& in);
PreisachDensity read_density_table_file(const std::string& path);
void write_density_table(std::ostream& out, const DensityTable& table);

}  // namespace porofreeze::hysteresis
