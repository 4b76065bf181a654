#include "porofreeze/hysteresis/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "porofreeze/errors.hpp"

namespace porofreeze::hysteresis {

namespace {
constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

RGrid RGrid::midpoint(double r_lo, double r_hi, std::size_t count)
{
    if (count == 0 || !(r_hi > r_lo) || r_lo < 0.0) {
        throw InvalidParameter("r-grid needs count > 0 and 0 <= r_lo < r_hi");
    }
    RGrid grid;
    const double h = (r_hi - r_lo) / static_cast<double>(count);
    grid.levels.resize(count);
    grid.weights.assign(count, h);
    for (std::size_t j = 0; j < count; ++j) {
        grid.levels[j] = r_lo + (static_cast<double>(j) + 0.5) * h;
    }
    return grid;
}

PreisachDensity PreisachDensity::from_table(DensityTable table)
{
    if (table.nr == 0 || table.nv == 0 || table.values.size() != table.nr * table.nv) {
        throw InvalidParameter("density table shape does not match its value count");
    }
    if (!(table.r_max > table.r_min) || table.r_min < 0.0 || !(table.v_max > table.v_min)) {
        throw InvalidParameter("density table ranges must satisfy 0 <= r_min < r_max, v_min < v_max");
    }
    for (double psi : table.values) {
        if (!(psi >= 0.0) || !std::isfinite(psi)) {
            throw InvalidParameter("density table values must be finite and nonnegative");
        }
    }
    PreisachDensity d;
    d.kind_ = Kind::Table;
    d.table_ = std::move(table);
    d.build_cumulatives();
    return d;
}

PreisachDensity PreisachDensity::uniform(double value, double r_max, double v_min, double v_max)
{
    DensityTable t;
    t.r_min = 0.0;
    t.r_max = r_max;
    t.v_min = v_min;
    t.v_max = v_max;
    t.nr = 1;
    t.nv = 1;
    t.values = {value};
    return from_table(std::move(t));
}

PreisachDensity PreisachDensity::exponential(SeparableExponential params)
{
    if (!(params.amplitude >= 0.0) || !(params.r_scale > 0.0) || !(params.v_scale > 0.0) ||
        !(params.r_max > 0.0)) {
        throw InvalidParameter("exponential density needs amplitude >= 0 and positive scales");
    }
    PreisachDensity d;
    d.kind_ = Kind::Exponential;
    d.exp_ = params;
    return d;
}

PreisachDensity PreisachDensity::zero()
{
    return uniform(0.0, 1.0, -1.0, 1.0);
}

void PreisachDensity::build_cumulatives()
{
    const auto& t = table_;
    const double dv = (t.v_max - t.v_min) / static_cast<double>(t.nv);
    edge_cum0_.assign(t.nr * (t.nv + 1), 0.0);
    edge_cum1_.assign(t.nr * (t.nv + 1), 0.0);
    for (std::size_t i = 0; i < t.nr; ++i) {
        double* c0 = &edge_cum0_[i * (t.nv + 1)];
        double* c1 = &edge_cum1_[i * (t.nv + 1)];
        for (std::size_t k = 0; k < t.nv; ++k) {
            const double a = t.v_min + static_cast<double>(k) * dv;
            const double b = t.v_min + static_cast<double>(k + 1) * dv;
            const double psi = t.values[i * t.nv + k];
            c0[k + 1] = c0[k] + psi * (b - a);
            c1[k + 1] = c1[k] + psi * 0.5 * (b * b - a * a);
        }
    }
}

std::size_t PreisachDensity::row_of(double r) const
{
    const auto& t = table_;
    if (r < t.r_min || r > t.r_max) return kNoRow;
    const double dr = (t.r_max - t.r_min) / static_cast<double>(t.nr);
    auto i = static_cast<std::size_t>((r - t.r_min) / dr);
    return std::min(i, t.nr - 1);
}

double PreisachDensity::value(double r, double v) const
{
    if (kind_ == Kind::Exponential) {
        if (r < 0.0 || r > exp_.r_max) return 0.0;
        return exp_.amplitude * std::exp(-r / exp_.r_scale) * std::exp(-std::abs(v) / exp_.v_scale);
    }
    const auto& t = table_;
    const std::size_t i = row_of(r);
    if (i == kNoRow || v < t.v_min || v > t.v_max) return 0.0;
    const double dv = (t.v_max - t.v_min) / static_cast<double>(t.nv);
    const auto k = std::min(static_cast<std::size_t>((v - t.v_min) / dv), t.nv - 1);
    return t.values[i * t.nv + k];
}

double PreisachDensity::envelope(double r) const
{
    if (kind_ == Kind::Exponential) {
        if (r < 0.0 || r > exp_.r_max) return 0.0;
        return exp_.amplitude * std::exp(-r / exp_.r_scale);
    }
    const std::size_t i = row_of(r);
    if (i == kNoRow) return 0.0;
    const auto first = table_.values.begin() + static_cast<std::ptrdiff_t>(i * table_.nv);
    return *std::max_element(first, first + static_cast<std::ptrdiff_t>(table_.nv));
}

double PreisachDensity::cum0(double r, double v) const
{
    if (kind_ == Kind::Exponential) {
        if (r < 0.0 || r > exp_.r_max) return 0.0;
        const double s = v < 0.0 ? -1.0 : 1.0;
        return exp_.amplitude * std::exp(-r / exp_.r_scale) * s * exp_.v_scale *
               (-std::expm1(-std::abs(v) / exp_.v_scale));
    }
    const auto& t = table_;
    const std::size_t i = row_of(r);
    if (i == kNoRow) return 0.0;
    const double* c0 = &edge_cum0_[i * (t.nv + 1)];
    const double* row = &t.values[i * t.nv];
    const double dv = (t.v_max - t.v_min) / static_cast<double>(t.nv);
    auto prefix = [&](double x) {
        const double xc = std::clamp(x, t.v_min, t.v_max);
        const auto k = std::min(static_cast<std::size_t>((xc - t.v_min) / dv), t.nv - 1);
        const double a = t.v_min + static_cast<double>(k) * dv;
        return c0[k] + row[k] * (xc - a);
    };
    return prefix(v) - prefix(0.0);
}

double PreisachDensity::cum1(double r, double v) const
{
    if (kind_ == Kind::Exponential) {
        if (r < 0.0 || r > exp_.r_max) return 0.0;
        const double b = exp_.v_scale;
        const double x = std::abs(v);
        // int_0^x s e^{-s/b} ds = b^2 - b (x + b) e^{-x/b}
        const double inner = b * b * (-std::expm1(-x / b)) - b * x * std::exp(-x / b);
        return exp_.amplitude * std::exp(-r / exp_.r_scale) * inner;
    }
    const auto& t = table_;
    const std::size_t i = row_of(r);
    if (i == kNoRow) return 0.0;
    const double* c1 = &edge_cum1_[i * (t.nv + 1)];
    const double* row = &t.values[i * t.nv];
    const double dv = (t.v_max - t.v_min) / static_cast<double>(t.nv);
    auto prefix = [&](double x) {
        const double xc = std::clamp(x, t.v_min, t.v_max);
        const auto k = std::min(static_cast<std::size_t>((xc - t.v_min) / dv), t.nv - 1);
        const double a = t.v_min + static_cast<double>(k) * dv;
        return c1[k] + row[k] * 0.5 * (xc * xc - a * a);
    };
    return prefix(v) - prefix(0.0);
}

double PreisachDensity::r_lo() const
{
    return kind_ == Kind::Exponential ? 0.0 : table_.r_min;
}

double PreisachDensity::r_hi() const
{
    return kind_ == Kind::Exponential ? exp_.r_max : table_.r_max;
}

double PreisachDensity::v_lo() const
{
    return kind_ == Kind::Exponential ? -kInf : table_.v_min;
}

double PreisachDensity::v_hi() const
{
    return kind_ == Kind::Exponential ? kInf : table_.v_max;
}

double PreisachDensity::c_plus() const
{
    if (kind_ == Kind::Exponential) {
        return exp_.amplitude * exp_.r_scale * (-std::expm1(-exp_.r_max / exp_.r_scale)) * exp_.v_scale;
    }
    const auto& t = table_;
    const double dr = (t.r_max - t.r_min) / static_cast<double>(t.nr);
    double total = 0.0;
    for (std::size_t i = 0; i < t.nr; ++i) {
        const double r = t.r_min + (static_cast<double>(i) + 0.5) * dr;
        total += dr * cum0(r, t.v_max);
    }
    return total;
}

double PreisachDensity::c_minus() const
{
    if (kind_ == Kind::Exponential) return c_plus();
    const auto& t = table_;
    const double dr = (t.r_max - t.r_min) / static_cast<double>(t.nr);
    double total = 0.0;
    for (std::size_t i = 0; i < t.nr; ++i) {
        const double r = t.r_min + (static_cast<double>(i) + 0.5) * dr;
        total -= dr * cum0(r, t.v_min);
    }
    return total;
}

double PreisachDensity::c_star() const
{
    if (kind_ == Kind::Exponential) {
        const double a = exp_.r_scale;
        const double R = exp_.r_max;
        const double e = std::exp(-R / a);
        const double m0 = a * (1.0 - e);
        const double m2 = 2.0 * a * a * a - e * (a * R * R + 2.0 * a * a * R + 2.0 * a * a * a);
        return exp_.amplitude * (m0 + m2);
    }
    const auto& t = table_;
    const double dr = (t.r_max - t.r_min) / static_cast<double>(t.nr);
    double total = 0.0;
    for (std::size_t i = 0; i < t.nr; ++i) {
        const double a = t.r_min + static_cast<double>(i) * dr;
        const double b = a + dr;
        const double r = 0.5 * (a + b);
        total += envelope(r) * ((b - a) + (b * b * b - a * a * a) / 3.0);
    }
    return total;
}

PreisachDensity PreisachDensity::scaled(double factor) const
{
    if (!(factor >= 0.0)) throw InvalidParameter("density scale factor must be nonnegative");
    if (kind_ == Kind::Exponential) {
        auto p = exp_;
        p.amplitude *= factor;
        return exponential(p);
    }
    auto t = table_;
    for (double& psi : t.values) psi *= factor;
    return from_table(std::move(t));
}

std::vector<double> PreisachDensity::v_breaks() const
{
    if (kind_ == Kind::Exponential) return {0.0};
    const auto& t = table_;
    std::vector<double> edges(t.nv + 1);
    const double dv = (t.v_max - t.v_min) / static_cast<double>(t.nv);
    for (std::size_t k = 0; k <= t.nv; ++k) edges[k] = t.v_min + static_cast<double>(k) * dv;
    return edges;
}

PreisachDensity read_density_table(std::istream& in)
{
    DensityTable t;
    bool have_r = false, have_v = false, have_shape = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&](const std::string& what) {
            throw InvalidParameter("density table line " + std::to_string(line_no) + ": " + what);
        };
        if (key == "r_range") {
            if (!(ls >> t.r_min >> t.r_max)) fail("expected two numbers after r_range");
            have_r = true;
        } else if (key == "v_range") {
            if (!(ls >> t.v_min >> t.v_max)) fail("expected two numbers after v_range");
            have_v = true;
        } else if (key == "shape") {
            if (!(ls >> t.nr >> t.nv)) fail("expected two counts after shape");
            have_shape = true;
        } else {
            if (!have_shape) fail("values before shape header");
            std::istringstream vs(line);
            double x;
            std::string tok;
            while (vs >> tok) {
                try {
                    std::size_t used = 0;
                    x = std::stod(tok, &used);
                    if (used != tok.size()) fail("malformed number '" + tok + "'");
                } catch (const std::logic_error&) {
                    fail("malformed number '" + tok + "'");
                }
                t.values.push_back(x);
            }
        }
    }
    if (!have_r || !have_v || !have_shape) {
        throw InvalidParameter("density table needs r_range, v_range and shape headers");
    }
    return PreisachDensity::from_table(std::move(t));
}

PreisachDensity read_density_table_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open density table '" + path + "'");
    return read_density_table(in);
}

void write_density_table(std::ostream& out, const DensityTable& t)
{
    out << std::setprecision(17);
    out << "# Preisach density table (piecewise constant, rows indexed by r)\n";
    out << "r_range " << t.r_min << ' ' << t.r_max << '\n';
    out << "v_range " << t.v_min << ' ' << t.v_max << '\n';
    out << "shape " << t.nr << ' ' << t.nv << '\n';
    for (std::size_t i = 0; i < t.nr; ++i) {
        for (std::size_t k = 0; k < t.nv; ++k) {
            out << (k ? " " : "") << t.values[i * t.nv + k];
        }
        out << '\n';
    }
}

}  // namespace porofreeze::hysteresis
