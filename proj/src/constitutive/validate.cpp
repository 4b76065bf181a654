#include "porofreeze/constitutive/validate.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "porofreeze/errors.hpp"

namespace porofreeze::constitutive {

bool ValidationReport::all_passed() const
{
    for (const auto& c : clauses) {
        if (c.evaluated && !c.passed) return false;
    }
    return true;
}

const ClauseResult* ValidationReport::find(const std::string& id) const
{
    for (const auto& c : clauses) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

ClauseResult& ValidationReport::get(const std::string& id)
{
    for (auto& c : clauses) {
        if (c.id == id) return c;
    }
    throw InvalidState("validation report has no clause " + id);
}

std::string ValidationReport::to_text() const
{
    std::ostringstream os;
    for (const auto& c : clauses) {
        os << c.id << "  " << (!c.evaluated ? "n/a " : (c.passed ? "pass" : "FAIL")) << "  " << c.description;
        if (!c.witness.empty()) os << "  [" << c.witness << "]";
        os << '\n';
    }
    return os.str();
}

namespace {

std::vector<double> signed_samples()
{
    std::vector<double> s{0.0};
    for (double e = -4.0; e <= 6.0; e += 0.125) {
        s.push_back(std::pow(10.0, e));
        s.push_back(-std::pow(10.0, e));
    }
    for (int k = -100; k <= 100; ++k) s.push_back(0.05 * k);
    return s;
}

std::vector<double> positive_samples()
{
    std::vector<double> s{0.0};
    for (double e = -4.0; e <= 6.0; e += 0.125) s.push_back(std::pow(10.0, e));
    for (int k = 1; k <= 200; ++k) s.push_back(0.05 * k);
    return s;
}

std::string at(const char* name, double x)
{
    std::ostringstream os;
    os.precision(6);
    os << name << " = " << x;
    return os.str();
}

// Records the first violated condition; later failures keep the earlier witness.
struct Checker {
    ClauseResult& c;
    void require(bool ok, const std::string& witness)
    {
        if (!ok && c.passed) {
            c.passed = false;
            c.witness = witness;
        }
    }
};

constexpr double kRel = 1e-12;

}  // namespace

ValidationReport validate_hypotheses(const ModelParameters& params)
{
    ValidationReport rep;
    auto add = [&rep](std::string id, std::string desc, bool evaluated = true) -> ClauseResult& {
        rep.clauses.push_back({std::move(id), std::move(desc), evaluated, true, {}});
        return rep.clauses.back();
    };
    const auto& laws = params.laws;
    const auto& dens = params.density;
    const auto ps = signed_samples();
    const auto ts = positive_samples();

    {
        Checker ck{add("(i)", "Ah, Ae, B symmetric positive definite")};
        const auto& t = params.tensors;
        ck.require(t.ah.min_eigen(params.dim) > 0.0, "Ah not positive definite");
        ck.require(t.ae.min_eigen(params.dim) > 0.0, "Ae not positive definite");
        ck.require(t.b.min_eigen(params.dim) > 0.0, "B not positive definite");
    }
    add("(ii)", "volume force is a bounded gradient field", false);
    add("(iii)", "alpha, omega >= 0 with positive boundary integrals", false);
    add("(iv)", "boundary data bounded, theta* >= theta_bar", false);
    add("(v)", "initial data: theta0 >= theta_bar, chi0 in [0, 1]", false);

    const double c_plus = dens.c_plus(), c_minus = dens.c_minus();
    {
        Checker ck{add("(vi)", "f maps into (C-, 1 - C+) with f_flat (1+|p|)^(-1-nu) <= f' <= f_sharp")};
        const auto& s = laws.saturation;
        ck.require(s.kind == SaturationLaw::Kind::Power, "linear saturation law is unbounded");
        ck.require(s.nu > 0.0 && s.nu <= 0.5, "nu in (0, 1/2] violated (" + at("nu", s.nu) + ")");
        ck.require(s.f_sharp > s.f_flat && s.f_flat > 0.0, "f_sharp > f_flat > 0 violated");
        ck.require(s.range_lo() > c_minus && s.range_hi() < 1.0 - c_plus,
                   "range of f not inside (C-, 1 - C+): sup f = " + std::to_string(s.range_hi()));
        for (double p : ps) {
            const double d = s.derivative(p);
            const double lower = s.f_flat * std::pow(1.0 + std::abs(p), -1.0 - s.nu);
            ck.require(d >= lower * (1.0 - kRel) && d <= s.f_sharp * (1.0 + kRel), "f' bound fails at " + at("p", p));
            const double v = s.value(p);
            ck.require(v > c_minus && v < 1.0 - c_plus, "f out of range at " + at("p", p));
        }
    }
    {
        Checker ck{add("(vii)", "mu >= mu_flat > 0")};
        const auto& m = laws.mobility;
        ck.require(m.mu_flat > 0.0, "mu_flat > 0 violated");
        for (double p : ps) ck.require(m.value(p) >= m.mu_flat * (1.0 - kRel), "mu < mu_flat at " + at("p", p));
    }
    {
        Checker ck{add("(viii)", "c_flat (1+theta^b) <= c_V <= c_sharp (1+theta^b_hat), 1/2 <= b < b_hat < 1")};
        const auto& c = laws.heat_capacity;
        ck.require(c.b >= 0.5, "1/2 <= b violated (" + at("b", c.b) + ")");
        ck.require(c.b < c.b_hat && c.b_hat < 1.0 && c.b < 1.0,
                   "b < b_hat < 1 violated (" + at("b", c.b) + ", " + at("b_hat", c.b_hat) + ")");
        ck.require(c.c_sharp > c.c_flat && c.c_flat > 0.0, "c_sharp > c_flat > 0 violated");
        for (double t : ts) {
            const double v = c.value(t);
            ck.require(v >= c.c_flat * (1.0 + std::pow(t, c.b)) * (1.0 - kRel) &&
                           v <= c.c_sharp * (1.0 + std::pow(t, c.b_hat)) * (1.0 + kRel),
                       "c_V bound fails at " + at("theta", t));
        }
    }
    {
        Checker ck{add("(ix)", "k_flat (1+theta^(1+a)) <= kappa <= k_sharp (1+theta^(1+a_hat)), exponent chain")};
        const auto& k = laws.conductivity;
        const double b = laws.heat_capacity.b;
        const double cap = (8.0 + 3.0 * k.a + 2.0 * b) * (1.0 + b) / (7.0 - 2.0 * b);
        ck.require(k.a > 0.0 && k.a < 1.0 - b, "0 < a < 1 - b violated (" + at("a", k.a) + ", " + at("b", b) + ")");
        ck.require(k.a < k.a_hat && k.a_hat < cap, "a < a_hat < (8+3a+2b)(1+b)/(7-2b) violated (" +
                                                       at("a_hat", k.a_hat) + ", bound " + std::to_string(cap) + ")");
        ck.require(k.k_sharp > k.k_flat && k.k_flat > 0.0, "k_sharp > k_flat > 0 violated");
        for (double t : ts) {
            const double v = k.value(t);
            ck.require(v >= k.k_flat * (1.0 + std::pow(t, 1.0 + k.a)) * (1.0 - kRel) &&
                           v <= k.k_sharp * (1.0 + std::pow(t, 1.0 + k.a_hat)) * (1.0 + kRel),
                       "kappa bound fails at " + at("theta", t));
        }
    }
    {
        Checker ck{add("(x)", "g_flat (1+theta+d^2) <= gamma <= g_sharp (1+theta+d^2)")};
        const auto& g = laws.relaxation;
        ck.require(g.g_sharp > g.g_flat && g.g_flat > 0.0, "g_sharp > g_flat > 0 violated");
        for (double t : ts) {
            for (double d : {0.0, 0.5, -3.0, 100.0}) {
                const double base = 1.0 + t + d * d;
                const double v = g.value(t, d);
                ck.require(v >= g.g_flat * base * (1.0 - kRel) && v <= g.g_sharp * base * (1.0 + kRel),
                           "gamma bound fails at " + at("theta", t) + ", " + at("div", d));
            }
        }
    }
    {
        Checker ck{add("(xi)", "yield set convex, closed, 0 in its interior")};
        try {
            params.yield.validate();
        } catch (const Error& e) {
            ck.require(false, e.what());
        }
    }
    {
        Checker ck{add("density-envelope", "0 <= psi <= psi*(r) with C* = int (1+r^2) psi* finite")};
        const double lo_r = dens.r_lo(), hi_r = dens.r_hi();
        const double lo_v = std::isfinite(dens.v_lo()) ? dens.v_lo() : -20.0;
        const double hi_v = std::isfinite(dens.v_hi()) ? dens.v_hi() : 20.0;
        for (int i = 0; i <= 64; ++i) {
            const double r = lo_r + (hi_r - lo_r) * i / 64.0;
            for (int j = 0; j <= 64; ++j) {
                const double v = lo_v + (hi_v - lo_v) * j / 64.0;
                const double psi = dens.value(r, v);
                ck.require(psi >= 0.0 && psi <= dens.envelope(r) * (1.0 + kRel),
                           "psi outside [0, psi*] at " + at("r", r) + ", " + at("v", v));
            }
        }
        ck.require(std::isfinite(dens.c_star()), "C* is not finite");
    }
    {
        Checker ck{add("density-mass", "0 < C+ < 1/2 and 0 < C- < 1/2")};
        ck.require(c_plus > 0.0 && c_plus < 0.5, "C+ = " + std::to_string(c_plus) + " not in (0, 1/2)");
        ck.require(c_minus > 0.0 && c_minus < 0.5, "C- = " + std::to_string(c_minus) + " not in (0, 1/2)");
    }
    {
        Checker ck{add("constants", "rho* in (0, 1); L, theta_c, theta_bar, rho_w > 0")};
        const auto& k = params.constants;
        ck.require(k.rho_star > 0.0 && k.rho_star < 1.0, "rho* not in (0, 1)");
        ck.require(k.latent > 0.0 && k.theta_c > 0.0 && k.theta_bar > 0.0 && k.rho_w > 0.0,
                   "nonpositive L, theta_c, theta_bar or rho_w");
    }
    return rep;
}

}  // namespace porofreeze::constitutive
