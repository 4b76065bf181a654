#include "porofreeze/solver/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>

#include <Eigen/Cholesky>

#include "porofreeze/discretization/spectral.hpp"
#include "porofreeze/errors.hpp"
#include "porofreeze/solver/floor.hpp"

namespace porofreeze::solver {

using discretization::SparseMatrix;
using discretization::Vector;
using plasticity::SymTensor;

double phase_update(double chi, double drive, double gamma, double dt)
{
    return std::clamp(chi + dt * drive / gamma, 0.0, 1.0);
}

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// One scalar implicit equation per node: residual r_i(y_i) plus a Laplacian of the
/// Kirchhoff variable w(y).
struct NodalEquation {
    std::function<void(std::size_t, double, double&, double&)> eval;  // residual and its y-derivative
    std::function<double(double)> w;
    std::function<double(double)> w_prime;
    std::function<double(double, double)> w_inverse;  // (value, guess)
    bool secant = false;
    /// Residual level below which rounding dominates.
    double floor = 0.0;
    const char* name = "";
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

SparseMatrix with_diagonal(const SparseMatrix& a, const std::vector<double>& diag)
{
    SparseMatrix out = a;
    for (Eigen::Index i = 0; i < out.rows(); ++i) out.coeffRef(i, i) += diag[static_cast<std::size_t>(i)];
    return out;
}

[[noreturn]] void fail(const char* what, int it, double res)
{
    throw StepFailure(std::string(what) + " solve did not converge after " + std::to_string(it) +
                      " iterations (residual " + std::to_string(res) + ")");
}

}  // namespace

struct Simulator::Impl {
    Problem prob;
    SolverConfig cfg;
    discretization::Geometry geo;
    discretization::Elasticity el;
    constitutive::CutoffPack pack;
    hysteresis::PreisachModel model;
    SparseMatrix stiff;
    double stiff_norm = 0.0;
    std::vector<double> alpha_w, omega_w;
    SparseMatrix kb, kah, kae;
    std::map<double, std::unique_ptr<discretization::SpdSolver>> momentum_solvers;
    std::optional<discretization::SpectralBasis1D> spectral;
    Eigen::VectorXd lambda_p, lambda_z;
    SimState st;
    std::size_t step_count = 0;
    double floor_c = 0.0;
    double floor_phi = 0.0;
    int dim;
    std::size_t nn, ne;

    Impl(Problem p, SolverConfig c)
        : prob(std::move(p)),
          cfg(std::move(c)),
          geo(prob.mesh),
          el(prob.mesh, geo),
          pack(prob.model.laws, cfg.cutoff_r),
          model(hysteresis::PreisachModel::with_levels(prob.model.density, cfg.preisach_levels)),
          dim(prob.mesh.dim),
          nn(prob.mesh.num_nodes()),
          ne(prob.mesh.num_elements())
    {
        cfg.validate();
        if (prob.model.dim != dim) throw InvalidSetup("material dimension differs from the mesh dimension");
        prob.model.tensors.validate(dim);
        prob.model.yield.validate();
        if (prob.probe_node >= nn) throw InvalidSetup("probe node index out of range");
        stiff = discretization::assemble_stiffness(prob.mesh, geo, std::vector<double>(ne, 1.0));
        for (Eigen::Index k = 0; k < stiff.outerSize(); ++k) {
            double row = 0.0;
            for (SparseMatrix::InnerIterator it(stiff, k); it; ++it) row += std::abs(it.value());
            stiff_norm = std::max(stiff_norm, row);
        }
        alpha_w = boundary_weights(prob.boundary.alpha, "alpha");
        omega_w = boundary_weights(prob.boundary.omega, "omega");
        kb = el.assemble(prob.model.tensors.b);
        kah = el.assemble(prob.model.tensors.ah);
        kae = el.assemble(prob.model.tensors.ae);
        if (cfg.mode == Mode::Spectral) setup_spectral();
        floor_c = floor_constant(prob.model.laws, prob.model.constants, prob.model.tensors, dim);
        floor_phi = prob.model.constants.theta_bar;
        init_state();
    }

    std::vector<double> boundary_weights(const FacetField& f, const char* what) const
    {
        const auto& mesh = prob.mesh;
        std::vector<double> coeff(mesh.boundary.size());
        for (std::size_t k = 0; k < coeff.size(); ++k) {
            const auto& facet = mesh.boundary[k];
            auto x = mesh.nodes[static_cast<std::size_t>(facet.nodes[0])];
            if (facet.nodes[1] >= 0) {
                const auto& y = mesh.nodes[static_cast<std::size_t>(facet.nodes[1])];
                x = {0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])};
            }
            coeff[k] = f(facet.marker, x[0], x[1]);
            if (!(coeff[k] >= 0.0)) {
                throw InvalidParameter(std::string("boundary coefficient ") + what + " must be nonnegative");
            }
        }
        return discretization::lumped_boundary(mesh, coeff);
    }

    void setup_spectral()
    {
        const auto& mesh = prob.mesh;
        if (dim != 1) throw InvalidSetup("spectral mode is available in 1D only");
        const double x0 = mesh.nodes.front()[0], x1 = mesh.nodes.back()[0];
        const double h = (x1 - x0) / static_cast<double>(nn - 1);
        for (std::size_t i = 0; i < nn; ++i) {
            if (std::abs(mesh.nodes[i][0] - (x0 + h * static_cast<double>(i))) > 1e-12 * (1.0 + std::abs(x1))) {
                throw InvalidSetup("spectral mode needs uniform, ordered 1D nodes");
            }
        }
        const std::size_t modes = cfg.spectral_modes == 0 ? nn - 1 : cfg.spectral_modes;
        spectral.emplace(x0, x1, nn, modes);
        lambda_p.resize(static_cast<Eigen::Index>(modes));
        lambda_z.resize(static_cast<Eigen::Index>(modes));
        for (std::size_t i = 0; i < modes; ++i) {
            const double l = spectral->lambda(i);
            lambda_p[static_cast<Eigen::Index>(i)] = l + cfg.eta * l * l;
            lambda_z[static_cast<Eigen::Index>(i)] = l;
        }
    }

    double sat_weight(double chi) const
    {
        const double rs = prob.model.constants.rho_star;
        return chi + rs * (1.0 - chi);
    }

    std::span<const double> span_of(const Vector& v) const
    {
        return {v.data(), static_cast<std::size_t>(v.size())};
    }

    std::vector<SymTensor> strains(const Vector& u) const
    {
        std::vector<SymTensor> out;
        out.reserve(ne);
        for (std::size_t e = 0; e < ne; ++e) out.push_back(el.strain(e, span_of(u)));
        return out;
    }

    std::vector<double> divergence(const Vector& u) const { return el.nodal_divergence(span_of(u)); }

    void init_state()
    {
        const auto& mesh = prob.mesh;
        const auto& init = prob.initial;
        const auto on_boundary = mesh.boundary_nodes();
        st.t = 0.0;
        st.p.resize(nn);
        st.theta.resize(nn);
        st.chi.resize(nn);
        st.u = Vector::Zero(static_cast<Eigen::Index>(el.num_dofs()));
        std::mt19937_64 rng(prob.seed);
        std::uniform_real_distribution<double> noise(-1.0, 1.0);
        const double theta_bar = prob.model.constants.theta_bar;
        for (std::size_t i = 0; i < nn; ++i) {
            const auto& x = mesh.nodes[i];
            st.p[i] = init.p(x[0], x[1]);
            if (init.p_noise > 0.0 && !on_boundary[i]) st.p[i] += init.p_noise * noise(rng);
            st.theta[i] = init.theta(x[0], x[1]);
            st.chi[i] = init.chi(x[0], x[1]);
            if (!(st.chi[i] >= 0.0 && st.chi[i] <= 1.0)) {
                throw InvalidSetup("initial phase fraction outside [0, 1] at node " + std::to_string(i));
            }
            if (!(st.theta[i] >= theta_bar)) {
                throw InvalidSetup("initial temperature below theta_bar at node " + std::to_string(i));
            }
            if (!on_boundary[i]) {
                const auto u0 = init.u(x[0], x[1]);
                for (int c = 0; c < dim; ++c) {
                    st.u[static_cast<Eigen::Index>(i) * dim + c] = u0[static_cast<std::size_t>(c)];
                }
            }
        }
        if (spectral) {
            std::vector<double> v(nn), z(nn);
            for (std::size_t i = 0; i < nn; ++i) {
                v[i] = pack.m(st.p[i]);
                z[i] = pack.k(st.theta[i]);
            }
            st.v_modes = spectral->analyze(v);
            st.z_modes = spectral->analyze(z);
            const Vector vn = spectral->synthesize(st.v_modes), zn = spectral->synthesize(st.z_modes);
            for (std::size_t i = 0; i < nn; ++i) {
                st.p[i] = pack.m_inverse(vn[static_cast<Eigen::Index>(i)], st.p[i]);
                st.theta[i] = pack.k_inverse(zn[static_cast<Eigen::Index>(i)], st.theta[i]);
            }
        }
        st.banks.clear();
        st.banks.reserve(nn);
        for (std::size_t i = 0; i < nn; ++i) st.banks.push_back(hysteresis::init_bank(model, st.p[i]));
        const auto eps = strains(st.u);
        st.plastic.assign(ne, {});
        for (std::size_t e = 0; e < ne; ++e) st.plastic[e].sigma_p = plasticity::stop_init(eps[e], prob.model.yield);
        const auto d = divergence(st.u);
        st.content.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            const double g0 = hysteresis::preisach_eval(st.banks[i], model);
            st.content[i] = sat_weight(st.chi[i]) * (pack.f(st.p[i]) + g0 + d[i]);
        }
    }

    double internal_energy(const SimState& s) const
    {
        const auto& k = prob.model.constants;
        const auto& cv = prob.model.laws.heat_capacity;
        const auto d = divergence(s.u);
        double e = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            const double u0 = hysteresis::preisach_potential(s.banks[i], model);
            e += geo.lumped[i] * (cv.antiderivative(s.theta[i]) + k.latent * s.chi[i] + k.beta * k.theta_c * d[i] +
                                  sat_weight(s.chi[i]) * (pack.v(s.p[i]) + u0));
        }
        const auto eps = strains(s.u);
        for (std::size_t e2 = 0; e2 < ne; ++e2) {
            e += geo.measure[e2] * plasticity::plastic_potential(eps[e2], s.plastic[e2].sigma_p, prob.model.tensors);
        }
        return e;
    }

    void phase_fields(const SimState& s, const std::vector<double>& d, std::vector<double>& drive,
                      std::vector<double>& gamma) const
    {
        const auto& k = prob.model.constants;
        drive.resize(nn);
        gamma.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            const double p = s.p[i];
            const double g0 = hysteresis::preisach_eval(s.banks[i], model);
            const double u0 = hysteresis::preisach_potential(s.banks[i], model);
            drive[i] = (1.0 - k.rho_star) * (pack.phi(p) + p * g0 - u0 + p * d[i]) +
                       k.latent * (pack.q_pos(s.theta[i]) / k.theta_c - 1.0);
            gamma[i] = pack.gamma(p, s.theta[i], d[i]);
        }
    }

    // ---- generic nonlinear solves -------------------------------------------------

    SolveStats solve_nodal(const NodalEquation& eq, std::vector<double>& y) const
    {
        std::vector<double> r(nn), d(nn), r_try(nn), d_try(nn), r_prev, y_prev;
        const auto residual = [&](const std::vector<double>& yy, std::vector<double>& rr, std::vector<double>& dd) {
            Vector w(static_cast<Eigen::Index>(nn));
            for (std::size_t i = 0; i < nn; ++i) {
                eq.eval(i, yy[i], rr[i], dd[i]);
                w[static_cast<Eigen::Index>(i)] = eq.w(yy[i]);
            }
            Vector res = stiff * w;
            for (std::size_t i = 0; i < nn; ++i) res[static_cast<Eigen::Index>(i)] += rr[i];
            return res;
        };
        Vector res = residual(y, r, d);
        const double norm0 = inf_norm(res);
        double norm = norm0;
        double w_max = 0.0;
        for (std::size_t i = 0; i < nn; ++i) w_max = std::max(w_max, std::abs(eq.w(y[i])));
        const double floor = std::max(eq.floor, 1e-13 * stiff_norm * w_max);
        bool full_step_small = false;
        for (int it = 0;; ++it) {
            if (!std::isfinite(norm)) fail(eq.name, it, norm);
            if (norm <= cfg.tol * norm0 || norm <= floor || full_step_small) return {it, norm};
            if (it == cfg.max_iter) fail(eq.name, it, norm);
            std::vector<double> diag(nn), wp(nn);
            for (std::size_t i = 0; i < nn; ++i) {
                double slope = d[i];
                if (eq.secant && !y_prev.empty()) {
                    const double dy = y[i] - y_prev[i];
                    if (std::abs(dy) > 1e-12 * (1.0 + std::abs(y[i]))) slope = (r[i] - r_prev[i]) / dy;
                }
                wp[i] = eq.w_prime(y[i]);
                diag[i] = std::max(slope, 1e-14 * std::abs(d[i])) / wp[i];
            }
            Eigen::SimplicialLDLT<SparseMatrix> ldlt(with_diagonal(stiff, diag));
            if (ldlt.info() != Eigen::Success) fail(eq.name, it, norm);
            const Vector s = ldlt.solve(-res);
            std::vector<double> dy(nn), y_try(nn);
            double step_max = 0.0;
            for (std::size_t i = 0; i < nn; ++i) {
                dy[i] = s[static_cast<Eigen::Index>(i)] / wp[i];
                step_max = std::max(step_max, std::abs(dy[i]));
            }
            double lambda = 1.0;
            Vector res_try;
            for (;;) {
                for (std::size_t i = 0; i < nn; ++i) y_try[i] = y[i] + lambda * dy[i];
                res_try = residual(y_try, r_try, d_try);
                const double n_try = inf_norm(res_try);
                if ((std::isfinite(n_try) && n_try <= (1.0 - 1e-4 * lambda) * norm) || lambda < 1e-3) break;
                lambda *= 0.5;
            }
            full_step_small = lambda == 1.0 && step_max <= 1e-13 * (1.0 + max_abs(y));
            y_prev = y;
            r_prev = r;
            y.swap(y_try);
            r.swap(r_try);
            d.swap(d_try);
            res = res_try;
            norm = inf_norm(res);
        }
    }

    SolveStats solve_spectral(const NodalEquation& eq, Eigen::VectorXd& q, const Eigen::VectorXd& lambda,
                              std::vector<double>& y) const
    {
        const Eigen::MatrixXd& e = spectral->values();
        std::vector<double> r(nn), d(nn), r_prev, y_prev;
        const auto residual = [&](const Eigen::VectorXd& qq, std::vector<double>& yy, std::vector<double>& rr,
                                  std::vector<double>& dd) {
            const Eigen::VectorXd w = e * qq;
            Eigen::VectorXd nodal(static_cast<Eigen::Index>(nn));
            for (std::size_t i = 0; i < nn; ++i) {
                yy[i] = eq.w_inverse(w[static_cast<Eigen::Index>(i)], yy[i]);
                eq.eval(i, yy[i], rr[i], dd[i]);
                nodal[static_cast<Eigen::Index>(i)] = rr[i];
            }
            Eigen::VectorXd res = e.transpose() * nodal;
            res += lambda.cwiseProduct(qq);
            return res;
        };
        Eigen::VectorXd res = residual(q, y, r, d);
        const double norm0 = inf_norm(res);
        double norm = norm0;
        const double floor = std::max(eq.floor, 1e-13 * lambda.cwiseAbs().maxCoeff() * inf_norm(q));
        bool full_step_small = false;
        for (int it = 0;; ++it) {
            if (!std::isfinite(norm)) fail(eq.name, it, norm);
            if (norm <= cfg.tol * norm0 || norm <= floor || full_step_small) return {it, norm};
            if (it == cfg.max_iter) fail(eq.name, it, norm);
            Eigen::VectorXd diag(static_cast<Eigen::Index>(nn));
            for (std::size_t i = 0; i < nn; ++i) {
                double slope = d[i];
                if (eq.secant && !y_prev.empty()) {
                    const double dy = y[i] - y_prev[i];
                    if (std::abs(dy) > 1e-12 * (1.0 + std::abs(y[i]))) slope = (r[i] - r_prev[i]) / dy;
                }
                diag[static_cast<Eigen::Index>(i)] = std::max(slope, 1e-14 * std::abs(d[i])) / eq.w_prime(y[i]);
            }
            Eigen::MatrixXd jac = e.transpose() * diag.asDiagonal() * e;
            jac.diagonal() += lambda;
            const Eigen::VectorXd delta = jac.ldlt().solve(-res);
            double lambda_ls = 1.0;
            Eigen::VectorXd q_try, res_try;
            std::vector<double> y_try, r_try(nn), d_try(nn);
            for (;;) {
                q_try = q + lambda_ls * delta;
                y_try = y;
                res_try = residual(q_try, y_try, r_try, d_try);
                const double n_try = inf_norm(res_try);
                if ((std::isfinite(n_try) && n_try <= (1.0 - 1e-4 * lambda_ls) * norm) || lambda_ls < 1e-3) break;
                lambda_ls *= 0.5;
            }
            full_step_small = lambda_ls == 1.0 && inf_norm(delta) <= 1e-13 * (1.0 + inf_norm(q));
            y_prev = y;
            r_prev = r;
            q = q_try;
            y.swap(y_try);
            r.swap(r_try);
            d.swap(d_try);
            res = res_try;
            norm = inf_norm(res);
        }
    }

    // ---- one step -----------------------------------------------------------------

    struct Sweep {
        SimState next;
        std::vector<double> drive, gamma, d_start;
        std::vector<hysteresis::HysteresisIncrement> hyst;
        std::vector<plasticity::StopIncrement> stop;
        std::vector<SymTensor> d_eps;
        std::vector<double> elem_pressure, elem_cut;
    };

    std::vector<double> nodal_values(const ScalarField& f, double t) const
    {
        std::vector<double> v(nn);
        for (std::size_t i = 0; i < nn; ++i) v[i] = f(prob.mesh.nodes[i][0], prob.mesh.nodes[i][1], t);
        return v;
    }

    Sweep sweep(const SimState& s, const SimState& guess, double dt, StepReport& rep)
    {
        const auto& k = prob.model.constants;
        const auto& tensors = prob.model.tensors;
        const double t1 = s.t + dt;
        Sweep w;
        w.next = s;
        SimState& n = w.next;
        n.t = t1;
        w.d_start = divergence(s.u);
        const auto d_guess = divergence(guess.u);

        // phase
        phase_fields(guess, d_guess, w.drive, w.gamma);
        if (!cfg.freeze_phase) {
            for (std::size_t i = 0; i < nn; ++i) n.chi[i] = phase_update(s.chi[i], w.drive[i], w.gamma[i], dt);
        }

        // pressure
        std::vector<double> sat(nn);
        for (std::size_t i = 0; i < nn; ++i) sat[i] = sat_weight(n.chi[i]);
        const auto p_star = nodal_values(prob.boundary.p_star, t1);
        double scale = 0.0;
        for (std::size_t i = 0; i < nn; ++i) scale = std::max(scale, geo.lumped[i] * std::abs(s.content[i]) / dt);
        NodalEquation peq;
        peq.name = "pressure";
        peq.secant = cfg.pressure_linearization == Linearization::Secant;
        peq.floor = 1e-14 * (1.0 + scale);
        peq.eval = [&](std::size_t i, double p, double& r, double& d) {
            hysteresis::TrialValue tr;
            if (!model.trivial()) tr = hysteresis::preisach_trial(s.banks[i], p, model);
            const double m = geo.lumped[i] / dt;
            r = m * (sat[i] * (pack.f(p) + tr.g0 + d_guess[i]) - s.content[i]) + alpha_w[i] * (p - p_star[i]);
            d = m * sat[i] * (pack.f_prime(p) + tr.slope) + alpha_w[i];
        };
        peq.w = [&](double p) { return pack.m(p); };
        peq.w_prime = [&](double p) { return pack.mu(p); };
        peq.w_inverse = [&](double v, double guess_p) { return pack.m_inverse(v, guess_p); };
        if (cfg.freeze_pressure) {
            n.p = s.p;
        } else {
            n.p = guess.p;
            const auto ps = spectral ? solve_spectral(peq, n.v_modes = guess.v_modes, lambda_p, n.p)
                                     : solve_nodal(peq, n.p);
            rep.iters_pressure += ps.iterations;
            rep.res_pressure = ps.residual;
        }
        w.hyst.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            n.banks[i] = s.banks[i];
            if (!model.trivial()) w.hyst[i] = hysteresis::preisach_step(n.banks[i], n.p[i], model);
            n.banks[i].last_input = n.p[i];
            n.content[i] = sat[i] * (pack.f(n.p[i]) + hysteresis::preisach_eval(n.banks[i], model) + d_guess[i]);
        }

        // momentum
        const auto eps_n = strains(s.u);
        w.stop.assign(ne, {});
        w.d_eps.assign(ne, SymTensor::zero(dim));
        if (!cfg.freeze_mechanics) {
            momentum(s, guess, n, sat, eps_n, dt, w, rep);
        }

        // pressure dissipation per element
        w.elem_pressure.assign(ne, 0.0);
        w.elem_cut.assign(ne, 0.0);
        std::vector<double> v_nodal(nn);
        for (std::size_t i = 0; i < nn; ++i) v_nodal[i] = pack.m(n.p[i]);
        for (std::size_t e = 0; e < ne; ++e) {
            const auto gp = geo.gradient(prob.mesh, e, n.p);
            const auto gv = geo.gradient(prob.mesh, e, v_nodal);
            const double g2 = gp[0] * gp[0] + gp[1] * gp[1];
            if (g2 <= 0.0) continue;
            const double mu_e = (gv[0] * gp[0] + gv[1] * gp[1]) / g2;
            const double qg = pack.q(g2);
            w.elem_pressure[e] = mu_e * qg;
            w.elem_cut[e] = mu_e * (g2 - qg);
        }

        // temperature
        if (!cfg.freeze_temperature) temperature(s, guess, n, sat, w, dt, rep);
        (void)k;
        (void)tensors;
        return w;
    }

    void momentum(const SimState& s, const SimState& guess, SimState& n, const std::vector<double>& sat,
                  const std::vector<SymTensor>& eps_n, double dt, Sweep& w, StepReport& rep)
    {
        const auto& k = prob.model.constants;
        const auto& tensors = prob.model.tensors;
        const auto& z = prob.model.yield;
        auto& solver = momentum_solvers[dt];
        if (!solver) {
            const SparseMatrix a = el.restrict(SparseMatrix(kb / dt + kah + kae));
            solver = std::make_unique<discretization::SpdSolver>(a);
        }
        std::vector<double> coupling(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            coupling[i] = n.p[i] * sat[i] + k.beta * (pack.q_pos(guess.theta[i]) - k.theta_c);
        }
        Vector gravity(static_cast<Eigen::Index>(el.num_dofs()));
        for (std::size_t i = 0; i < nn; ++i) {
            const auto g = prob.gravity(prob.mesh.nodes[i][0], prob.mesh.nodes[i][1], n.t);
            for (int c = 0; c < dim; ++c) {
                gravity[static_cast<Eigen::Index>(i) * dim + c] = geo.lumped[i] * g[static_cast<std::size_t>(c)];
            }
        }
        std::vector<SymTensor> base(ne, SymTensor::zero(dim));
        for (std::size_t e = 0; e < ne; ++e) base[e] = s.plastic[e].sigma_p - tensors.ae.apply(eps_n[e]);
        const Vector rhs_base = kb * s.u / dt + el.coupling_force(coupling) + gravity - el.internal_force(base);

        std::vector<SymTensor> ret(ne, SymTensor::zero(dim));
        Vector u = s.u;
        const auto returns = [&](const Vector& uu) {
            double change = 0.0;
            for (std::size_t e = 0; e < ne; ++e) {
                const SymTensor tau = s.plastic[e].sigma_p + tensors.ae.apply(el.strain(e, span_of(uu)) - eps_n[e]);
                const SymTensor r = tau - z.project(tau, tensors.ae);
                change = std::max(change, (r - ret[e]).norm());
                ret[e] = r;
            }
            return change;
        };
        int it = 0;
        double delta = 0.0;
        for (;; ++it) {
            if (it == cfg.max_iter) fail("momentum", it, delta);
            const Vector rhs = rhs_base + el.internal_force(ret);
            const Vector u_new = el.extend(solver->solve(el.restrict(rhs)));
            delta = inf_norm(u_new - u);
            u = u_new;
            const double change = returns(u);
            if (!std::isfinite(delta)) fail("momentum", it, delta);
            if (change <= 1e-15 * (1.0 + z.sigma_y) || delta <= cfg.tol * (1e-3 + inf_norm(u))) break;
        }
        rep.iters_momentum += it + 1;
        rep.res_momentum = delta;
        n.u = u;
        for (std::size_t e = 0; e < ne; ++e) {
            w.d_eps[e] = el.strain(e, span_of(n.u)) - eps_n[e];
            n.plastic[e] = s.plastic[e];
            w.stop[e] = plasticity::stop_step(n.plastic[e], w.d_eps[e], tensors, z);
        }
    }

    void temperature(const SimState& s, const SimState& guess, SimState& n, const std::vector<double>& sat,
                     const Sweep& w, double dt, StepReport& rep)
    {
        const auto& k = prob.model.constants;
        const auto& cv = prob.model.laws.heat_capacity;
        const auto& src_on = cfg.sources;
        const auto d_new = divergence(n.u);
        std::vector<double> src(nn, 0.0), sink(nn);
        const double share = 1.0 / (dim + 1);
        for (std::size_t e = 0; e < ne; ++e) {
            double q = 0.0;
            if (src_on.viscous) q += prob.model.tensors.b.energy(w.d_eps[e]) / (dt * dt);
            if (src_on.plastic) q += w.stop[e].d_dissipation / dt;
            if (src_on.pressure) q += w.elem_pressure[e];
            if (q == 0.0) continue;
            for (int a = 0; a <= dim; ++a) {
                src[static_cast<std::size_t>(prob.mesh.elements[e][static_cast<std::size_t>(a)])] +=
                    share * geo.measure[e] * q;
            }
        }
        const auto heat = nodal_values(prob.heat_source, n.t);
        for (std::size_t i = 0; i < nn; ++i) {
            src[i] /= geo.lumped[i];
            const double dchi = n.chi[i] - s.chi[i];
            if (src_on.preisach) src[i] += sat[i] * w.hyst[i].dD0abs / dt;
            if (src_on.phase) src[i] += w.gamma[i] * dchi * dchi / (dt * dt);
            src[i] += heat[i];
            sink[i] = (k.latent / k.theta_c * dchi + k.beta * (d_new[i] - w.d_start[i])) / dt;
        }
        const auto theta_star = nodal_values(prob.boundary.theta_star, n.t);
        double scale = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            scale = std::max(scale, geo.lumped[i] * cv.antiderivative(std::abs(s.theta[i])) / dt);
        }
        const double r_cut = pack.r();
        NodalEquation teq;
        teq.name = "temperature";
        teq.floor = 1e-14 * (1.0 + scale);
        teq.eval = [&](std::size_t i, double th, double& r, double& d) {
            const double m = geo.lumped[i];
            r = m * (cv.antiderivative(th) - cv.antiderivative(s.theta[i])) / dt + omega_w[i] * (th - theta_star[i]) +
                m * sink[i] * pack.q_pos(th) - m * src[i];
            d = m * cv.value(th) / dt + omega_w[i] + (th > 0.0 && th < r_cut ? m * sink[i] : 0.0);
        };
        teq.w = [&](double th) { return pack.k(th); };
        teq.w_prime = [&](double th) { return pack.kappa(th); };
        teq.w_inverse = [&](double z, double guess_t) { return pack.k_inverse(z, guess_t); };
        n.theta = guess.theta;
        const auto ts = spectral ? solve_spectral(teq, n.z_modes = guess.z_modes, lambda_z, n.theta)
                                 : solve_nodal(teq, n.theta);
        rep.iters_temperature += ts.iterations;
        rep.res_temperature = ts.residual;
    }

    std::pair<SimState, StepReport> attempt(double dt)
    {
        const SimState& s = st;
        StepReport rep;
        rep.dt = dt;
        Sweep w = sweep(s, s, dt, rep);
        if (cfg.iterated_splitting) {
            for (int k = 1; k < cfg.max_sweeps; ++k) {
                Sweep again = sweep(s, w.next, dt, rep);
                double change = 0.0, size = 0.0;
                for (std::size_t i = 0; i < nn; ++i) {
                    change = std::max({change, std::abs(again.next.p[i] - w.next.p[i]),
                                       std::abs(again.next.theta[i] - w.next.theta[i]),
                                       std::abs(again.next.chi[i] - w.next.chi[i])});
                    size = std::max({size, std::abs(again.next.p[i]), std::abs(again.next.theta[i])});
                }
                change = std::max(change, inf_norm(again.next.u - w.next.u));
                w = std::move(again);
                rep.sweeps = k + 1;
                if (change <= cfg.tol * (1.0 + size)) break;
            }
        }
        const SimState& n = w.next;

        // chi rate bound: the clamp never moves chi faster than |F| / gamma
        for (std::size_t i = 0; i < nn; ++i) {
            const double rate = std::abs(n.chi[i] - s.chi[i]) / dt;
            const double bound = std::abs(w.drive[i]) / w.gamma[i];
            rep.chi_rate_max = std::max(rep.chi_rate_max, rate);
            const double rounding = 4.0 * std::numeric_limits<double>::epsilon() / dt;
            rep.chi_rate_excess = std::max(rep.chi_rate_excess, rate - bound * (1.0 + 1e-12) - rounding);
        }
        if (rep.chi_rate_excess <= 0.0) rep.chi_rate_excess = 0.0;

        // dissipation channels and the energy ledger
        const auto& src_on = cfg.sources;
        auto& dis = rep.dissipation;
        for (std::size_t e = 0; e < ne; ++e) {
            dis.viscous += geo.measure[e] * prob.model.tensors.b.energy(w.d_eps[e]) / dt;
            dis.plastic += geo.measure[e] * w.stop[e].d_dissipation;
            dis.pressure += dt * geo.measure[e] * w.elem_pressure[e];
            rep.ledger.cut_waste += dt * geo.measure[e] * w.elem_cut[e];
        }
        const auto p_star = nodal_values(prob.boundary.p_star, n.t);
        const auto theta_star = nodal_values(prob.boundary.theta_star, n.t);
        const auto heat = nodal_values(prob.heat_source, n.t);
        for (std::size_t i = 0; i < nn; ++i) {
            const double dchi = n.chi[i] - s.chi[i];
            dis.preisach += geo.lumped[i] * sat_weight(n.chi[i]) * w.hyst[i].dD0abs;
            dis.phase += geo.lumped[i] * w.gamma[i] * dchi * dchi / dt;
            rep.ledger.boundary_pressure += dt * alpha_w[i] * (n.p[i] - p_star[i]) * n.p[i];
            rep.ledger.boundary_heat += dt * omega_w[i] * (n.theta[i] - theta_star[i]);
            rep.ledger.external_heat += dt * geo.lumped[i] * heat[i];
        }
        for (std::size_t i = 0; i < nn; ++i) {
            const auto g = prob.gravity(prob.mesh.nodes[i][0], prob.mesh.nodes[i][1], n.t);
            for (int c = 0; c < dim; ++c) {
                const auto dof = static_cast<Eigen::Index>(i) * dim + c;
                rep.ledger.gravity_work += geo.lumped[i] * g[static_cast<std::size_t>(c)] * (n.u[dof] - s.u[dof]);
            }
        }
        (void)src_on;
        rep.ledger.energy_before = internal_energy(s);
        rep.ledger.energy_after = internal_energy(n);
        rep.ledger.close();
        return {std::move(w.next), rep};
    }

    void fill_state_fields(StepReport& rep) const
    {
        const auto [pmin, pmax] = std::minmax_element(st.p.begin(), st.p.end());
        const auto [tmin, tmax] = std::minmax_element(st.theta.begin(), st.theta.end());
        const auto [cmin, cmax] = std::minmax_element(st.chi.begin(), st.chi.end());
        rep.t = st.t;
        rep.p_min = *pmin;
        rep.p_max = *pmax;
        rep.theta_min = *tmin;
        rep.theta_max = *tmax;
        rep.chi_min = *cmin;
        rep.chi_max = *cmax;
        rep.positivity_ok = *tmin > 0.0;
        rep.floor_phi = floor_phi;
        rep.floor_margin = *tmin - floor_phi;
        rep.floor_tol = cfg.floor_tolerance * cfg.dt;
        const auto mon = cutoff_monitor(prob.mesh, geo, st, pack.r());
        rep.cutoff_active = mon.active();
        rep.cutoff_nodes = mon.p_nodes.size() + mon.theta_nodes.size();
        rep.max_abs_p = mon.max_abs_p;
        rep.max_grad_p_sq = mon.max_grad_p_sq;
        const std::size_t probe = prob.probe_node;
        rep.probe_p = st.p[probe];
        rep.probe_g = pack.f(st.p[probe]) + hysteresis::preisach_eval(st.banks[probe], model);
    }

    static StepReport merge(const StepReport& a, const StepReport& b)
    {
        StepReport m = b;
        m.dt = a.dt + b.dt;
        m.substeps = a.substeps + b.substeps;
        m.iters_pressure += a.iters_pressure;
        m.iters_momentum += a.iters_momentum;
        m.iters_temperature += a.iters_temperature;
        m.sweeps = std::max(a.sweeps, b.sweeps);
        m.res_pressure = std::max(a.res_pressure, b.res_pressure);
        m.res_momentum = std::max(a.res_momentum, b.res_momentum);
        m.res_temperature = std::max(a.res_temperature, b.res_temperature);
        m.chi_rate_max = std::max(a.chi_rate_max, b.chi_rate_max);
        m.chi_rate_excess = std::max(a.chi_rate_excess, b.chi_rate_excess);
        m.positivity_ok = a.positivity_ok && b.positivity_ok;
        m.floor_margin = std::min(a.floor_margin, b.floor_margin);
        m.ledger.energy_before = a.ledger.energy_before;
        m.ledger.cut_waste += a.ledger.cut_waste;
        m.ledger.boundary_pressure += a.ledger.boundary_pressure;
        m.ledger.boundary_heat += a.ledger.boundary_heat;
        m.ledger.gravity_work += a.ledger.gravity_work;
        m.ledger.external_heat += a.ledger.external_heat;
        m.ledger.defect += a.ledger.defect;
        m.dissipation.viscous += a.dissipation.viscous;
        m.dissipation.plastic += a.dissipation.plastic;
        m.dissipation.preisach += a.dissipation.preisach;
        m.dissipation.phase += a.dissipation.phase;
        m.dissipation.pressure += a.dissipation.pressure;
        return m;
    }

    StepReport advance(double dt, int depth)
    {
        try {
            auto [next, rep] = attempt(dt);
            const double t0 = st.t;
            st = std::move(next);
            const auto& cv = prob.model.laws.heat_capacity;
            for (int k = 0; k < 4; ++k) floor_phi = floor_rk4_step(cv, floor_c, floor_phi, 0.25 * dt);
            (void)t0;
            fill_state_fields(rep);
            return rep;
        } catch (const StepFailure& e) {
            if (depth >= cfg.max_halvings) {
                throw StepFailure(std::string(e.what()) + "; gave up after " + std::to_string(depth) +
                                  " step halvings at t = " + std::to_string(st.t));
            }
            const StepReport a = advance(0.5 * dt, depth + 1);
            const StepReport b = advance(0.5 * dt, depth + 1);
            return merge(a, b);
        }
    }
};

Simulator::Simulator(Problem problem, SolverConfig config)
    : impl_(std::make_unique<Impl>(std::move(problem), std::move(config)))
{
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const Problem& Simulator::problem() const { return impl_->prob; }
const SolverConfig& Simulator::config() const { return impl_->cfg; }
const discretization::Geometry& Simulator::geometry() const { return impl_->geo; }
const constitutive::CutoffPack& Simulator::pack() const { return impl_->pack; }
const hysteresis::PreisachModel& Simulator::preisach() const { return impl_->model; }
const SimState& Simulator::state() const { return impl_->st; }

bool Simulator::finished() const { return impl_->step_count >= impl_->cfg.num_steps(); }

StepReport Simulator::step()
{
    auto& im = *impl_;
    if (finished()) throw InvalidState("simulation already reached t_end");
    const double t_target = static_cast<double>(im.step_count + 1) * im.cfg.dt;
    const double dt = std::min(im.cfg.dt, std::max(t_target, 0.0) - im.st.t);
    StepReport rep = im.advance(dt > 0.0 ? dt : im.cfg.dt, 0);
    rep.step = ++im.step_count;
    return rep;
}

std::vector<StepReport> Simulator::run(const std::function<bool(const StepReport&, const SimState&)>& on_step)
{
    std::vector<StepReport> out;
    while (!finished()) {
        out.push_back(step());
        if (on_step && !on_step(out.back(), state())) break;
    }
    return out;
}

double Simulator::internal_energy(const SimState& s) const { return impl_->internal_energy(s); }

std::vector<double> Simulator::phase_drive(const SimState& s) const
{
    std::vector<double> drive, gamma;
    impl_->phase_fields(s, impl_->divergence(s.u), drive, gamma);
    return drive;
}

std::vector<double> Simulator::relaxation(const SimState& s) const
{
    std::vector<double> drive, gamma;
    impl_->phase_fields(s, impl_->divergence(s.u), drive, gamma);
    return gamma;
}

std::vector<double> Simulator::saturation(const SimState& s) const
{
    std::vector<double> g(impl_->nn);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = impl_->pack.f(s.p[i]) + hysteresis::preisach_eval(s.banks[i], impl_->model);
    }
    return g;
}

std::vector<double> Simulator::nodal_divergence(const SimState& s) const { return impl_->divergence(s.u); }

CutoffReport Simulator::monitor() const
{
    return cutoff_monitor(impl_->prob.mesh, impl_->geo, impl_->st, impl_->pack.r());
}

double Simulator::floor_value() const { return impl_->floor_phi; }

}  // namespace porofreeze::solver
