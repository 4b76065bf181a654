#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "porofreeze/errors.hpp"
#include "porofreeze/plasticity/elastic.hpp"
#include "porofreeze/plasticity/stop.hpp"
#include "porofreeze/plasticity/sym_tensor.hpp"
#include "porofreeze/plasticity/yield_surface.hpp"

using namespace porofreeze;
using namespace porofreeze::plasticity;

namespace {

SymTensor random_tensor(std::mt19937_64& rng, int dim, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    SymTensor t(dim);
    if (dim == 1) {
        t[SymTensor::XX] = n(rng);
    } else if (dim == 2) {
        t = SymTensor::plane(n(rng), n(rng), n(rng));
    } else {
        t = SymTensor::full(n(rng), n(rng), n(rng), n(rng), n(rng), n(rng));
    }
    return t;
}

// Projected-gradient minimization of 1/2 (x - tau) : M^{-1} (x - tau) over a convex set,
// using only a Euclidean projection supplied by the caller.
template <class Proj>
SymTensor projected_gradient(const SymTensor& tau, const IsoTensor& metric, Proj&& euclidean, int iters = 20000)
{
    const int d = tau.dim();
    const double lmax = 1.0 / metric.min_eigen(d);
    const double step = 1.0 / lmax;
    SymTensor x = euclidean(tau);
    for (int k = 0; k < iters; ++k) x = euclidean(x - metric.apply_inverse(x - tau) * step);
    return x;
}

SymTensor frobenius_ball(const SymTensor& x, double r)
{
    const double n = x.norm();
    return n > r ? x * (r / n) : x;
}

// Sweeping-process ODE for Ae = c I on a Frobenius ball: in the interior sigma_t = c eps_t,
// on the boundary the outward normal component of c eps_t is removed. Explicit Euler with
// a renormalization that only corrects the O(h^2) drift off the sphere.
SymTensor sweeping_oracle(SymTensor sigma, const std::vector<SymTensor>& path, double c, double radius,
                          int substeps)
{
    for (std::size_t k = 1; k < path.size(); ++k) {
        const SymTensor rate = (path[k] - path[k - 1]) * (1.0 / substeps);
        for (int s = 0; s < substeps; ++s) {
            SymTensor v = rate * c;
            if (sigma.norm() >= radius * (1.0 - 1e-12)) {
                const SymTensor n = sigma * (1.0 / sigma.norm());
                const double outward = n.dot(v);
                if (outward > 0.0) v -= n * outward;
            }
            sigma += v;
            if (sigma.norm() > radius) sigma *= radius / sigma.norm();
        }
    }
    return sigma;
}

ElasticTensors scalar_tensors(double ah, double ae)
{
    return {IsoTensor::multiple_of_identity(ah, 1), IsoTensor::multiple_of_identity(ae, 1),
            IsoTensor::multiple_of_identity(1.0, 1)};
}

}  // namespace

TEST(SymTensor, FrobeniusProductMatchesEntries)
{
    std::mt19937_64 rng(1);
    for (int dim = 1; dim <= 3; ++dim) {
        for (int k = 0; k < 50; ++k) {
            const auto a = random_tensor(rng, dim), b = random_tensor(rng, dim);
            double ref = 0.0;
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) ref += a.entry(i, j) * b.entry(i, j);
            }
            EXPECT_NEAR(a.dot(b), ref, 1e-13);
            EXPECT_NEAR(a.dev().trace(), 0.0, 1e-13);
            EXPECT_NEAR((a.dev() + a.vol() - a).norm(), 0.0, 1e-14);
            EXPECT_NEAR(a.dev().dot(a.vol()), 0.0, 1e-13);
        }
    }
}

TEST(SymTensor, SymmetricGradient)
{
    const std::vector<double> g{1.0, 2.0, 4.0, 3.0};
    const auto e = SymTensor::sym_grad(2, g);
    EXPECT_EQ(e[SymTensor::XX], 1.0);
    EXPECT_EQ(e[SymTensor::YY], 3.0);
    EXPECT_EQ(e[SymTensor::XY], 3.0);
    EXPECT_THROW(SymTensor::sym_grad(3, g), InvalidState);
    EXPECT_THROW(SymTensor::scalar(1.0) + SymTensor::zero(2), InvalidState);
    EXPECT_THROW(SymTensor(4), InvalidParameter);
}

TEST(ElasticTensors, InverseAndLowerBounds)
{
    std::mt19937_64 rng(2);
    const ElasticTensors t{{0.7, 0.4}, {1.3, 0.9}, {0.5, 0.25}};
    for (int dim = 1; dim <= 3; ++dim) {
        t.validate(dim);
        for (int k = 0; k < 200; ++k) {
            const auto x = random_tensor(rng, dim);
            EXPECT_NEAR((t.ae.apply_inverse(t.ae.apply(x)) - x).norm(), 0.0, 1e-13);
            EXPECT_GE(t.ah.energy(x), t.a_flat(dim) * x.dot(x) - 1e-13);
            EXPECT_GE(t.ae.energy(x), t.a_flat(dim) * x.dot(x) - 1e-13);
            EXPECT_GE(t.b.energy(x), t.b_flat(dim) * x.dot(x) - 1e-13);
        }
    }
    const ElasticTensors bad{{1.0, -0.1}, {1.0, 1.0}, {1.0, 1.0}};
    EXPECT_THROW(bad.validate(2), InvalidParameter);
    EXPECT_NO_THROW(bad.validate(1));
}

TEST(YieldSurface, BallProjection)
{
    const auto z = YieldSurface::ball(1.0);
    const auto p = z.project(SymTensor::full(2, 0, 0, 0, 0, 0));
    EXPECT_NEAR((p - SymTensor::full(1, 0, 0, 0, 0, 0)).norm(), 0.0, 1e-15);
    const auto inside = SymTensor::plane(0.3, -0.2, 0.1);
    EXPECT_EQ(z.project(inside), inside);
    EXPECT_THROW(YieldSurface::ball(0.0).validate(), InvalidParameter);
    EXPECT_THROW(YieldSurface::cylinder(1.0, -1.0).validate(), InvalidParameter);
}

TEST(YieldSurface, CylinderProjectionMatchesProjectedGradient)
{
    std::mt19937_64 rng(3);
    const IsoTensor identity = IsoTensor::multiple_of_identity(1.0, 3);
    for (auto z : {YieldSurface::cylinder(1.0, 0.8), YieldSurface::cylinder(0.5)}) {
        // Euclidean projection onto the intersection via alternating Dykstra iterations.
        auto euclidean = [&](const SymTensor& x) {
            SymTensor y = x, p = SymTensor::zero(x.dim()), q = SymTensor::zero(x.dim());
            for (int k = 0; k < 200; ++k) {
                SymTensor a = y + p;
                SymTensor dv = a.dev();
                if (dv.norm() > z.sigma_y) dv *= z.sigma_y / dv.norm();
                SymTensor ya = dv + a.vol();
                p = a - ya;
                SymTensor b = ya + q;
                double tr = b.trace();
                if (z.trace_bound) tr = std::clamp(tr, -*z.trace_bound, *z.trace_bound);
                SymTensor yb = b.dev() + SymTensor::identity(x.dim()) * (tr / x.dim());
                q = b - yb;
                y = yb;
            }
            return y;
        };
        for (int k = 0; k < 20; ++k) {
            const auto tau = random_tensor(rng, 3, 1.5);
            const auto ref = projected_gradient(tau, identity, euclidean, 50);
            const auto got = z.project(tau);
            EXPECT_NEAR((got - ref).norm(), 0.0, 1e-9);
            EXPECT_TRUE(z.contains(got));
            EXPECT_NEAR((z.project(got) - got).norm(), 0.0, 1e-15);
        }
    }
}

TEST(YieldSurface, MetricBallProjectionMatchesProjectedGradient)
{
    std::mt19937_64 rng(4);
    const auto z = YieldSurface::ball(1.0);
    const IsoTensor metric{2.0, 0.3};
    auto euclidean = [](const SymTensor& x) { return frobenius_ball(x, 1.0); };
    for (int dim = 1; dim <= 3; ++dim) {
        for (int k = 0; k < 20; ++k) {
            const auto tau = random_tensor(rng, dim, 2.0);
            const auto ref = projected_gradient(tau, metric, euclidean);
            const auto got = z.project(tau, metric);
            EXPECT_NEAR((got - ref).norm(), 0.0, 1e-9);
            EXPECT_LE(got.norm(), 1.0 + 1e-15);
        }
    }
}

TEST(YieldSurface, SupportFunctionIsSupremum)
{
    std::mt19937_64 rng(5);
    const auto ball = YieldSurface::ball(0.7);
    const auto cyl = YieldSurface::cylinder(0.7, 0.4);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_tensor(rng, 2);
        double best_ball = 0.0, best_cyl = 0.0;
        for (int s = 0; s < 4000; ++s) {
            const auto candidate = random_tensor(rng, 2, 2.0);
            best_ball = std::max(best_ball, ball.project(candidate).dot(x));
            best_cyl = std::max(best_cyl, cyl.project(candidate).dot(x));
        }
        EXPECT_LE(best_ball, ball.support(x) + 1e-13);
        EXPECT_GE(best_ball, 0.97 * ball.support(x));
        EXPECT_LE(best_cyl, cyl.support(x) + 1e-13);
        EXPECT_GE(best_cyl, 0.9 * cyl.support(x));
    }
    EXPECT_THROW(YieldSurface::cylinder(1.0).support(SymTensor::identity(2)), FlaggedInconsistency);
    EXPECT_NEAR(YieldSurface::cylinder(1.0).support(SymTensor::plane(1.0, -1.0, 0.0)), std::sqrt(2.0), 1e-15);
}

TEST(Stop, InitialProjection)
{
    const auto z = YieldSurface::ball(1.0);
    EXPECT_EQ(stop_init(SymTensor::zero(1), z), SymTensor::zero(1));
    EXPECT_EQ(stop_init(SymTensor::scalar(3.0), z), SymTensor::scalar(1.0));
    EXPECT_EQ(stop_init(SymTensor::scalar(0.4), z), SymTensor::scalar(0.4));
}

TEST(Stop, ScalarExamples)
{
    const auto t = scalar_tensors(1.0, 1.0);
    const auto z = YieldSurface::ball(1.0);
    PlasticPoint pt{SymTensor::scalar(0.0)};
    auto inc = stop_step(pt, SymTensor::scalar(0.5), t, z);
    EXPECT_EQ(pt.sigma_p[SymTensor::XX], 0.5);
    EXPECT_EQ(inc.d_dissipation, 0.0);

    pt.sigma_p = SymTensor::scalar(0.8);
    inc = stop_step(pt, SymTensor::scalar(0.5), t, z);
    EXPECT_DOUBLE_EQ(pt.sigma_p[SymTensor::XX], 1.0);
    EXPECT_NEAR(inc.d_dp[SymTensor::XX], 0.3, 1e-15);
    EXPECT_NEAR(inc.d_dissipation, 0.3, 1e-15);

    pt.sigma_p = SymTensor::scalar(1.0);
    inc = stop_step(pt, SymTensor::scalar(-0.5), t, z);
    EXPECT_DOUBLE_EQ(pt.sigma_p[SymTensor::XX], 0.5);
    EXPECT_EQ(inc.d_dissipation, 0.0);

    const auto t2 = scalar_tensors(2.0, 1.0);
    PlasticPoint q{SymTensor::scalar(0.1)};
    EXPECT_NEAR(p_eval(SymTensor::scalar(0.3), q, t2)[SymTensor::XX], 0.7, 1e-15);
}

TEST(Stop, ScalarRampReproducesHardeningPlusSaturation)
{
    const auto t = scalar_tensors(1.0, 1.0);
    const auto z = YieldSurface::ball(1.0);
    PlasticPoint pt{stop_init(SymTensor::scalar(0.0), z)};
    const int steps = 300;
    const double dt = 0.01;
    double worst = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const double time = k * dt, prev = (k - 1) * dt;
        stop_step(pt, SymTensor::scalar(time - prev), t, z);
        const double p = p_eval(SymTensor::scalar(time), pt, t)[SymTensor::XX];
        worst = std::max(worst, std::abs(p - (time + std::min(time, 1.0))));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Stop, EnergyResidualExamples)
{
    const auto z = YieldSurface::ball(1.0);
    const auto t = scalar_tensors(1.0, 1.0);
    PlasticPoint pt{SymTensor::scalar(0.3)};
    const auto eps = SymTensor::scalar(0.2);
    auto before = pt.sigma_p;
    auto inc = stop_step(pt, SymTensor::scalar(0.0), t, z);
    EXPECT_NEAR(energy_audit(before, pt, eps, SymTensor::scalar(0.0), inc, t), 0.0, 1e-15);

    const auto d = SymTensor::scalar(0.1);
    before = pt.sigma_p;
    inc = stop_step(pt, d, t, z);
    const double elastic = 0.5 * t.ah.energy(d) + 0.5 * t.ae.apply_inverse(inc.d_sigma_p).dot(inc.d_sigma_p);
    EXPECT_NEAR(energy_audit(before, pt, eps, d, inc, t), elastic, 1e-15);

    const auto t2 = scalar_tensors(2.0, 1.0);
    PlasticPoint sat{SymTensor::scalar(1.0)};
    before = sat.sigma_p;
    inc = stop_step(sat, SymTensor::scalar(0.5), t2, z);
    EXPECT_NEAR(energy_audit(before, sat, SymTensor::scalar(1.7), SymTensor::scalar(0.5), inc, t2),
                0.5 * 2.0 * 0.25, 1e-14);
}

TEST(Stop, EnergyResidualNonnegativeAndQuadratic)
{
    std::mt19937_64 rng(6);
    const ElasticTensors t{{0.5, 0.3}, {1.2, 0.8}, {1.0, 1.0}};
    for (auto z : {YieldSurface::ball(0.6), YieldSurface::cylinder(0.6, 0.5)}) {
        for (int k = 0; k < 50; ++k) {
            const auto eps = random_tensor(rng, 3);
            const auto dir = random_tensor(rng, 3);
            const auto start = z.project(random_tensor(rng, 3));
            double prev = -1.0;
            for (double s : {2e-3, 1e-3, 5e-4, 2.5e-4}) {
                PlasticPoint pt{start};
                const auto inc = stop_step(pt, dir * s, t, z);
                const double res = energy_audit(start, pt, eps, dir * s, inc, t);
                EXPECT_GE(res, -1e-12);
                EXPECT_LE(res, 10.0 * s * s * dir.dot(dir));
                if (prev > 1e-20) {
                    EXPECT_NEAR(prev / res, 4.0, 0.1);
                }
                prev = res;
                EXPECT_TRUE(z.contains(pt.sigma_p));
            }
        }
    }
}

TEST(Stop, RateBoundAndScalarNonexpansive)
{
    std::mt19937_64 rng(7);
    const ElasticTensors t{{0.4, 0.2}, IsoTensor::multiple_of_identity(1.0, 2), {1.0, 1.0}};
    const auto z = YieldSurface::ball(0.5);
    PlasticPoint pt{SymTensor::zero(2)};
    SymTensor eps = SymTensor::zero(2);
    for (int k = 0; k < 500; ++k) {
        const auto d = random_tensor(rng, 2, 0.2);
        const auto p_old = p_eval(eps, pt, t);
        stop_step(pt, d, t, z);
        eps += d;
        const double bound = t.ah.max_eigen(2) * d.norm() + d.norm();
        EXPECT_LE((p_eval(eps, pt, t) - p_old).norm(), bound + 1e-14);
    }
    const auto ts = scalar_tensors(1.0, 1.0);
    PlasticPoint s{SymTensor::scalar(0.0)};
    // dyadic increments keep the scalar arithmetic exact
    std::uniform_int_distribution<int> u(-700, 700);
    for (int k = 0; k < 1000; ++k) {
        const double d = std::ldexp(static_cast<double>(u(rng)), -10);
        const double old = s.sigma_p[SymTensor::XX];
        stop_step(s, SymTensor::scalar(d), ts, YieldSurface::ball(1.0));
        EXPECT_LE(std::abs(s.sigma_p[SymTensor::XX] - old), std::abs(d));
    }
}

TEST(Stop, DiscreteMonotonicity)
{
    std::mt19937_64 rng(8);
    const ElasticTensors t{{0.5, 0.3}, {1.5, 0.6}, {1.0, 1.0}};
    const auto z = YieldSurface::ball(0.8);
    for (int trial = 0; trial < 20; ++trial) {
        PlasticPoint a{z.project(random_tensor(rng, 3))}, b{z.project(random_tensor(rng, 3))};
        SymTensor ea = random_tensor(rng, 3), eb = random_tensor(rng, 3);
        auto energy = [&] {
            const auto de = ea - eb;
            const auto ds = a.sigma_p - b.sigma_p;
            return 0.5 * (t.ah.energy(de) + t.ae.apply_inverse(ds).dot(ds));
        };
        for (int k = 0; k < 100; ++k) {
            const auto da = random_tensor(rng, 3, 0.1), db = random_tensor(rng, 3, 0.1);
            const double before = energy();
            stop_step(a, da, t, z);
            stop_step(b, db, t, z);
            ea += da;
            eb += db;
            const double lhs = (p_eval(ea, a, t) - p_eval(eb, b, t)).dot(da - db);
            EXPECT_GE(lhs - (energy() - before), -1e-12);
        }
    }
}

TEST(Stop, LipschitzInInputVariation)
{
    std::mt19937_64 rng(9);
    const ElasticTensors t{{0.5, 0.3}, {1.5, 0.6}, {1.0, 1.0}};
    const auto z = YieldSurface::ball(0.8);
    const int d = 3;
    const double ae_ratio = std::sqrt(t.ae.max_eigen(d) / t.ae.min_eigen(d));
    const double c = t.ah.max_eigen(d) + ae_ratio * t.ae.max_eigen(d) + 1.0;
    for (int trial = 0; trial < 20; ++trial) {
        SymTensor e1 = random_tensor(rng, d), e2 = e1 + random_tensor(rng, d, 0.05);
        PlasticPoint a{stop_init(e1, z)}, b{stop_init(e2, z)};
        double variation = (e1 - e2).norm();
        for (int k = 0; k < 200; ++k) {
            const auto d1 = random_tensor(rng, d, 0.1);
            const auto d2 = d1 + random_tensor(rng, d, 0.01);
            variation += (d1 - d2).norm();
            stop_step(a, d1, t, z);
            stop_step(b, d2, t, z);
            e1 += d1;
            e2 += d2;
            EXPECT_LE((p_eval(e1, a, t) - p_eval(e2, b, t)).norm(), c * variation);
        }
    }
}

TEST(Stop, ChainConvergesLinearlyToSweepingOracle)
{
    std::mt19937_64 rng(10);
    const double c = 2.0, radius = 0.5;
    const ElasticTensors t{IsoTensor::multiple_of_identity(1.0, 2), IsoTensor::multiple_of_identity(c, 2),
                           {1.0, 1.0}};
    const auto z = YieldSurface::ball(radius);
    std::vector<double> mean_error;
    std::vector<std::vector<SymTensor>> paths;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<SymTensor> path{SymTensor::zero(2)};
        for (int k = 0; k < 6; ++k) path.push_back(path.back() + random_tensor(rng, 2, 0.4));
        paths.push_back(path);
    }
    std::vector<SymTensor> oracle;
    for (const auto& path : paths) oracle.push_back(sweeping_oracle(SymTensor::zero(2), path, c, radius, 400000));
    for (int n : {10, 20, 40, 80}) {
        double err = 0.0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            PlasticPoint pt{SymTensor::zero(2)};
            for (std::size_t k = 1; k < paths[i].size(); ++k) {
                const auto d = (paths[i][k] - paths[i][k - 1]) * (1.0 / n);
                for (int s = 0; s < n; ++s) stop_step(pt, d, t, z);
            }
            err += (pt.sigma_p - oracle[i]).norm() / paths.size();
        }
        mean_error.push_back(err);
    }
    for (std::size_t k = 1; k < mean_error.size(); ++k) {
        const double ratio = mean_error[k - 1] / mean_error[k];
        EXPECT_GT(ratio, 1.6);
        EXPECT_LT(ratio, 2.6);
    }
}

TEST(Stop, PiecewiseMonotoneScalarIsExact)
{
    // For a scalar input each monotone segment is reproduced exactly by one step.
    const auto t = scalar_tensors(1.0, 1.0);
    const auto z = YieldSurface::ball(1.0);
    PlasticPoint coarse{SymTensor::scalar(0.0)}, fine{SymTensor::scalar(0.0)};
    const std::vector<double> pts{0.0, 2.0, -0.5, 0.25, -3.0, 1.0};
    for (std::size_t k = 1; k < pts.size(); ++k) {
        stop_step(coarse, SymTensor::scalar(pts[k] - pts[k - 1]), t, z);
        for (int s = 0; s < 1000; ++s) stop_step(fine, SymTensor::scalar((pts[k] - pts[k - 1]) / 1000), t, z);
        EXPECT_NEAR(coarse.sigma_p[SymTensor::XX], fine.sigma_p[SymTensor::XX], 1e-12);
    }
}
