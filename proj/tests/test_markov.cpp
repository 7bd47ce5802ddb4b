#include <doctest.h>

#include <cmath>

#include "mvop/errors.hpp"
#include "mvop/markov.hpp"
#include "oracles.hpp"

using namespace mvop;

namespace {

Basis sym2() { return rescale_last(build_basis(Weights({0.5, 0.5}))); }

PoissonQueueSpec half_shuffle_queue() {
    // |xi| = 1/2 pointing at the last vertex: omega = (0,1)
    return PoissonQueueSpec::make(sym2(), {1.0, 1.0}, {0.0, 0.5});
}

NbBranchSpec feasible_branch(const Basis& b, double theta, double xin,
                             const std::vector<double>& omega) {
    auto pc = conditional_type_law(b, omega);
    auto bm = map_to_branching(theta, xin, b.p, pc);
    return NbBranchSpec::make(1.5, bm.beta, bm.kappa, bm.q, b.p);
}

}  // namespace

TEST_CASE("queue pgf endpoints and exact enumeration") {
    Basis b = sym2();
    SUBCASE("pure type shuffle at |xi| = 1 keeps the total") {
        auto spec = PoissonQueueSpec::make(b, {1.0, 1.0}, {0.5, 0.5});
        CHECK(queue_pgf(spec, {0, 0}, {0.0, 0.0}) == doctest::Approx(1.0));
        CHECK(queue_pgf(spec, {2, 0}, {0.0, 0.0}) == doctest::Approx(0.0));
        CHECK(queue_pgf(spec, {2, 1}, {0.7, 0.7}) == doctest::Approx(std::pow(0.7, 3)));
    }
    SUBCASE("independence at xi = 0") {
        auto spec = PoissonQueueSpec::make(b, {1.0, 1.0}, {0.0, 0.0});
        for (const std::vector<int>& x : {std::vector<int>{0, 0}, {3, 1}}) {
            double v = queue_pgf(spec, x, {0.3, 0.8});
            CHECK(v == doctest::Approx(std::exp(1.0 * (0.3 - 1.0) + 1.0 * (0.8 - 1.0))));
        }
    }
    SUBCASE("pgf equals the enumerated one-step sum") {
        auto spec = half_shuffle_queue();
        std::vector<int> bounds = {24, 24};
        for (const std::vector<int>& x : {std::vector<int>{1, 0}, {2, 3}, {0, 4}}) {
            auto laws = one_step_laws(spec, {x}, bounds);
            for (const std::vector<double>& t :
                 {std::vector<double>{0.0, 1.0}, {0.5, 0.25}, {1.0, 1.0}}) {
                KahanSum acc;
                std::vector<int> y(2, 0);
                for (y[0] = 0; y[0] <= bounds[0]; ++y[0])
                    for (y[1] = 0; y[1] <= bounds[1]; ++y[1])
                        acc.add(laws[0].v[laws[0].offset(y)] * std::pow(t[0], y[0]) *
                                std::pow(t[1], y[1]));
                CHECK(std::abs(acc.value() - queue_pgf(spec, x, t)) < 1e-12);
            }
        }
    }
    SUBCASE("infeasible conditional law is rejected") {
        Basis bad = rescale_last(build_basis(Weights({0.3, 0.7}), {{{0.0, 1.0}}}));
        CHECK_THROWS_AS(PoissonQueueSpec::make(bad, {0.3, 0.7}, {0.5, 0.0}), InfeasibleKernel);
    }
}

TEST_CASE("queue stationarity, reversibility and eigenfunctions") {
    auto spec = half_shuffle_queue();
    DistSpec pi = spec.stationary();
    LatticeSlab slab = slab_for(pi, 1e-10);
    auto xs = slab_points(slab);
    std::vector<int> bounds = slab.bounds;
    for (int& v : bounds) v += 4;
    auto laws = one_step_laws(spec, xs, bounds);

    SUBCASE("one step preserves the stationary law on the interior") {
        std::vector<double> flow(laws[0].size(), 0.0);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double px = pmf(pi, xs[k]);
            for (std::size_t o = 0; o < laws[k].v.size(); ++o) flow[o] += px * laws[k].v[o];
        }
        double worst = 0.0;
        std::vector<int> y(2, 0);
        for (y[0] = 0; y[0] <= slab.bounds[0]; ++y[0])
            for (y[1] = 0; y[1] <= slab.bounds[1]; ++y[1])
                worst = std::max(worst, std::abs(flow[laws[0].offset(y)] - pmf(pi, y)));
        CHECK(worst < 1e-8);
    }
    SUBCASE("detailed balance on a small window") {
        auto index_of = [&](const std::vector<int>& x) {
            for (std::size_t k = 0; k < xs.size(); ++k)
                if (xs[k] == x) return int(k);
            return -1;
        };
        for (int x0 = 0; x0 <= 6; ++x0)
            for (int x1 = 0; x1 + x0 <= 6; ++x1)
                for (int y0 = 0; y0 <= 6; ++y0)
                    for (int y1 = 0; y1 + y0 <= 6; ++y1) {
                        std::vector<int> x = {x0, x1}, y = {y0, y1};
                        int xi = index_of(x), yi = index_of(y);
                        REQUIRE(xi >= 0);
                        REQUIRE(yi >= 0);
                        double lhs = pmf(pi, x) * laws[std::size_t(xi)].v[laws[0].offset(y)];
                        double rhs = pmf(pi, y) * laws[std::size_t(yi)].v[laws[0].offset(x)];
                        CHECK(std::abs(lhs - rhs) < 1e-10);
                    }
    }
    SUBCASE("eigenfunction identity with product eigenvalues") {
        PolySystem sys = PolySystem::poisson_charlier(spec.mu, spec.basis);
        std::vector<std::vector<int>> grid = {{0, 0}, {1, 0}, {0, 2}, {2, 1}, {3, 2}};
        auto rows = discrete_eigen_check(spec, spec.basis, sys, 3, grid, bounds);
        for (const auto& row : rows) {
            CAPTURE(row.n);
            CHECK(row.residual < 1e-8);
        }
        for (const auto& row : rows)
            if (row.n == MultiIndex{0, 1}) CHECK(row.value_theory == doctest::Approx(0.5));
    }
    SUBCASE("diagonal atom fixes the state distributionally") {
        auto fixed = PoissonQueueSpec::make(sym2(), {1.0, 1.0}, {0.0, 1.0});
        std::vector<int> x = {2, 1};
        auto law = one_step_laws(fixed, {x}, bounds)[0];
        CHECK(law.v[law.offset(x)] == doctest::Approx(1.0));
    }
    SUBCASE("two-step law squares the eigenvalues") {
        PolySystem sys = PolySystem::poisson_charlier(spec.mu, spec.basis);
        MultiIndex n = {0, 1};
        std::vector<int> x = {2, 0};
        auto law1 = one_step_laws(spec, {x}, bounds)[0];
        std::vector<std::vector<int>> ys;
        std::vector<int> y(2, 0);
        for (y[0] = 0; y[0] <= bounds[0]; ++y[0])
            for (y[1] = 0; y[1] <= bounds[1]; ++y[1])
                if (law1.v[law1.offset(y)] > 1e-14) ys.push_back(y);
        auto laws2 = one_step_laws(spec, ys, bounds);
        KahanSum acc;
        for (std::size_t k = 0; k < ys.size(); ++k) {
            KahanSum inner;
            std::vector<int> z(2, 0);
            for (z[0] = 0; z[0] <= bounds[0]; ++z[0])
                for (z[1] = 0; z[1] <= bounds[1]; ++z[1]) {
                    std::vector<double> zr(z.begin(), z.end());
                    inner.add(laws2[k].v[laws2[k].offset(z)] * mv_eval(sys, n, zr));
                }
            acc.add(law1.v[law1.offset(ys[k])] * inner.value());
        }
        std::vector<double> xr(x.begin(), x.end());
        double rho = spec.rho(n);
        CHECK(acc.value() == doctest::Approx(rho * rho * mv_eval(sys, n, xr)).epsilon(1e-8));
    }
}

TEST_CASE("branching kernel laws") {
    Basis b = sym2();
    SUBCASE("beta = 1 relabels individuals without immigration") {
        auto spec = NbBranchSpec::make(1.5, 1.0, 0.0, {{0.3, 0.7}, {0.6, 0.4}}, b.p);
        std::vector<int> x = {1, 1};
        double got = nb_branch_pgf(spec, x, {0.2, 0.9});
        double want = (0.3 * 0.2 + 0.7 * 0.9) * (0.6 * 0.2 + 0.4 * 0.9);
        CHECK(got == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("beta = 0 regenerates the stationary law") {
        auto spec = feasible_branch(b, 0.7, 0.0, {0.5, 0.5});
        CHECK(spec.beta == doctest::Approx(0.0));
        DistSpec pi = spec.stationary();
        CHECK(pi.theta == doctest::Approx(0.7).epsilon(1e-12));
        std::vector<double> t = {0.4, 0.9};
        double target =
            std::pow(1.0 - 0.7 * (0.5 * (t[0] - 1.0) + 0.5 * (t[1] - 1.0)), -1.5);
        CHECK(nb_branch_pgf(spec, {3, 1}, t) == doctest::Approx(target).epsilon(1e-12));
    }
    SUBCASE("pgf equals the enumerated one-step sum") {
        auto spec = feasible_branch(b, 0.7, 0.5, {0.3, 0.7});
        std::vector<int> bounds = {42, 42};
        std::vector<int> x = {2, 1};
        auto law = one_step_laws(spec, {x}, bounds)[0];
        CHECK(law.deficiency < 1e-11);
        for (const std::vector<double>& t : {std::vector<double>{0.5, 0.25}, {0.9, 0.1}}) {
            KahanSum acc;
            std::vector<int> y(2, 0);
            for (y[0] = 0; y[0] <= bounds[0]; ++y[0])
                for (y[1] = 0; y[1] <= bounds[1]; ++y[1])
                    acc.add(law.v[law.offset(y)] * std::pow(t[0], y[0]) * std::pow(t[1], y[1]));
            CHECK(std::abs(acc.value() - nb_branch_pgf(spec, x, t)) < 1e-11);
        }
    }
    SUBCASE("stationarity, detailed balance and eigenfunctions") {
        auto spec = feasible_branch(b, 0.7, 0.5, {0.3, 0.7});
        DistSpec pi = spec.stationary();
        LatticeSlab slab = slab_for(pi, 1e-9);
        auto xs = slab_points(slab);
        std::vector<int> bounds = slab.bounds;
        for (int& v : bounds) v += 6;
        auto laws = one_step_laws(spec, xs, bounds);

        std::vector<double> flow(laws[0].size(), 0.0);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double px = pmf(pi, xs[k]);
            for (std::size_t o = 0; o < laws[k].v.size(); ++o) flow[o] += px * laws[k].v[o];
        }
        double worst = 0.0;
        std::vector<int> y(2, 0);
        for (y[0] = 0; y[0] <= slab.total_bound; ++y[0])
            for (y[1] = 0; y[0] + y[1] <= slab.total_bound; ++y[1])
                worst = std::max(worst, std::abs(flow[laws[0].offset(y)] - pmf(pi, y)));
        CHECK(worst < 1e-8);

        auto index_of = [&](const std::vector<int>& x) {
            for (std::size_t k = 0; k < xs.size(); ++k)
                if (xs[k] == x) return int(k);
            return -1;
        };
        double db = 0.0;
        for (int x0 = 0; x0 <= 5; ++x0)
            for (int x1 = 0; x1 + x0 <= 5; ++x1)
                for (int y0 = 0; y0 <= 5; ++y0)
                    for (int y1 = 0; y1 + y0 <= 5; ++y1) {
                        std::vector<int> xv = {x0, x1}, yv = {y0, y1};
                        int xi = index_of(xv), yi = index_of(yv);
                        double lhs = pmf(pi, xv) * laws[std::size_t(xi)].v[laws[0].offset(yv)];
                        double rhs = pmf(pi, yv) * laws[std::size_t(yi)].v[laws[0].offset(xv)];
                        db = std::max(db, std::abs(lhs - rhs));
                    }
        CHECK(db < 1e-10);

        PolySystem sys = PolySystem::meixner(spec.alpha, spec.theta(), b);
        std::vector<std::vector<int>> grid = {{0, 0}, {1, 0}, {0, 2}, {2, 1}};
        auto rows = discrete_eigen_check(spec, b, sys, 3, grid, bounds);
        for (const auto& row : rows) {
            CAPTURE(row.n);
            CHECK(row.residual < 1e-8);
        }
        for (const auto& row : rows) {
            if (row.n == MultiIndex{1, 0}) CHECK(row.value_theory == doctest::Approx(0.5));
            if (row.n == MultiIndex{0, 1})
                CHECK(row.value_theory == doctest::Approx(0.5 * 0.4).epsilon(1e-12));
        }
    }
    SUBCASE("spec validation") {
        CHECK_THROWS_AS(NbBranchSpec::make(1.0, 0.5, 0.6, {{1.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5}),
                        InfeasibleKernel);
        CHECK_THROWS_AS(NbBranchSpec::make(1.0, 0.5, 0.2, {{0.9, 0.0}, {0.0, 1.0}}, {0.5, 0.5}),
                        InfeasibleKernel);
    }
}

TEST_CASE("Gaussian autoregression") {
    Basis b = sym2();
    std::vector<double> tau = {1.0, 1.0};
    SUBCASE("perfect correlation copies the state") {
        auto spec = GaussArSpec::make(b, tau, {1.0, 1.0});
        CounterRng rng(1, 0);
        std::vector<double> x = {0.7, -0.2};
        auto y = gauss_ar_step(spec, x, rng);
        CHECK(y[0] == doctest::Approx(x[0]).epsilon(1e-12));
        CHECK(y[1] == doctest::Approx(x[1]).epsilon(1e-12));
    }
    SUBCASE("zero correlation regenerates the stationary law") {
        auto spec = GaussArSpec::make(b, tau, {0.0, 0.0});
        auto m = gauss_ar_cond_mean(spec, {5.0, -3.0});
        CHECK(m[0] == doctest::Approx(0.0));
        CHECK(m[1] == doctest::Approx(0.0));
        auto cov = gauss_ar_cond_cov(spec);
        CHECK(cov[0][0] == doctest::Approx(1.0));
        CHECK(cov[0][1] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("conditional mgf equals the cross-covariance form") {
        auto spec = GaussArSpec::make(b, tau, {0.8, -0.3});
        auto V = normal_cross_covariance(b, tau, spec.xi);
        CounterRng rng(4, 4);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> x = {2.0 * rng.next_normal(), 2.0 * rng.next_normal()};
            std::vector<double> t = {0.5 * rng.next_normal(), 0.5 * rng.next_normal()};
            // tau = (1,1): mean V x, covariance I - V^2
            double quad = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double v2 = 0.0;
                    for (int k = 0; k < 2; ++k)
                        v2 += V[std::size_t(i)][std::size_t(k)] * V[std::size_t(k)][std::size_t(j)];
                    quad += t[std::size_t(i)] * ((i == j ? 1.0 : 0.0) - v2) * t[std::size_t(j)];
                }
            double lin = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    lin += t[std::size_t(i)] * V[std::size_t(i)][std::size_t(j)] * x[std::size_t(j)];
            double want = std::exp(0.5 * quad + lin);
            CHECK(gauss_ar_cond_mgf(spec, x, t) == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("empirical hat correlations at a mixed atom") {
        auto spec = GaussArSpec::make(b, tau, {1.0, 0.0});
        long n = 40000;
        KahanSum c0, c1, v1;
        for (long s = 0; s < n; ++s) {
            CounterRng rng(900, std::uint64_t(s));
            std::vector<double> x = {rng.next_normal(), rng.next_normal()};
            auto y = gauss_ar_step(spec, x, rng);
            auto xh = hat_coords(b, x), yh = hat_coords(b, y);
            c0.add(xh[0] * yh[0] / (2.0 * b.a[0]));
            c1.add(xh[1] * yh[1] / (2.0 * b.a[1]));
            v1.add(yh[1] * yh[1] / (2.0 * b.a[1]));
        }
        CHECK(std::abs(c0.value() / n - 1.0) < 4.0 / std::sqrt(double(n)));
        CHECK(std::abs(c1.value() / n - 0.0) < 4.0 / std::sqrt(double(n)));
        CHECK(std::abs(v1.value() / n - 1.0) < 8.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("continuous-time Poisson generator") {
    Basis b = sym2();
    std::vector<double> mu = {1.0, 1.0};
    SUBCASE("no type change: independent single-type flows") {
        auto spec = CtPoissonSpec::make(b, mu, 1.0, {});
        LatticeSlab slab;
        slab.bounds = {9, 9};
        auto gen = build_ct_generator(spec, slab);
        for (const auto& row : gen.rows)
            for (const auto& mv : row) CHECK((mv.from < 0 || mv.to < 0));
        CHECK(lumped_rate_residual(gen, 2.0, 0.0, 1.0) < 1e-12);
        CHECK(generator_stationarity_residual(gen, spec.stationary()) < 1e-12);
    }
    SUBCASE("count eigenfunction balances immigration against deaths") {
        auto spec = CtPoissonSpec::make(b, mu, 1.0, {});
        LatticeSlab slab;
        slab.bounds = {9, 9};
        auto gen = build_ct_generator(spec, slab);
        PolySystem sys = PolySystem::poisson_charlier(mu, b);
        auto idx = indices_up_to(2, 4);
        std::vector<double> lam;
        for (const auto& n : idx) lam.push_back(spec.lambda_theory(n));
        auto rows = spectral_check(gen, sys, 4, lam);
        for (const auto& row : rows) {
            CAPTURE(row.n);
            CHECK(row.residual < 1e-10);
            CHECK(row.value_theory == doctest::Approx(double(degree_of(row.n))));
        }
    }
    SUBCASE("type-change rates shift the contrast eigenvalues") {
        double g = 0.35;
        auto spec = CtPoissonSpec::make(b, mu, 1.0, {g});
        LatticeSlab slab;
        slab.bounds = {9, 9};
        auto gen = build_ct_generator(spec, slab);
        PolySystem sys = PolySystem::poisson_charlier(mu, b);
        auto idx = indices_up_to(2, 4);
        std::vector<double> lam;
        for (const auto& n : idx) lam.push_back(spec.lambda_theory(n));
        auto rows = spectral_check(gen, sys, 4, lam);
        for (const auto& row : rows) {
            CAPTURE(row.n);
            CHECK(row.residual < 1e-8);
            CHECK(row.value_theory ==
                  doctest::Approx(degree_of(row.n) + 2.0 * g * row.n[1]).epsilon(1e-12));
        }
        CHECK(lumped_rate_residual(gen, 2.0, 0.0, 1.0) < 1e-12);
        CHECK(generator_stationarity_residual(gen, spec.stationary()) < 1e-10);
    }
}

TEST_CASE("continuous-time Meixner generator") {
    Basis b = sym2();
    double alpha = 1.5, theta = 0.7, nu = 1.0;
    SUBCASE("insufficient type-change budget is rejected") {
        CHECK_THROWS_AS(build_ct_generator(CtMeixnerSpec::make(b, alpha, theta, nu, {0.1}),
                                           LatticeSlab{{6, 6}, -1, -1, 0.0}),
                        NegativeRate);
    }
    SUBCASE("rates, stationarity and measured eigenvalues") {
        double g = 1.0;
        auto spec = CtMeixnerSpec::make(b, alpha, theta, nu, {g});
        LatticeSlab slab;
        slab.bounds = {11, 11};
        auto gen = build_ct_generator(spec, slab);
        CHECK(lumped_rate_residual(gen, theta * nu * alpha, theta * nu, nu * (1.0 + theta)) <
              1e-12);
        CHECK(generator_stationarity_residual(gen, spec.stationary()) < 1e-10);
        PolySystem sys = PolySystem::meixner(alpha, theta, b);
        auto idx = indices_up_to(2, 4);
        std::vector<double> lam;
        for (const auto& n : idx) lam.push_back(spec.lambda_theory(n));
        auto rows = spectral_check(gen, sys, 4, lam);
        for (const auto& row : rows) {
            CAPTURE(row.n);
            CHECK(row.residual < 1e-8);
            if (degree_of(row.n) > 0)
                CHECK(row.value_measured == doctest::Approx(row.value_theory).epsilon(1e-8));
        }
    }
}
