#include <doctest.h>

#include <cmath>

#include "mvop/basis.hpp"
#include "mvop/errors.hpp"
#include "oracles.hpp"

using namespace mvop;

namespace {

Basis symmetric2() { return build_basis(Weights({0.5, 0.5})); }

// binomial(2, 1/2) weights carry a hypergroup basis: states are the counts
// 0,1,2 with weights (1/4,1/2,1/4) and rows from the scaled count polynomials
Basis binomial3() {
    Weights w({0.25, 0.5, 0.25});
    std::vector<std::vector<double>> seeds = {{-1.0, 0.0, 1.0}, {1.0, -1.0, 1.0}};
    return build_basis(w, seeds);
}

}  // namespace

TEST_CASE("build_basis symmetric two-state") {
    Basis b = symmetric2();
    CHECK(b.u[0] == std::vector<double>{1.0, 1.0});
    CHECK(b.u[1][0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(b.u[1][1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.a[0] == doctest::Approx(1.0));
    CHECK(b.a[1] == doctest::Approx(1.0));
    CHECK(b.orthogonality_residual() < 1e-14);
}

TEST_CASE("build_basis asymmetric with requested last entry") {
    // seed (0,1): after projection and rescaling the row is (-p2/p1, 1)
    // with squared norm p2/p1 (direct 2x2 solve: sum u_j p_j = 0, u_2 = 1)
    double p1 = 0.3, p2 = 0.7;
    Basis b = rescale_last(build_basis(Weights({p1, p2}), {{{0.0, 1.0}}}));
    CHECK(b.u[1][0] == doctest::Approx(-p2 / p1).epsilon(1e-13));
    CHECK(b.u[1][1] == doctest::Approx(1.0));
    CHECK(b.a[1] == doctest::Approx(p2 / p1).epsilon(1e-13));
    CHECK(b.scaled_last);
}

TEST_CASE("build_basis rejects bad weights and degenerate seeds") {
    CHECK_THROWS_AS(Weights({0.5, 0.0, 0.5}), ZeroWeight);
    CHECK_THROWS_AS(Weights({0.5, -0.1, 0.6}), ZeroWeight);
    CHECK_THROWS_AS(Weights({0.5, 0.6}), ZeroWeight);
    // seed collinear with the constant vector
    CHECK_THROWS_AS(build_basis(Weights({0.5, 0.5}), {{{2.0, 2.0}}}), DegenerateSeed);
    CHECK_THROWS_AS(build_basis(Weights({0.25, 0.25, 0.5}),
                                {{{1.0, -1.0, 0.0}, {2.0, -2.0, 0.0}}}),
                    DegenerateSeed);
}

TEST_CASE("orthogonality holds for random weights, d in 2..4") {
    CounterRng rng(2024, 7);
    for (int d = 2; d <= 4; ++d)
        for (int rep = 0; rep < 20; ++rep) {
            Basis b = build_basis(Weights(oracles::random_weights(d, rng)));
            CHECK(b.orthogonality_residual() < 1e-10);
        }
}

TEST_CASE("rescale_last") {
    SUBCASE("fixed point") {
        Basis b = rescale_last(symmetric2());
        CHECK(b.u[1][0] == doctest::Approx(-1.0));
        CHECK(b.u[1][1] == doctest::Approx(1.0));
        CHECK(b.a[1] == doctest::Approx(1.0));
    }
    SUBCASE("rescales rows and norms") {
        Basis b = symmetric2();
        for (double& v : b.u[1]) v *= 2.0;  // (-2, 2)
        b.a[1] = 4.0;
        Basis r = rescale_last(b);
        CHECK(r.u[1][0] == doctest::Approx(-1.0));
        CHECK(r.u[1][1] == doctest::Approx(1.0));
        CHECK(r.a[1] == doctest::Approx(1.0));
        CHECK(r.orthogonality_residual() < 1e-14);
    }
    SUBCASE("zero last entry is unscalable") {
        Basis b = build_basis(Weights({1.0 / 3, 1.0 / 3, 1.0 / 3}));
        // first contrast is (-1, 1, 0) under uniform weights
        CHECK(b.u[1][2] == doctest::Approx(0.0));
        CHECK_THROWS_AS(rescale_last(b), UnscalableBasis);
    }
    SUBCASE("row span unchanged: projections agree before and after") {
        CounterRng rng(11, 0);
        Basis b = build_basis(Weights({0.2, 0.5, 0.3}));
        Basis r = rescale_last(b);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> v = {rng.next_normal(), rng.next_normal(), rng.next_normal()};
            // projection onto the span of rows 1.. under the p inner product
            auto project = [&](const Basis& basis) {
                std::vector<double> out(3, 0.0);
                for (int rr = 1; rr < 3; ++rr) {
                    double num = 0.0;
                    for (int j = 0; j < 3; ++j)
                        num += v[std::size_t(j)] * basis.u[std::size_t(rr)][std::size_t(j)] *
                               basis.p[std::size_t(j)];
                    for (int j = 0; j < 3; ++j)
                        out[std::size_t(j)] +=
                            num / basis.a[std::size_t(rr)] * basis.u[std::size_t(rr)][std::size_t(j)];
                }
                return out;
            };
            auto pb = project(b), pr = project(r);
            for (int j = 0; j < 3; ++j)
                CHECK(pb[std::size_t(j)] == doctest::Approx(pr[std::size_t(j)]).epsilon(1e-10));
        }
    }
}

TEST_CASE("hypergroup tensor of the symmetric two-state basis") {
    auto t = hypergroup_tensor(rescale_last(symmetric2()));
    // frozen two-term sums 1 + u_j u_k u_l
    CHECK(t.at(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.at(0, 0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.at(0, 1, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.at(1, 1, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.feasible);
}

TEST_CASE("hypergroup marginal identity for any basis") {
    CounterRng rng(5, 1);
    for (int d = 2; d <= 4; ++d)
        for (int rep = 0; rep < 5; ++rep) {
            Basis b = build_basis(Weights(oracles::random_weights(d, rng)));
            auto t = hypergroup_tensor(b);
            for (int l = 0; l < d; ++l) {
                KahanSum s;
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        s.add(b.p[std::size_t(j)] * b.p[std::size_t(k)] * t.at(j, k, l));
                CHECK(std::abs(s.value() - 1.0) < 1e-10);
            }
        }
}

TEST_CASE("hypergroup feasibility verdicts") {
    // triple-loop oracle over the binomial(2, 1/2) basis: all entries >= 0
    Basis b = binomial3();
    CHECK(b.orthogonality_residual() < 1e-14);
    auto t = hypergroup_tensor(b);
    double manual_min = 1e300;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
                double s = 0.0;
                for (int r = 0; r < 3; ++r)
                    s += b.u[std::size_t(r)][std::size_t(j)] * b.u[std::size_t(r)][std::size_t(k)] *
                         b.u[std::size_t(r)][std::size_t(l)] / b.a[std::size_t(r)];
                manual_min = std::min(manual_min, s);
                CHECK(t.at(j, k, l) == doctest::Approx(s).epsilon(1e-12));
            }
    CHECK(t.feasible);
    CHECK(manual_min >= -1e-12);

    // an asymmetric two-state basis scaled at the lighter state fails
    Basis bad = rescale_last(build_basis(Weights({0.3, 0.7}), {{{0.0, 1.0}}}));
    auto tb = hypergroup_tensor(bad);
    CHECK_FALSE(tb.feasible);
    CHECK(tb.min_entry < -1e-3);
}

TEST_CASE("two-point law") {
    Basis b = rescale_last(symmetric2());
    SUBCASE("zero theta gives independence") {
        auto m = lancaster_2point(b, {0.0});
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                CHECK(m[std::size_t(j)][std::size_t(k)] == doctest::Approx(0.25));
    }
    SUBCASE("vertex omega puts all mass on the diagonal") {
        auto theta = theta_from_omega(b, {0.0, 1.0});
        CHECK(theta[0] == doctest::Approx(1.0));
        auto m = lancaster_2point(b, theta, true);
        CHECK(m[0][0] == doctest::Approx(0.5));
        CHECK(m[0][1] == doctest::Approx(0.0));
        CHECK(m[1][0] == doctest::Approx(0.0));
        CHECK(m[1][1] == doctest::Approx(0.5));
    }
    SUBCASE("vertex omega reproduces p_j p_k s(j,k,m)") {
        Basis b3 = binomial3();
        auto t = hypergroup_tensor(b3);
        for (int m0 = 0; m0 < 3; ++m0) {
            std::vector<double> omega(3, 0.0);
            omega[std::size_t(m0)] = 1.0;
            auto law = lancaster_2point(b3, theta_from_omega(b3, omega));
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    CHECK(law[std::size_t(j)][std::size_t(k)] ==
                          doctest::Approx(b3.p[std::size_t(j)] * b3.p[std::size_t(k)] *
                                          t.at(j, k, m0))
                              .epsilon(1e-12));
        }
    }
    SUBCASE("rows sum to p for random omega") {
        CounterRng rng(17, 3);
        Basis b3 = binomial3();
        for (int rep = 0; rep < 10; ++rep) {
            auto omega = oracles::random_weights(3, rng);
            auto m = lancaster_2point(b3, theta_from_omega(b3, omega));
            for (int j = 0; j < 3; ++j) {
                double row = 0.0;
                for (int k = 0; k < 3; ++k) row += m[std::size_t(j)][std::size_t(k)];
                CHECK(std::abs(row - b3.p[std::size_t(j)]) < 1e-12);
            }
        }
    }
    SUBCASE("negative cell reported when requested") {
        Basis bad = rescale_last(build_basis(Weights({0.3, 0.7}), {{{0.0, 1.0}}}));
        auto theta = theta_from_omega(bad, {1.0, 0.0});
        CHECK_THROWS_AS(lancaster_2point(bad, theta, true), NegativeCell);
    }
}
