#include <doctest.h>

#include <cmath>

#include "mvop/errors.hpp"
#include "mvop/polysys.hpp"
#include "mvop/series.hpp"
#include "oracles.hpp"

using namespace mvop;

namespace {

Basis sym2() { return rescale_last(build_basis(Weights({0.5, 0.5}))); }

Basis raw3() {
    // deliberately unnormalized norms a != 1
    return build_basis(Weights({0.2, 0.3, 0.5}));
}

}  // namespace

TEST_CASE("Krawtchouk basic values") {
    Basis b = sym2();
    PolySystem sys = PolySystem::krawtchouk(1, b);
    CHECK(krawtchouk_eval(sys, {0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(krawtchouk_eval(sys, {1}, {1, 0}) == doctest::Approx(-1.0));
    CHECK(krawtchouk_eval(sys, {1}, {0, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(krawtchouk_eval(sys, {2}, {1, 0}), DegreeTooHigh);
    CHECK_THROWS_AS(krawtchouk_eval(sys, {1}, {1, 1}), OutOfSupport);

    // E[Q_1^2] over multinomial(2, (1/2,1/2)) equals 2
    double got = oracles::multinomial_expectation(2, b.p, [&](const std::vector<int>& x) {
        std::vector<double> xr(x.begin(), x.end());
        double q = gf_product_coeff(nonconstant_rows(b), {1}, xr);
        return q * q;
    });
    CHECK(got == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Krawtchouk norm carries the basis norm factors") {
    // brute force at d=3, N=4 decides the general form:
    // E[Q_m Q_n] = delta multinomial(N; n, N-|n|) prod_j a_j^{n_j}
    Basis b = raw3();
    int N = 4;
    auto idx = indices_up_to(2, N);
    for (std::size_t ia = 0; ia < idx.size(); ++ia)
        for (std::size_t ic = ia; ic < idx.size(); ++ic) {
            double got = oracles::multinomial_expectation(N, b.p, [&](const std::vector<int>& x) {
                std::vector<double> xr(x.begin(), x.end());
                return gf_product_coeff(nonconstant_rows(b), idx[ia], xr) *
                       gf_product_coeff(nonconstant_rows(b), idx[ic], xr);
            });
            double want = 0.0;
            if (idx[ia] == idx[ic]) {
                want = multinomial_with_rest(N, idx[ia]);
                for (std::size_t l = 0; l < idx[ia].size(); ++l)
                    want *= std::pow(b.a[l + 1], idx[ia][l]);
            }
            CHECK(std::abs(got - want) < 1e-10 * std::max(1.0, std::abs(want)));
        }
    // sanity: with a != 1 the bare multinomial coefficient is NOT the norm
    CHECK(std::abs(b.a[1] - 1.0) > 0.05);
    double diag = oracles::multinomial_expectation(N, b.p, [&](const std::vector<int>& x) {
        std::vector<double> xr(x.begin(), x.end());
        double q = gf_product_coeff(nonconstant_rows(b), {1, 0}, xr);
        return q * q;
    });
    CHECK(std::abs(diag - multinomial_with_rest(N, {1, 0})) > 1e-3);
    CHECK(norm_h_inv(PolySystem::krawtchouk(N, b), {1, 0}) == doctest::Approx(diag).epsilon(1e-12));
}

TEST_CASE("Krawtchouk equals the symmetrized partition sum for N <= 4") {
    for (const Basis& b : {sym2(), raw3()}) {
        int d = b.dim();
        for (int N = 1; N <= 4; ++N) {
            DistSpec spec = DistSpec::multinomial(N, b.p);
            LatticeSlab slab = slab_for(spec, 0.5);
            auto idx = indices_up_to(d - 1, N);
            for_each_point(slab, [&](const std::vector<int>& x) {
                std::vector<double> xr(x.begin(), x.end());
                for (const auto& n1 : idx) {
                    double gf = gf_product_coeff(nonconstant_rows(b), n1, xr);
                    double ps = oracles::krawtchouk_partition_sum(b, n1, x);
                    CHECK(gf == doctest::Approx(ps).epsilon(1e-11));
                }
            });
        }
    }
}

TEST_CASE("multivariate Charlier values and orthogonality") {
    Basis b = sym2();
    PolySystem sys = PolySystem::poisson_charlier({1.0, 1.0}, b);
    SUBCASE("degree zero is one") {
        CHECK(mv_charlier_eval(sys, {0, 0}, {3.0, 1.0}) == doctest::Approx(1.0));
    }
    SUBCASE("count-only index") {
        for (double t : {0.0, 1.0, 4.0})
            CHECK(mv_charlier_eval(sys, {1, 0}, {t, 0.0}) == doctest::Approx(1.0 - t / 2.0));
    }
    SUBCASE("first contrast index") {
        CHECK(mv_charlier_eval(sys, {0, 1}, {3.0, 1.0}) ==
              doctest::Approx((1.0 * 1.0 + 3.0 * (-1.0)) / 2.0));
    }
    SUBCASE("orthogonality by slab enumeration") {
        auto idx = indices_up_to(2, 4);
        DistSpec ambient = DistSpec::poisson_product({1.0, 1.0});
        for (std::size_t ia = 0; ia < idx.size(); ++ia)
            for (std::size_t ic = ia; ic < idx.size(); ++ic) {
                double got = oracles::slab_expectation(
                    ambient, 1e-12,
                    [&](const std::vector<int>& x) {
                        std::vector<double> xr(x.begin(), x.end());
                        return mv_charlier_eval(sys, idx[ia], xr) * mv_charlier_eval(sys, idx[ic], xr);
                    },
                    12);
                double want = (idx[ia] == idx[ic]) ? norm_h_inv(sys, idx[ia]) : 0.0;
                CHECK(std::abs(got - want) < 1e-8);
            }
    }
    SUBCASE("matches the generating-function route") {
        CounterRng rng(3, 9);
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> x = {double(rng.next_u64() % 6), double(rng.next_u64() % 6)};
            for (const auto& n : indices_up_to(2, 3))
                CHECK(mv_charlier_eval(sys, n, x) ==
                      doctest::Approx(mv_charlier_eval_gf(sys, n, x)).epsilon(1e-11));
        }
    }
    SUBCASE("three-type system with unequal means") {
        Basis b3 = build_basis(Weights({0.5, 0.25, 0.25}));
        PolySystem sys3 = PolySystem::poisson_charlier({1.0, 0.5, 0.5}, b3);
        auto idx = indices_up_to(3, 3);
        DistSpec ambient = DistSpec::poisson_product({1.0, 0.5, 0.5});
        for (std::size_t ia = 0; ia < idx.size(); ++ia)
            for (std::size_t ic = ia; ic < idx.size(); ++ic) {
                double got = oracles::slab_expectation(
                    ambient, 1e-12,
                    [&](const std::vector<int>& x) {
                        std::vector<double> xr(x.begin(), x.end());
                        return mv_charlier_eval(sys3, idx[ia], xr) *
                               mv_charlier_eval(sys3, idx[ic], xr);
                    },
                    12);
                double want = (idx[ia] == idx[ic]) ? norm_h_inv(sys3, idx[ia]) : 0.0;
                CHECK(std::abs(got - want) < 1e-8);
            }
    }
}

TEST_CASE("generating-function product identity") {
    Basis b = sym2();
    PolySystem sys = PolySystem::poisson_charlier({1.0, 1.0}, b);
    DistSpec ambient = DistSpec::poisson_product({1.0, 1.0});
    LatticeSlab slab = slab_for(ambient, 1e-14);
    CounterRng rng(23, 2);
    auto gpc = [&](const std::vector<int>& x, const std::vector<double>& w) {
        double v = std::exp(w[0]);
        for (int i = 0; i < 2; ++i) {
            double f = 1.0 - w[0] / 2.0 + b.u[1][std::size_t(i)] * w[1] / 2.0;
            v *= std::pow(f, x[std::size_t(i)]);
        }
        return v;
    };
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<double> z = {0.6 * rng.next_double() - 0.3, 0.6 * rng.next_double() - 0.3};
        std::vector<double> w = {0.6 * rng.next_double() - 0.3, 0.6 * rng.next_double() - 0.3};
        KahanSum acc;
        for_each_point(slab, [&](const std::vector<int>& x) {
            acc.add(pmf(ambient, x) * gpc(x, z) * gpc(x, w));
        });
        double want = std::exp((z[0] * w[0] + z[1] * w[1]) / 2.0);
        CHECK(acc.value() == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("no-constant basis generating function stays orthogonal") {
    // rotate the constant direction into both rows, then generate polynomials
    // with the exponential prefactor; the resulting family is orthogonal with
    // norms |mu|^{-|n|} prod a_j^{n_j} / n_j!
    double phi = 0.6;
    std::vector<std::vector<double>> g = {
        {std::cos(phi) - std::sin(phi), std::cos(phi) + std::sin(phi)},
        {-std::sin(phi) - std::cos(phi), -std::sin(phi) + std::cos(phi)}};
    std::vector<double> p = {0.5, 0.5};
    double mu = 2.0;
    auto eval = [&](const MultiIndex& n, const std::vector<int>& x) {
        std::vector<int> caps = n;
        int total = degree_of(n);
        std::vector<double> pref = {-(g[0][0] * p[0] + g[0][1] * p[1]),
                                    -(g[1][0] * p[0] + g[1][1] * p[1])};
        TruncatedSeries acc = TruncatedSeries::exp_linear(pref, caps, total);
        for (int i = 0; i < 2; ++i) {
            std::vector<double> lin = {g[0][std::size_t(i)] / mu, g[1][std::size_t(i)] / mu};
            acc = acc * TruncatedSeries::binomial_linear(double(x[std::size_t(i)]), lin, caps, total);
        }
        return acc.coeff(n);
    };
    DistSpec ambient = DistSpec::poisson_product({1.0, 1.0});
    auto idx = indices_up_to(2, 2);
    for (std::size_t ia = 0; ia < idx.size(); ++ia)
        for (std::size_t ic = ia; ic < idx.size(); ++ic) {
            double got = oracles::slab_expectation(ambient, 1e-13, [&](const std::vector<int>& x) {
                return eval(idx[ia], x) * eval(idx[ic], x);
            });
            double want = 0.0;
            if (idx[ia] == idx[ic]) {
                want = std::pow(mu, -degree_of(idx[ia]));
                for (std::size_t j = 0; j < 2; ++j)
                    want /= factorial(idx[ia][j]);  // both rotated norms are 1
            }
            CHECK(std::abs(got - want) < 1e-9);
        }
}

TEST_CASE("multivariate Meixner values and orthogonality") {
    Basis b = sym2();
    double alpha = 1.5, theta = 0.7;
    PolySystem sys = PolySystem::meixner(alpha, theta, b);
    SUBCASE("degree zero is one") {
        CHECK(mv_meixner_eval(sys, {0, 0}, {2.0, 5.0}) == doctest::Approx(1.0));
    }
    SUBCASE("first contrast index is the plain linear form") {
        CHECK(mv_meixner_eval(sys, {0, 1}, {2.0, 5.0}) == doctest::Approx(5.0 - 2.0));
    }
    SUBCASE("orthogonality by slab enumeration with relative error 1e-7") {
        auto idx = indices_up_to(2, 4);
        DistSpec ambient = DistSpec::meixner(alpha, theta, b.p);
        for (std::size_t ia = 0; ia < idx.size(); ++ia)
            for (std::size_t ic = ia; ic < idx.size(); ++ic) {
                double got = oracles::slab_expectation(
                    ambient, 1e-12,
                    [&](const std::vector<int>& x) {
                        std::vector<double> xr(x.begin(), x.end());
                        return mv_meixner_eval(sys, idx[ia], xr) * mv_meixner_eval(sys, idx[ic], xr);
                    },
                    35);
                double want = (idx[ia] == idx[ic]) ? norm_h_inv(sys, idx[ia]) : 0.0;
                CHECK(std::abs(got - want) / std::max(1.0, std::abs(want)) < 1e-7);
            }
    }
    SUBCASE("matches the generating-function route") {
        CounterRng rng(31, 4);
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> x = {double(rng.next_u64() % 6), double(rng.next_u64() % 6)};
            for (const auto& n : indices_up_to(2, 3))
                CHECK(mv_meixner_eval(sys, n, x) ==
                      doctest::Approx(mv_meixner_eval_gf(sys, n, x)).epsilon(1e-11));
        }
    }
}

TEST_CASE("multivariate Hermite values and sampled orthogonality") {
    Basis b = sym2();
    PolySystem sys = PolySystem::hermite({1.0, 1.0}, b);
    SUBCASE("single-factor linear values") {
        std::vector<double> x = {0.3, -1.1};
        auto xh = hat_coords(b, x);
        CHECK(mv_hermite_eval(sys, {1, 0}, x) == doctest::Approx(xh[0]));
        CHECK(mv_hermite_eval(sys, {0, 1}, x) == doctest::Approx(xh[1]));
    }
    SUBCASE("frozen second-contrast value") {
        std::vector<double> x = {0.4, 2.0};
        double want = (x[1] - x[0]) * (x[1] - x[0]) - 2.0;
        CHECK(mv_hermite_eval(sys, {0, 2}, x) == doctest::Approx(want));
    }
    SUBCASE("Monte Carlo orthogonality at 4 standard errors") {
        long n_samples = 400000;
        auto idx = indices_up_to(2, 3);
        std::vector<double> sums(idx.size() * idx.size(), 0.0), sq(idx.size() * idx.size(), 0.0);
        for (long s = 0; s < n_samples; ++s) {
            CounterRng rng(99, std::uint64_t(s));
            std::vector<double> x = {rng.next_normal(), rng.next_normal()};
            auto v = mv_eval_all(sys, 3, x);
            for (std::size_t ia = 0; ia < idx.size(); ++ia)
                for (std::size_t ic = ia; ic < idx.size(); ++ic) {
                    double pr = v[ia] * v[ic];
                    sums[ia * idx.size() + ic] += pr;
                    sq[ia * idx.size() + ic] += pr * pr;
                }
        }
        for (std::size_t ia = 0; ia < idx.size(); ++ia)
            for (std::size_t ic = ia; ic < idx.size(); ++ic) {
                double mean = sums[ia * idx.size() + ic] / n_samples;
                double var = std::max(0.0, sq[ia * idx.size() + ic] / n_samples - mean * mean);
                double se = std::sqrt(var / n_samples);
                double want = (idx[ia] == idx[ic]) ? norm_h_inv(sys, idx[ia]) : 0.0;
                CHECK(std::abs(mean - want) < 4.0 * se + 1e-12);
            }
    }
}

TEST_CASE("transforms against slab enumeration") {
    Basis b = sym2();
    SUBCASE("Poisson transform endpoints") {
        PolySystem sys = PolySystem::poisson_charlier({1.0, 1.0}, b);
        CHECK(transform(sys, {0, 0}, {1.0, 1.0}) == doctest::Approx(1.0));
        CHECK(transform(sys, {1, 0}, {1.0, 1.0}) == doctest::Approx(0.0));
        CHECK(transform(sys, {2, 1}, {1.0, 1.0}) == doctest::Approx(0.0));
    }
    SUBCASE("Poisson transform matches brute force") {
        PolySystem sys = PolySystem::poisson_charlier({1.0, 1.0}, b);
        DistSpec ambient = DistSpec::poisson_product({1.0, 1.0});
        std::vector<double> s = {0.5, 0.5};
        for (const auto& n : indices_up_to(2, 3)) {
            double got = transform(sys, n, s);
            double want = oracles::slab_expectation(ambient, 1e-14, [&](const std::vector<int>& x) {
                std::vector<double> xr(x.begin(), x.end());
                double m = mv_charlier_eval(sys, n, xr);
                return std::pow(s[0], x[0]) * std::pow(s[1], x[1]) * m;
            });
            CHECK(std::abs(got - want) < 1e-10);
        }
    }
    SUBCASE("Meixner transform matches brute force and guards its domain") {
        PolySystem sys = PolySystem::meixner(1.5, 0.7, b);
        DistSpec ambient = DistSpec::meixner(1.5, 0.7, b.p);
        CounterRng rng(7, 7);
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<double> s = {rng.next_double(), rng.next_double()};
            for (const auto& n : indices_up_to(2, 2)) {
                double got = transform(sys, n, s);
                double want = oracles::slab_expectation(
                    ambient, 1e-13,
                    [&](const std::vector<int>& x) {
                        std::vector<double> xr(x.begin(), x.end());
                        return std::pow(s[0], x[0]) * std::pow(s[1], x[1]) *
                               mv_meixner_eval(sys, n, xr);
                    },
                    25);
                CHECK(std::abs(got - want) < 1e-9);
            }
        }
        CHECK_THROWS_AS(transform(sys, {1, 0}, {5.0, 5.0}), DomainError);
    }
    SUBCASE("Hermite transform against product-grid quadrature") {
        PolySystem sys = PolySystem::hermite({1.0, 1.0}, b);
        std::vector<double> phi = {0.3, -0.2};
        for (const auto& n : indices_up_to(2, 2)) {
            double got = transform(sys, n, phi);
            KahanSum acc;
            double h = 0.02;
            for (double x0 = -9.0; x0 <= 9.0; x0 += h)
                for (double x1 = -9.0; x1 <= 9.0; x1 += h) {
                    double w = std::exp(-0.5 * (x0 * x0 + x1 * x1)) / (2.0 * M_PI);
                    acc.add(w * std::exp(phi[0] * x0 + phi[1] * x1) *
                            mv_hermite_eval(sys, n, {x0, x1}) * h * h);
                }
            CHECK(got == doctest::Approx(acc.value()).epsilon(1e-5));
        }
    }
}

TEST_CASE("single leading term in the hat monomials") {
    Basis b = sym2();
    std::vector<PolySystem> systems = {PolySystem::poisson_charlier({1.0, 1.0}, b),
                                       PolySystem::meixner(1.5, 0.7, b),
                                       PolySystem::hermite({1.0, 1.0}, b)};
    for (const auto& sys : systems) {
        for (const auto& n : indices_up_to(2, 3)) {
            int deg = degree_of(n);
            if (deg == 0) continue;
            double lead = leading_coefficient(sys, n);
            auto remainder = [&](const std::vector<double>& x) {
                auto xh = hat_coords(b, x);
                double mono = lead;
                for (int j = 0; j < 2; ++j)
                    for (int e = 0; e < n[std::size_t(j)]; ++e) mono *= xh[std::size_t(j)];
                return mv_eval(sys, n, x) - mono;
            };
            CHECK(oracles::max_mixed_difference(remainder, 2, deg, 0.25) < 1e-7);
        }
    }
    // Krawtchouk: remove the N-conditioning by treating x as free real variables
    PolySystem ks = PolySystem::krawtchouk(6, b);
    for (const auto& n1 : indices_up_to(1, 3)) {
        if (degree_of(n1) == 0) continue;
        double lead = leading_coefficient(ks, n1);
        auto remainder = [&](const std::vector<double>& x) {
            double mono = lead;
            auto xh = hat_coords(b, x);
            for (int e = 0; e < n1[0]; ++e) mono *= xh[1];
            return gf_product_coeff(nonconstant_rows(b), n1, x) - mono;
        };
        CHECK(oracles::max_mixed_difference(remainder, 2, degree_of(n1), 0.25) < 1e-8);
    }
}

TEST_CASE("limit relations decrease along a short schedule") {
    auto rep = verify_limits({10.0, 100.0});
    REQUIRE(rep.rows.size() == 4);
    for (const auto& row : rep.rows) {
        CAPTURE(row.name);
        REQUIRE(row.max_diff.size() == 2);
        CHECK(row.max_diff[1] < row.max_diff[0]);
    }
}
