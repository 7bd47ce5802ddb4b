#include <doctest.h>

#include <cmath>

#include "mvop/errors.hpp"
#include "mvop/lancaster.hpp"
#include "oracles.hpp"

using namespace mvop;

TEST_CASE("canonical decomposition of cell matrices") {
    SUBCASE("independent cells have zero correlations") {
        std::vector<std::vector<double>> cells = {{0.12, 0.28}, {0.18, 0.42}};
        auto dec = canonical_decomposition(cells);
        CHECK(dec.rho[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dec.reconstruction_residual < 1e-12);
    }
    SUBCASE("symmetric two-block matrix has rho = 1/2") {
        std::vector<std::vector<double>> cells = {{0.375, 0.125}, {0.125, 0.375}};
        auto dec = canonical_decomposition(cells);
        CHECK(dec.prow[0] == doctest::Approx(0.5));
        CHECK(dec.pcol[1] == doctest::Approx(0.5));
        CHECK(dec.rho[0] == doctest::Approx(0.5).epsilon(1e-13));
        // u and v are (-1,1) up to a simultaneous sign
        CHECK(std::abs(dec.u[0][0]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dec.u[0][0] * dec.u[0][1] < 0.0);
        CHECK(dec.u[0][0] * dec.v[0][0] > 0.0);
        CHECK(dec.reconstruction_residual < 1e-13);
    }
    SUBCASE("diagonal cells are perfectly correlated") {
        std::vector<std::vector<double>> cells = {{1.0 / 3, 0.0}, {0.0, 2.0 / 3}};
        auto dec = canonical_decomposition(cells);
        CHECK(dec.rho[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rank-deficient rectangular matrices still reconstruct") {
        std::vector<std::vector<double>> cells = {{0.1, 0.2, 0.1}, {0.15, 0.3, 0.15}};
        auto dec = canonical_decomposition(cells);  // independent rows: rank 0 contrast
        CHECK(dec.rho[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dec.reconstruction_residual < 1e-12);
    }
    SUBCASE("invalid matrices are rejected") {
        CHECK_THROWS_AS(canonical_decomposition({{0.5, 0.2}, {0.2, 0.2}}), DomainError);
        CHECK_THROWS_AS(canonical_decomposition({{0.5, 0.5}, {0.0, 0.0}}), NoLancasterForm);
    }
}

TEST_CASE("contingency margins match the diagonal expansion") {
    SUBCASE("independent cells: product of multinomials, tiny residual") {
        auto res = contingency_joint(3, {{0.12, 0.28}, {0.18, 0.42}});
        CHECK(res.residual < 1e-12);
    }
    SUBCASE("correlated two-by-two at N = 2") {
        auto res = contingency_joint(2, {{0.375, 0.125}, {0.125, 0.375}});
        CHECK(res.decomp.rho[0] == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(res.residual < 1e-12);
    }
    SUBCASE("random two-by-three at N = 3") {
        CounterRng rng(8, 8);
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<std::vector<double>> cells(2, std::vector<double>(3));
            double tot = 0.0;
            for (auto& row : cells)
                for (double& v : row) {
                    v = 0.05 + rng.next_double();
                    tot += v;
                }
            for (auto& row : cells)
                for (double& v : row) v /= tot;
            // exact renormalization
            double s = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 3; ++j)
                    if (i + j > 0) s += cells[std::size_t(i)][std::size_t(j)];
            cells[0][0] = 1.0 - s;
            auto res = contingency_joint(3, cells);
            CHECK(res.residual < 1e-10);
        }
    }
    SUBCASE("enumeration bounds are enforced") {
        CHECK_THROWS_AS(contingency_joint(9, {{0.5, 0.5}}), DomainError);
    }
}

TEST_CASE("Poisson array margins match the truncated expansion") {
    SUBCASE("two-block array: net residual and cross moment") {
        auto res = poisson_array_joint({{1.5, 0.5}, {0.5, 1.5}}, 1e-10, 8);
        CHECK(res.decomp.rho[0] == doctest::Approx(0.5).epsilon(1e-12));
        // E[C_{e1}(X) C_{e1}(Y)] = rho_1 a_1 / |mu| = 0.5 / 4
        CHECK(res.cross_moment_e1 == doctest::Approx(0.125).epsilon(1e-8));
        CHECK(res.residual_net < 1e-6);
        // the raw truncation gap at degree 8 is visible but certified
        CHECK(res.residual_raw < res.tail_bound_max + 1e-6);
        CHECK(res.enumeration_tail < 1e-9);
    }
    SUBCASE("product cells decouple apart from the shared total") {
        auto res = poisson_array_joint({{0.6, 1.4}, {1.2, 2.8}}, 1e-10, 8);
        CHECK(res.decomp.rho[0] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(res.residual_net < 1e-9);
    }
}
