#include <cmath>

#include "mvop/numeric.hpp"
#include "mvop/polysys.hpp"

namespace mvop {

namespace {

Basis symmetric_pair_basis() {
    Basis b = build_basis(Weights({0.5, 0.5}));
    return rescale_last(b);
}

std::vector<MultiIndex> degrees_2d(int cap) {
    std::vector<MultiIndex> out;
    for (const auto& n : indices_up_to(2, cap))
        if (degree_of(n) >= 1) out.push_back(n);
    return out;
}

std::vector<std::vector<double>> integer_grid_2d(int cap) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i <= cap; ++i)
        for (int j = 0; j <= cap; ++j) pts.push_back({double(i), double(j)});
    return pts;
}

std::vector<std::vector<double>> real_grid_2d() {
    std::vector<std::vector<double>> pts;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) pts.push_back({double(i), double(j)});
    return pts;
}

// target multivariate Charlier system, mu = (1,1)
double limit_krawtchouk_to_charlier(double N, const Basis& b, const PolySystem& pc,
                                    const std::vector<MultiIndex>& degs) {
    double mu = 2.0;
    // three-state table: v_l rows over states (1, 2, extra), l = 1, 2
    // v1 carries u^{(1)}/|mu|, v2 the count contrast with weight 1/N on the extra state
    std::vector<std::vector<double>> vrows = {
        {b.u[1][0] / mu, b.u[1][1] / mu, 0.0},
        {-1.0 / mu, -1.0 / mu, 1.0 / N},
    };
    double worst = 0.0;
    for (const auto& x : integer_grid_2d(3)) {
        std::vector<double> x3 = {x[0], x[1], N - x[0] - x[1]};
        for (const auto& n : degs) {
            // w_2 plays the count role: coefficient (n_1, n_0)
            MultiIndex m = {n[1], n[0]};
            double lhs = gf_product_coeff(vrows, m, x3);
            double rhs = mv_charlier_eval(pc, n, x);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

double limit_charlier_to_hermite(double mu_total, const Basis& b, const PolySystem& herm,
                                 const std::vector<MultiIndex>& degs) {
    std::vector<double> mu = {mu_total / 2.0, mu_total / 2.0};
    PolySystem pc = PolySystem::poisson_charlier(mu, b);
    double worst = 0.0;
    for (const auto& z : real_grid_2d()) {
        std::vector<double> x = {mu[0] + std::sqrt(mu_total) * z[0],
                                 mu[1] + std::sqrt(mu_total) * z[1]};
        for (const auto& n : degs) {
            double scale = factorial(n[0]) * factorial(n[1]) *
                           std::pow(mu_total, degree_of(n) / 2.0) *
                           ((n[0] % 2 == 0) ? 1.0 : -1.0);
            double lhs = scale * mv_charlier_eval(pc, n, x);
            double rhs = mv_hermite_eval(herm, n, z);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

// alpha -> inf at fixed theta; the count factor recenters to variance
// theta(1+theta), the contrast factors to theta a_j
double limit_meixner_to_hermite(double alpha, const Basis& b,
                                const std::vector<MultiIndex>& degs) {
    double theta = 0.7;
    PolySystem mei = PolySystem::meixner(alpha, theta, b);
    double worst = 0.0;
    for (const auto& z : real_grid_2d()) {
        std::vector<double> x = {std::sqrt(alpha) * z[0] + alpha * theta * b.p[0],
                                 std::sqrt(alpha) * z[1] + alpha * theta * b.p[1]};
        std::vector<double> zh = hat_coords(b, z);
        for (const auto& n : degs) {
            double scale = factorial(n[0]) * factorial(n[1]) * std::pow(theta, n[0]) *
                           ((n[0] % 2 == 0) ? 1.0 : -1.0) *
                           std::pow(alpha, -degree_of(n) / 2.0);
            double lhs = scale * mv_meixner_eval(mei, n, x);
            double rhs = hermite1d_eval(n[0], zh[0], theta * (1.0 + theta)) *
                         hermite1d_eval(n[1], zh[1], theta * b.a[1]);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

double limit_meixner_to_charlier(double alpha, const Basis& b, const PolySystem& pc,
                                 const std::vector<MultiIndex>& degs) {
    double mu_total = 2.0;
    double theta = mu_total / alpha;
    PolySystem mei = PolySystem::meixner(alpha, theta, b);
    double worst = 0.0;
    for (const auto& x : integer_grid_2d(3)) {
        for (const auto& n : degs) {
            double scale = std::pow(theta, n[0]) * std::pow(mu_total, -degree_of(n));
            double lhs = scale * mv_meixner_eval(mei, n, x);
            double rhs = mv_charlier_eval(pc, n, x);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

LimitRow run_limit(const std::string& name, double threshold,
                   const std::vector<double>& schedule,
                   const std::function<double(double)>& diff_at) {
    LimitRow row;
    row.name = name;
    row.threshold = threshold;
    row.params = schedule;
    for (double p : schedule) row.max_diff.push_back(diff_at(p));
    row.monotone = true;
    for (std::size_t k = 0; k + 1 < row.max_diff.size(); ++k)
        if (!(row.max_diff[k + 1] < row.max_diff[k])) row.monotone = false;
    row.pass = row.monotone && row.max_diff.back() < threshold;
    return row;
}

}  // namespace

LimitsReport verify_limits(const std::vector<double>& schedule) {
    Basis b = symmetric_pair_basis();
    PolySystem pc = PolySystem::poisson_charlier({1.0, 1.0}, b);
    PolySystem herm = PolySystem::hermite({0.5, 0.5}, b);
    auto degs = degrees_2d(3);

    LimitsReport rep;
    rep.rows.push_back(run_limit("krawtchouk-to-charlier", 1e-2, schedule, [&](double N) {
        return limit_krawtchouk_to_charlier(N, b, pc, degs);
    }));
    rep.rows.push_back(run_limit("charlier-to-hermite", 1e-1, schedule, [&](double mu) {
        return limit_charlier_to_hermite(mu, b, herm, degs);
    }));
    rep.rows.push_back(run_limit("meixner-to-hermite", 1e-1, schedule, [&](double alpha) {
        return limit_meixner_to_hermite(alpha, b, degs);
    }));
    rep.rows.push_back(run_limit("meixner-to-charlier", 1e-2, schedule, [&](double alpha) {
        return limit_meixner_to_charlier(alpha, b, pc, degs);
    }));
    rep.all_pass = true;
    for (const auto& row : rep.rows) rep.all_pass = rep.all_pass && row.pass;
    return rep;
}

}  // namespace mvop
