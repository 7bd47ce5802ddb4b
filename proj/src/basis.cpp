#include "mvop/basis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"

namespace mvop {

Weights::Weights(std::vector<double> probs) : p(std::move(probs)) {
    if (p.empty()) throw ZeroWeight("weights: empty");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0)
            throw ZeroWeight("weights: p[" + std::to_string(i) + "] <= 0");
        s += p[i];
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw ZeroWeight("weights: sum = " + std::to_string(s) + ", expected 1");
}

namespace {

double dot_p(const std::vector<double>& p, const std::vector<double>& x,
             const std::vector<double>& y) {
    KahanSum s;
    for (std::size_t j = 0; j < p.size(); ++j) s.add(x[j] * y[j] * p[j]);
    return s.value();
}

// Seed l (l = 1..d-1) contrasts state l against the mean of states 0..l-1.
std::vector<std::vector<double>> default_seeds(int d) {
    std::vector<std::vector<double>> seeds;
    for (int l = 1; l < d; ++l) {
        std::vector<double> v(d, 0.0);
        v[l] = 1.0;
        for (int j = 0; j < l; ++j) v[j] = -1.0 / l;
        seeds.push_back(std::move(v));
    }
    return seeds;
}

}  // namespace

double Basis::orthogonality_residual() const {
    int d = dim();
    double worst = 0.0;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            double g = dot_p(p, u[k], u[l]);
            double target = (k == l) ? a[k] : 0.0;
            worst = std::max(worst, std::abs(g - target));
        }
    return worst;
}

Basis build_basis(const Weights& w,
                  const std::optional<std::vector<std::vector<double>>>& seeds) {
    int d = w.dim();
    auto sv = seeds ? *seeds : default_seeds(d);
    if (int(sv.size()) != d - 1)
        throw DegenerateSeed("build_basis: need d-1 seed vectors, got " +
                             std::to_string(sv.size()));

    Basis b;
    b.p = w.p;
    b.u.assign(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    b.a.assign(std::size_t(d), 0.0);
    for (int j = 0; j < d; ++j) b.u[0][j] = 1.0;
    b.a[0] = 1.0;

    for (int r = 1; r < d; ++r) {
        const auto& seed = sv[std::size_t(r - 1)];
        if (int(seed.size()) != d) throw DegenerateSeed("build_basis: seed size mismatch");
        std::vector<double> v = seed;
        double norm0 = dot_p(w.p, seed, seed);
        for (int k = 0; k < r; ++k) {
            double proj = dot_p(w.p, v, b.u[k]) / b.a[k];
            for (int j = 0; j < d; ++j) v[j] -= proj * b.u[k][j];
        }
        double ar = dot_p(w.p, v, v);
        if (!(ar > 1e-12 * std::max(norm0, 1.0)))
            throw DegenerateSeed("build_basis: seed " + std::to_string(r - 1) +
                                 " is rank deficient after projection");
        b.u[r] = std::move(v);
        b.a[r] = ar;
    }
    return b;
}

Basis rescale_last(const Basis& b) {
    int d = b.dim();
    Basis out = b;
    for (int r = 1; r < d; ++r) {
        double last = b.u[r][std::size_t(d - 1)];
        if (last == 0.0)
            throw UnscalableBasis(r, "rescale_last: u[" + std::to_string(r) +
                                         "] has zero last entry");
        for (int j = 0; j < d; ++j) out.u[r][j] = b.u[r][j] / last;
        out.a[r] = b.a[r] / (last * last);
    }
    out.scaled_last = true;
    return out;
}

HypergroupTensor hypergroup_tensor(const Basis& b, double tol) {
    int d = b.dim();
    HypergroupTensor t;
    t.d = d;
    t.s.assign(std::size_t(d) * d * d, 0.0);
    t.min_entry = std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                KahanSum s;
                for (int r = 0; r < d; ++r)
                    s.add(b.u[r][j] * b.u[r][k] * b.u[r][l] / b.a[r]);
                double v = s.value();
                t.s[std::size_t((j * d + k) * d + l)] = v;
                if (v < t.min_entry) {
                    t.min_entry = v;
                    t.argmin = {j, k, l};
                }
            }
    t.feasible = t.min_entry >= -tol;
    return t;
}

std::vector<double> theta_from_omega(const Basis& b, const std::vector<double>& omega) {
    int d = b.dim();
    std::vector<double> theta(std::size_t(d - 1), 0.0);
    for (int r = 1; r < d; ++r) {
        KahanSum s;
        for (int l = 0; l < d; ++l) s.add(omega[l] * b.u[r][l]);
        theta[std::size_t(r - 1)] = s.value();
    }
    return theta;
}

std::vector<std::vector<double>> lancaster_2point(const Basis& b,
                                                  const std::vector<double>& theta,
                                                  bool require_nonneg, double tol) {
    int d = b.dim();
    std::vector<std::vector<double>> m(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            KahanSum s;
            s.add(1.0);
            for (int r = 1; r < d; ++r)
                s.add(theta[std::size_t(r - 1)] * b.u[r][j] * b.u[r][k] / b.a[r]);
            double v = b.p[j] * b.p[k] * s.value();
            if (require_nonneg && v < -tol)
                throw NegativeCell(j, k, "lancaster_2point: negative cell at (" +
                                             std::to_string(j) + "," + std::to_string(k) +
                                             ") = " + std::to_string(v));
            m[j][k] = v;
        }
    return m;
}

}  // namespace mvop
