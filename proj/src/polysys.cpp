#include "mvop/polysys.hpp"

#include <cmath>
#include <string>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"
#include "mvop/series.hpp"

namespace mvop {

double PolySystem::mu_total() const { return sum_of(mu); }
double PolySystem::tau_total() const { return sum_of(tau); }

namespace {

void check_weight_match(const std::vector<double>& v, const Basis& b, const char* what) {
    double tot = sum_of(v);
    for (int i = 0; i < b.dim(); ++i) {
        if (!(v[std::size_t(i)] > 0.0)) throw DomainMismatch(std::string(what) + ": entries must be > 0");
        if (std::abs(v[std::size_t(i)] / tot - b.p[std::size_t(i)]) > 1e-12)
            throw DomainMismatch(std::string(what) + ": basis weights must equal normalized parameter");
    }
}

}  // namespace

PolySystem PolySystem::krawtchouk(int N, Basis basis) {
    if (N < 0) throw DomainError("krawtchouk: N >= 0");
    PolySystem s;
    s.family = PolyFamily::Krawtchouk;
    s.N = N;
    s.basis = std::move(basis);
    return s;
}

PolySystem PolySystem::poisson_charlier(std::vector<double> mu, Basis basis) {
    check_weight_match(mu, basis, "poisson_charlier");
    PolySystem s;
    s.family = PolyFamily::PoissonCharlier;
    s.mu = std::move(mu);
    s.basis = std::move(basis);
    return s;
}

PolySystem PolySystem::meixner(double alpha, double theta, Basis basis) {
    if (!(alpha > 0.0) || !(theta > 0.0)) throw DomainError("meixner: alpha, theta > 0");
    PolySystem s;
    s.family = PolyFamily::Meixner;
    s.alpha = alpha;
    s.theta = theta;
    s.basis = std::move(basis);
    return s;
}

PolySystem PolySystem::hermite(std::vector<double> tau, Basis basis) {
    check_weight_match(tau, basis, "hermite");
    PolySystem s;
    s.family = PolyFamily::Hermite;
    s.tau = std::move(tau);
    s.basis = std::move(basis);
    return s;
}

// C_{n+1} = (1 - x/l + n/l) C_n - (n/l) C_{n-1}, from the generating function.
std::vector<double> charlier_row(int nmax, double x, double lambda) {
    std::vector<double> c(std::size_t(nmax) + 1);
    c[0] = 1.0;
    if (nmax >= 1) c[1] = 1.0 - x / lambda;
    for (int n = 1; n < nmax; ++n)
        c[std::size_t(n) + 1] = (1.0 - x / lambda + n / lambda) * c[std::size_t(n)] -
                                (n / lambda) * c[std::size_t(n) - 1];
    return c;
}

double charlier_eval(int n, double x, double lambda) {
    if (n < 0) throw DomainError("charlier_eval: n >= 0");
    return charlier_row(n, x, lambda)[std::size_t(n)];
}

// (a+n) M_{n+1} = [a + n(1+1/k) - x(1/k - 1)] M_n - (n/k) M_{n-1}.
std::vector<double> meixner1d_row(int nmax, double x, double alpha, double kappa) {
    std::vector<double> m(std::size_t(nmax) + 1);
    m[0] = 1.0;
    if (nmax >= 1) m[1] = 1.0 - x * (1.0 - kappa) / (alpha * kappa);
    for (int n = 1; n < nmax; ++n)
        m[std::size_t(n) + 1] = ((alpha + n * (1.0 + 1.0 / kappa) - x * (1.0 / kappa - 1.0)) *
                                     m[std::size_t(n)] -
                                 (n / kappa) * m[std::size_t(n) - 1]) /
                                (alpha + n);
    return m;
}

double meixner1d_eval(int n, double x, double alpha, double kappa) {
    if (n < 0) throw DomainError("meixner1d_eval: n >= 0");
    return meixner1d_row(n, x, alpha, kappa)[std::size_t(n)];
}

// H_{n+1} = x H_n - n tau H_{n-1}.
std::vector<double> hermite1d_row(int nmax, double x, double tau) {
    std::vector<double> h(std::size_t(nmax) + 1);
    h[0] = 1.0;
    if (nmax >= 1) h[1] = x;
    for (int n = 1; n < nmax; ++n)
        h[std::size_t(n) + 1] = x * h[std::size_t(n)] - n * tau * h[std::size_t(n) - 1];
    return h;
}

double hermite1d_eval(int n, double x, double tau) {
    if (n < 0) throw DomainError("hermite1d_eval: n >= 0");
    return hermite1d_row(n, x, tau)[std::size_t(n)];
}

std::vector<std::vector<double>> nonconstant_rows(const Basis& b) {
    std::vector<std::vector<double>> rows;
    for (int l = 1; l < b.dim(); ++l) rows.push_back(b.u[std::size_t(l)]);
    return rows;
}

double gf_product_coeff(const std::vector<std::vector<double>>& rows, const MultiIndex& n1,
                        const std::vector<double>& x) {
    int m = int(rows.size());
    int total = degree_of(n1);
    std::vector<int> caps = n1;
    TruncatedSeries acc = TruncatedSeries::one(caps, total);
    std::vector<double> lin(std::size_t(m), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
        for (int l = 0; l < m; ++l) lin[std::size_t(l)] = rows[std::size_t(l)][j];
        acc = acc * TruncatedSeries::binomial_linear(x[j], lin, caps, total);
    }
    return acc.coeff(n1);
}

std::vector<double> gf_product_coeffs_up_to(const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& x, int max_degree) {
    int m = int(rows.size());
    std::vector<int> caps(std::size_t(m), max_degree);
    TruncatedSeries acc = TruncatedSeries::one(caps, max_degree);
    std::vector<double> lin(std::size_t(m), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
        for (int l = 0; l < m; ++l) lin[std::size_t(l)] = rows[std::size_t(l)][j];
        acc = acc * TruncatedSeries::binomial_linear(x[j], lin, caps, max_degree);
    }
    auto idx = indices_up_to(m, max_degree);
    std::vector<double> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = acc.coeff(idx[k]);
    return out;
}

double krawtchouk_eval(const PolySystem& sys, const MultiIndex& n1, const std::vector<int>& x) {
    if (sys.family != PolyFamily::Krawtchouk) throw DomainMismatch("krawtchouk_eval: wrong family");
    if (isum_of(x) != sys.N) throw OutOfSupport("krawtchouk_eval: |x| must equal N");
    if (degree_of(n1) > sys.N) throw DegreeTooHigh("krawtchouk_eval: |n| > N");
    std::vector<double> xr(x.begin(), x.end());
    return gf_product_coeff(nonconstant_rows(sys.basis), n1, xr);
}

namespace {

MultiIndex tail_index(const MultiIndex& n) { return MultiIndex(n.begin() + 1, n.end()); }

}  // namespace

double mv_charlier_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    MultiIndex n1 = tail_index(n);
    int n0 = n[0], k1 = degree_of(n1);
    double mu = sys.mu_total();
    double q = gf_product_coeff(nonconstant_rows(sys.basis), n1, x);
    double c = charlier_eval(n0, sum_of(x) - k1, mu);
    return c / factorial(n0) * std::pow(mu, -k1) * q;
}

// The Charlier-style factor carries alpha + |n1|: extracting w_0 after the
// Krawtchouk variables leaves (1 - w0/kappa)^{|x|-|n1|} (1 - w0)^-(|x|+alpha),
// the Meixner generating function with shape alpha + |n1|.
double mv_meixner_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    MultiIndex n1 = tail_index(n);
    int n0 = n[0], k1 = degree_of(n1);
    double kappa = sys.theta / (1.0 + sys.theta);
    double a1 = sys.alpha + k1;
    double q = gf_product_coeff(nonconstant_rows(sys.basis), n1, x);
    double m = meixner1d_eval(n0, sum_of(x) - k1, a1, kappa);
    return gamma_ratio(a1, n0) / factorial(n0) * m * q;
}

double mv_hermite_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    std::vector<double> xh = hat_coords(sys.basis, x);
    double tt = sys.tau_total();
    double v = 1.0;
    for (int j = 0; j < sys.dim(); ++j)
        v *= hermite1d_eval(n[std::size_t(j)], xh[std::size_t(j)], tt * sys.basis.a[std::size_t(j)]);
    return v;
}

double mv_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    switch (sys.family) {
        case PolyFamily::Krawtchouk: return gf_product_coeff(nonconstant_rows(sys.basis), n, x);
        case PolyFamily::PoissonCharlier: return mv_charlier_eval(sys, n, x);
        case PolyFamily::Meixner: return mv_meixner_eval(sys, n, x);
        case PolyFamily::Hermite: return mv_hermite_eval(sys, n, x);
    }
    return 0.0;
}

std::vector<double> mv_eval_all(const PolySystem& sys, int max_degree,
                                const std::vector<double>& x) {
    int d = sys.dim();
    if (sys.family == PolyFamily::Krawtchouk)
        return gf_product_coeffs_up_to(nonconstant_rows(sys.basis), x, max_degree);
    if (sys.family == PolyFamily::Hermite) {
        auto idx = indices_up_to(d, max_degree);
        std::vector<double> xh = hat_coords(sys.basis, x);
        double tt = sys.tau_total();
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
            rows[std::size_t(j)] =
                hermite1d_row(max_degree, xh[std::size_t(j)], tt * sys.basis.a[std::size_t(j)]);
        std::vector<double> out(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            double v = 1.0;
            for (int j = 0; j < d; ++j) v *= rows[std::size_t(j)][std::size_t(idx[k][std::size_t(j)])];
            out[k] = v;
        }
        return out;
    }
    // discrete families: one Krawtchouk table plus total-count rows per shift
    auto idx = indices_up_to(d, max_degree);
    auto kidx = indices_up_to(d - 1, max_degree);
    auto ktab = gf_product_coeffs_up_to(nonconstant_rows(sys.basis), x, max_degree);
    double xs = sum_of(x);
    std::vector<std::vector<double>> count_rows(std::size_t(max_degree) + 1);
    for (int k = 0; k <= max_degree; ++k) {
        if (sys.family == PolyFamily::PoissonCharlier)
            count_rows[std::size_t(k)] = charlier_row(max_degree, xs - k, sys.mu_total());
        else
            count_rows[std::size_t(k)] = meixner1d_row(max_degree, xs - k, sys.alpha + k,
                                                       sys.theta / (1.0 + sys.theta));
    }
    std::vector<double> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const MultiIndex& n = idx[k];
        int n0 = n[0];
        MultiIndex n1(n.begin() + 1, n.end());
        int k1 = degree_of(n1);
        double q = 0.0;
        for (std::size_t t = 0; t < kidx.size(); ++t)
            if (kidx[t] == n1) {
                q = ktab[t];
                break;
            }
        double head;
        if (sys.family == PolyFamily::PoissonCharlier)
            head = count_rows[std::size_t(k1)][std::size_t(n0)] / factorial(n0) *
                   std::pow(sys.mu_total(), -k1);
        else
            head = gamma_ratio(sys.alpha + k1, n0) / factorial(n0) *
                   count_rows[std::size_t(k1)][std::size_t(n0)];
        out[k] = head * q;
    }
    return out;
}

double mv_charlier_eval_gf(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    int d = sys.dim();
    double mu = sys.mu_total();
    std::vector<int> caps = n;
    int total = degree_of(n);
    // e^{w_0} prefactor
    std::vector<double> e0(std::size_t(d), 0.0);
    e0[0] = 1.0;
    TruncatedSeries acc = TruncatedSeries::exp_linear(e0, caps, total);
    std::vector<double> lin(std::size_t(d), 0.0);
    for (int i = 0; i < d; ++i) {
        lin[0] = -1.0 / mu;
        for (int j = 1; j < d; ++j) lin[std::size_t(j)] = sys.basis.u[std::size_t(j)][std::size_t(i)] / mu;
        acc = acc * TruncatedSeries::binomial_linear(x[std::size_t(i)], lin, caps, total);
    }
    return acc.coeff(n);
}

double mv_meixner_eval_gf(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x) {
    int d = sys.dim();
    std::vector<int> caps = n;
    int total = degree_of(n);
    double xs = sum_of(x);
    // (1 - w_0)^{-(|x| + alpha)} prefactor
    std::vector<double> m0(std::size_t(d), 0.0);
    m0[0] = -1.0;
    TruncatedSeries acc = TruncatedSeries::binomial_linear(-(xs + sys.alpha), m0, caps, total);
    std::vector<double> lin(std::size_t(d), 0.0);
    for (int i = 0; i < d; ++i) {
        lin[0] = -(1.0 + sys.theta) / sys.theta;
        for (int j = 1; j < d; ++j) lin[std::size_t(j)] = sys.basis.u[std::size_t(j)][std::size_t(i)];
        acc = acc * TruncatedSeries::binomial_linear(x[std::size_t(i)], lin, caps, total);
    }
    return acc.coeff(n);
}

std::vector<double> hat_coords(const Basis& b, const std::vector<double>& x) {
    int d = b.dim();
    std::vector<double> xh(std::size_t(d), 0.0);
    for (int j = 0; j < d; ++j) {
        KahanSum s;
        for (int i = 0; i < d; ++i) s.add(b.u[std::size_t(j)][std::size_t(i)] * x[std::size_t(i)]);
        xh[std::size_t(j)] = s.value();
    }
    return xh;
}

double leading_coefficient(const PolySystem& sys, const MultiIndex& n) {
    double invfact = 1.0;
    for (int v : n) invfact /= factorial(v);
    switch (sys.family) {
        case PolyFamily::Krawtchouk: return invfact;
        case PolyFamily::PoissonCharlier:
            return invfact * ((n[0] % 2 == 0) ? 1.0 : -1.0) * std::pow(sys.mu_total(), -degree_of(n));
        case PolyFamily::Meixner:
            return invfact * std::pow(-1.0 / sys.theta, n[0]);
        case PolyFamily::Hermite: return 1.0;
    }
    return 0.0;
}

double norm_h_inv(const PolySystem& sys, const MultiIndex& n) {
    const auto& a = sys.basis.a;
    switch (sys.family) {
        case PolyFamily::Krawtchouk: {
            double v = multinomial_with_rest(sys.N, n);
            for (std::size_t l = 0; l < n.size(); ++l)
                v *= std::pow(a[l + 1], n[l]);
            return v;
        }
        case PolyFamily::PoissonCharlier: {
            double v = std::pow(sys.mu_total(), -degree_of(n));
            for (std::size_t j = 0; j < n.size(); ++j)
                v *= std::pow(a[j], n[j]) / factorial(n[std::size_t(j)]);
            return v;
        }
        case PolyFamily::Meixner: {
            int deg = degree_of(n);
            double v = gamma_ratio(sys.alpha, deg);
            for (int nj : n) v /= factorial(nj);
            v *= std::pow((1.0 + sys.theta) / sys.theta, n[0]);
            v *= std::pow(sys.theta, deg - n[0]);
            for (std::size_t j = 1; j < n.size(); ++j) v *= std::pow(a[j], n[j]);
            return v;
        }
        case PolyFamily::Hermite: {
            double v = std::pow(sys.tau_total(), degree_of(n));
            for (std::size_t j = 0; j < n.size(); ++j)
                v *= factorial(n[j]) * std::pow(a[j], n[j]);
            return v;
        }
    }
    return 0.0;
}

NormTable norm_table(const PolySystem& sys, int max_degree) {
    int slots = (sys.family == PolyFamily::Krawtchouk) ? sys.dim() - 1 : sys.dim();
    NormTable t;
    t.index = indices_up_to(slots, max_degree);
    t.h_inv.reserve(t.index.size());
    for (const auto& n : t.index) t.h_inv.push_back(norm_h_inv(sys, n));
    return t;
}

namespace {

// S_j = sum_i p_i s_i u_i^{(j)}
std::vector<double> dual_sums(const Basis& b, const std::vector<double>& s) {
    int d = b.dim();
    std::vector<double> S(std::size_t(d), 0.0);
    for (int j = 0; j < d; ++j) {
        KahanSum acc;
        for (int i = 0; i < d; ++i)
            acc.add(b.p[std::size_t(i)] * s[std::size_t(i)] * b.u[std::size_t(j)][std::size_t(i)]);
        S[std::size_t(j)] = acc.value();
    }
    return S;
}

}  // namespace

double transform(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& dual) {
    int d = sys.dim();
    switch (sys.family) {
        case PolyFamily::PoissonCharlier: {
            auto S = dual_sums(sys.basis, dual);
            double v = 1.0;
            for (int nj : n) v /= factorial(nj);
            KahanSum expo;
            for (int i = 0; i < d; ++i) expo.add(sys.mu[std::size_t(i)] * (dual[std::size_t(i)] - 1.0));
            v *= std::exp(expo.value());
            v *= std::pow(1.0 - S[0], n[0]);
            for (int j = 1; j < d; ++j) v *= std::pow(S[std::size_t(j)], n[std::size_t(j)]);
            return v;
        }
        case PolyFamily::Meixner: {
            auto S = dual_sums(sys.basis, dual);
            double base = 1.0 - sys.theta * (S[0] - 1.0);
            if (!(base > 0.0))
                throw DomainError("transform: Meixner dual point outside convergence region");
            int deg = degree_of(n);
            double v = gamma_ratio(sys.alpha, deg);
            for (int nj : n) v /= factorial(nj);
            v *= std::pow(base, -(sys.alpha + deg));
            v *= std::pow((1.0 + sys.theta) * (1.0 - S[0]), n[0]);
            v *= std::pow(sys.theta, deg - n[0]);
            for (int j = 1; j < d; ++j) v *= std::pow(S[std::size_t(j)], n[std::size_t(j)]);
            return v;
        }
        case PolyFamily::Hermite: {
            KahanSum expo;
            for (int i = 0; i < d; ++i)
                expo.add(sys.tau[std::size_t(i)] * dual[std::size_t(i)] * dual[std::size_t(i)]);
            double v = std::exp(0.5 * expo.value());
            for (int j = 0; j < d; ++j) {
                KahanSum tj;
                for (int i = 0; i < d; ++i)
                    tj.add(sys.tau[std::size_t(i)] * sys.basis.u[std::size_t(j)][std::size_t(i)] *
                           dual[std::size_t(i)]);
                v *= std::pow(tj.value(), n[std::size_t(j)]);
            }
            return v;
        }
        case PolyFamily::Krawtchouk:
            throw DomainError("transform: not defined for the Krawtchouk system");
    }
    return 0.0;
}

double meixner1d_transform(int n, double s, double alpha, double theta) {
    double base = 1.0 - theta * (s - 1.0);
    if (!(base > 0.0)) throw DomainError("meixner1d_transform: outside convergence region");
    return std::pow(1.0 + theta, n) * std::pow(1.0 - s, n) * std::pow(base, -(alpha + n));
}

}  // namespace mvop
