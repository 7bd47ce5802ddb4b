#include "mvop/dist.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"

namespace mvop {

namespace {

void require_positive(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!(x > 0.0)) throw DomainError(std::string(what) + ": entries must be > 0");
}

}  // namespace

int DistSpec::dim() const {
    switch (family) {
        case DistFamily::Multinomial:
        case DistFamily::MeixnerDist: return int(p.size());
        case DistFamily::PoissonProduct: return int(mu.size());
        case DistFamily::NormalProduct: return int(tau.size());
    }
    return 0;
}

DistSpec DistSpec::multinomial(int N, std::vector<double> p) {
    require_positive(p, "multinomial");
    DistSpec s;
    s.family = DistFamily::Multinomial;
    s.trials = N;
    s.p = std::move(p);
    return s;
}

DistSpec DistSpec::poisson_product(std::vector<double> mu) {
    require_positive(mu, "poisson_product");
    DistSpec s;
    s.family = DistFamily::PoissonProduct;
    s.mu = std::move(mu);
    return s;
}

DistSpec DistSpec::meixner(double alpha, double theta, std::vector<double> p) {
    if (!(alpha > 0.0) || !(theta > 0.0)) throw DomainError("meixner: alpha, theta must be > 0");
    require_positive(p, "meixner");
    DistSpec s;
    s.family = DistFamily::MeixnerDist;
    s.alpha = alpha;
    s.theta = theta;
    s.p = std::move(p);
    return s;
}

DistSpec DistSpec::normal_product(std::vector<double> tau) {
    require_positive(tau, "normal_product");
    DistSpec s;
    s.family = DistFamily::NormalProduct;
    s.tau = std::move(tau);
    return s;
}

double pmf(const DistSpec& spec, const std::vector<int>& x) {
    for (int v : x)
        if (v < 0) throw OutOfSupport("pmf: negative coordinate");
    int total = isum_of(x);
    switch (spec.family) {
        case DistFamily::Multinomial: {
            if (total != spec.trials)
                throw OutOfSupport("pmf: multinomial needs |x| = N");
            double v = multinomial_with_rest(spec.trials, x);
            for (std::size_t i = 0; i < x.size(); ++i)
                for (int k = 0; k < x[i]; ++k) v *= spec.p[i];
            return v;
        }
        case DistFamily::PoissonProduct: {
            double logv = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                logv += -spec.mu[i] + x[i] * std::log(spec.mu[i]) - std::lgamma(x[i] + 1.0);
            return std::exp(logv);
        }
        case DistFamily::MeixnerDist: {
            // Gamma(a+|x|)/(Gamma(a)) * theta^|x|/(1+theta)^{a+|x|} * multinomial(|x|;x) p^x,
            // accumulated in log space (the |x|! factors cancel).
            double logv = std::lgamma(spec.alpha + total) - std::lgamma(spec.alpha) +
                          total * std::log(spec.theta) -
                          (spec.alpha + total) * std::log1p(spec.theta);
            for (std::size_t i = 0; i < x.size(); ++i)
                logv += x[i] * std::log(spec.p[i]) - std::lgamma(x[i] + 1.0);
            return std::exp(logv);
        }
        case DistFamily::NormalProduct:
            throw OutOfSupport("pmf: normal product has a density, not a pmf");
    }
    return 0.0;
}

double normal_density(const DistSpec& spec, const std::vector<double>& x) {
    if (spec.family != DistFamily::NormalProduct)
        throw DomainError("normal_density: wrong family");
    double logv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        logv += -0.5 * std::log(2.0 * M_PI * spec.tau[i]) - x[i] * x[i] / (2.0 * spec.tau[i]);
    return std::exp(logv);
}

namespace {

// Smallest B with P(X > B) < eps for a pmf given by ratio recursion f(k+1)=f(k)*r(k).
template <typename PmfAt>
int upper_quantile(PmfAt pmf_at, double eps) {
    double cum = 0.0;
    for (int k = 0; k < 100000; ++k) {
        cum += pmf_at(k);
        if (1.0 - cum < eps) return k;
    }
    throw DomainError("upper_quantile: no bound below 100000");
}

double poisson_pmf_1d(int k, double mu) {
    return std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0));
}

double nb_pmf_1d(int k, double alpha, double theta) {
    return std::exp(std::lgamma(alpha + k) - std::lgamma(alpha) - std::lgamma(k + 1.0) +
                    k * std::log(theta) - (alpha + k) * std::log1p(theta));
}

}  // namespace

LatticeSlab slab_for(const DistSpec& spec, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("slab_for: epsilon in (0,1)");
    LatticeSlab slab;
    int d = spec.dim();
    switch (spec.family) {
        case DistFamily::Multinomial:
            slab.bounds.assign(std::size_t(d), spec.trials);
            slab.exact_total = spec.trials;
            slab.tail_mass_bound = 0.0;
            return slab;
        case DistFamily::PoissonProduct: {
            // per-coordinate quantile at eps/d plus union bound
            double tail = 0.0;
            for (int i = 0; i < d; ++i) {
                double mu = spec.mu[std::size_t(i)];
                int b = upper_quantile([&](int k) { return poisson_pmf_1d(k, mu); },
                                       epsilon / d);
                slab.bounds.push_back(b);
                double cum = 0.0;
                for (int k = 0; k <= b; ++k) cum += poisson_pmf_1d(k, mu);
                tail += std::max(0.0, 1.0 - cum);
            }
            slab.tail_mass_bound = tail;
            return slab;
        }
        case DistFamily::MeixnerDist: {
            // bound the total |X| ~ NB(alpha, theta), then |x| <= B covers the rest
            int b = upper_quantile(
                [&](int k) { return nb_pmf_1d(k, spec.alpha, spec.theta); }, epsilon);
            slab.bounds.assign(std::size_t(d), b);
            slab.total_bound = b;
            double cum = 0.0;
            for (int k = 0; k <= b; ++k) cum += nb_pmf_1d(k, spec.alpha, spec.theta);
            slab.tail_mass_bound = std::max(0.0, 1.0 - cum);
            return slab;
        }
        case DistFamily::NormalProduct:
            throw DomainError("slab_for: normal product is not lattice-enumerable");
    }
    return slab;
}

void for_each_point(const LatticeSlab& slab,
                    const std::function<void(const std::vector<int>&)>& fn) {
    std::size_t d = slab.bounds.size();
    std::vector<int> x(d, 0);
    if (slab.exact_total >= 0) {
        // compositions of exact_total into d parts, lexicographic
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int rest) {
            if (i + 1 == d) {
                if (rest <= slab.bounds[i]) {
                    x[i] = rest;
                    fn(x);
                }
                return;
            }
            for (int v = 0; v <= std::min(rest, slab.bounds[i]); ++v) {
                x[i] = v;
                rec(i + 1, rest - v);
            }
        };
        rec(0, slab.exact_total);
        return;
    }
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == d) {
            fn(x);
            return;
        }
        int cap = slab.bounds[i];
        if (slab.total_bound >= 0) cap = std::min(cap, slab.total_bound - used);
        for (int v = 0; v <= cap; ++v) {
            x[i] = v;
            rec(i + 1, used + v);
        }
    };
    rec(0, 0);
}

std::vector<std::vector<int>> slab_points(const LatticeSlab& slab) {
    std::vector<std::vector<int>> pts;
    for_each_point(slab, [&](const std::vector<int>& x) { pts.push_back(x); });
    return pts;
}

double slab_mass(const DistSpec& spec, const LatticeSlab& slab) {
    KahanSum s;
    for_each_point(slab, [&](const std::vector<int>& x) { s.add(pmf(spec, x)); });
    return s.value();
}

LatticeSlab expand(LatticeSlab slab, int margin) {
    for (int& b : slab.bounds) b += margin;
    if (slab.total_bound >= 0) slab.total_bound += margin;
    return slab;
}

void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights, double a) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + a + 1.0;
        if (k + 1 < n) {
            double off = std::sqrt((k + 1.0) * (k + 1.0 + a));
            J(k, k + 1) = off;
            J(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(std::size_t(n));
    weights.resize(std::size_t(n));
    double total = std::tgamma(a + 1.0);
    for (int k = 0; k < n; ++k) {
        nodes[std::size_t(k)] = es.eigenvalues()(k);
        double v0 = es.eigenvectors()(0, k);
        weights[std::size_t(k)] = total * v0 * v0;
    }
}

double poisson_gamma_mixture_max_error(double alpha, double theta,
                                       const std::vector<double>& p, double epsilon) {
    DistSpec spec = DistSpec::meixner(alpha, theta, p);
    LatticeSlab slab = slab_for(spec, epsilon);
    // mu ~ Gamma(alpha, scale theta): substituting mu = theta t leaves the
    // weight t^{alpha-1} e^{-t} / Gamma(alpha), handled by the generalized rule
    std::vector<double> t, w;
    gauss_laguerre(200, t, w, alpha - 1.0);
    double worst = 0.0;
    for_each_point(slab, [&](const std::vector<int>& x) {
        KahanSum integral;
        for (std::size_t q = 0; q < t.size(); ++q) {
            double mu = theta * t[q];
            double logf = -std::lgamma(alpha);
            for (std::size_t i = 0; i < x.size(); ++i) {
                double m = mu * p[i];
                logf += -m + x[i] * std::log(m) - std::lgamma(x[i] + 1.0);
            }
            integral.add(w[q] * std::exp(logf));
        }
        worst = std::max(worst, std::abs(integral.value() - pmf(spec, x)));
    });
    return worst;
}

}  // namespace mvop
