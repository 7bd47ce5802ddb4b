#include "mvop/markov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <type_traits>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"

namespace mvop {

// ---------- Poisson queue ----------

PoissonQueueSpec PoissonQueueSpec::make(Basis basis, std::vector<double> mu,
                                        std::vector<double> xi, double tol) {
    PoissonQueueSpec s;
    s.xi_norm = sum_of(xi);
    if (s.xi_norm < -tol || s.xi_norm > 1.0 + tol)
        throw InfeasibleKernel("poisson queue: |xi| must lie in [0,1]");
    int d = basis.dim();
    if (s.xi_norm > tol) {
        std::vector<double> omega(xi);
        for (double& v : omega) v /= s.xi_norm;
        s.p_cond = conditional_type_law(basis, omega);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (s.p_cond[std::size_t(i)][std::size_t(j)] < -tol)
                    throw InfeasibleKernel("poisson queue: p_{j|i}(omega) negative at (" +
                                           std::to_string(i) + "," + std::to_string(j) + ")");
    } else {
        s.xi_norm = 0.0;
        s.p_cond.assign(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    }
    s.basis = std::move(basis);
    s.mu = std::move(mu);
    s.xi = std::move(xi);
    return s;
}

double PoissonQueueSpec::rho(const MultiIndex& n) const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j) {
        KahanSum rj;
        for (int i = 0; i < dim(); ++i)
            rj.add(basis.u[std::size_t(j)][std::size_t(i)] * xi[std::size_t(i)]);
        for (int e = 0; e < n[std::size_t(j)]; ++e) v *= rj.value();
    }
    return v;
}

double queue_pgf(const PoissonQueueSpec& spec, const std::vector<int>& x,
                 const std::vector<double>& t) {
    int d = spec.dim();
    KahanSum expo;
    for (int j = 0; j < d; ++j)
        expo.add((1.0 - spec.xi_norm) * spec.mu[std::size_t(j)] * (t[std::size_t(j)] - 1.0));
    double v = std::exp(expo.value());
    for (int i = 0; i < d; ++i) {
        KahanSum f;
        f.add(1.0 - spec.xi_norm);
        for (int j = 0; j < d; ++j)
            f.add(spec.xi_norm * spec.p_cond[std::size_t(i)][std::size_t(j)] * t[std::size_t(j)]);
        v *= std::pow(f.value(), x[std::size_t(i)]);
    }
    return v;
}

std::vector<int> queue_sample(const PoissonQueueSpec& spec, const std::vector<int>& x,
                              CounterRng& rng) {
    int d = spec.dim();
    std::vector<int> y(std::size_t(d), 0);
    for (int j = 0; j < d; ++j)
        y[std::size_t(j)] = rng.next_poisson((1.0 - spec.xi_norm) * spec.mu[std::size_t(j)]);
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < x[std::size_t(i)]; ++c) {
            double u = rng.next_double();
            if (u < 1.0 - spec.xi_norm) continue;  // served
            // remaining mass |xi| split by p_cond row i
            double acc = 1.0 - spec.xi_norm;
            int target = d - 1;
            for (int j = 0; j < d; ++j) {
                acc += spec.xi_norm * spec.p_cond[std::size_t(i)][std::size_t(j)];
                if (u < acc) {
                    target = j;
                    break;
                }
            }
            ++y[std::size_t(target)];
        }
    return y;
}

// ---------- negative binomial branching ----------

NbBranchSpec NbBranchSpec::make(double alpha, double beta, double kappa,
                                std::vector<std::vector<double>> q, std::vector<double> p) {
    if (!(alpha > 0.0)) throw InfeasibleKernel("nb branch: alpha > 0");
    if (beta < 0.0 || beta > 1.0) throw InfeasibleKernel("nb branch: beta in [0,1]");
    // kappa = 0 (no offspring bursts, no immigration mass) is allowed even at
    // beta = 1, where the chain is a pure relabeling without a stationary theta
    if (kappa < 0.0 || (kappa > 0.0 && !(kappa < 1.0 - beta)))
        throw InfeasibleKernel("nb branch: kappa in [0, 1-beta)");
    int d = int(p.size());
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) {
            if (q[std::size_t(i)][std::size_t(j)] < -1e-12)
                throw InfeasibleKernel("nb branch: negative q entry");
            row += q[std::size_t(i)][std::size_t(j)];
        }
        if (std::abs(row - 1.0) > 1e-10) throw InfeasibleKernel("nb branch: q not row-stochastic");
    }
    NbBranchSpec s;
    s.alpha = alpha;
    s.beta = beta;
    s.kappa = kappa;
    s.q = std::move(q);
    s.p = std::move(p);
    return s;
}

double nb_branch_pgf(const NbBranchSpec& spec, const std::vector<int>& x,
                     const std::vector<double>& t) {
    int d = spec.dim();
    KahanSum pt;
    for (int j = 0; j < d; ++j) pt.add(spec.p[std::size_t(j)] * t[std::size_t(j)]);
    double denom = 1.0 - spec.kappa * pt.value();
    double v = std::pow((1.0 - spec.kappa) / denom, spec.alpha);
    for (int i = 0; i < d; ++i) {
        KahanSum qt;
        for (int j = 0; j < d; ++j) qt.add(spec.q[std::size_t(i)][std::size_t(j)] * t[std::size_t(j)]);
        double f = 1.0 - spec.beta + spec.beta * (1.0 - spec.kappa) * qt.value() / denom;
        v *= std::pow(f, x[std::size_t(i)]);
    }
    return v;
}

std::vector<int> nb_branch_sample(const NbBranchSpec& spec, const std::vector<int>& x,
                                  CounterRng& rng) {
    int d = spec.dim();
    std::vector<int> y(std::size_t(d), 0);
    // immigration: NB(alpha, kappa) total, types iid p
    double scale = spec.kappa / (1.0 - spec.kappa);
    int imm = rng.next_poisson(rng.next_gamma(spec.alpha) * scale);
    for (int c = 0; c < imm; ++c) ++y[std::size_t(rng.next_categorical(spec.p))];
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < x[std::size_t(i)]; ++c) {
            if (rng.next_double() < 1.0 - spec.beta) continue;  // dies
            ++y[std::size_t(rng.next_categorical(spec.q[std::size_t(i)]))];
            int burst = rng.next_geometric(spec.kappa);
            for (int g = 0; g < burst; ++g) ++y[std::size_t(rng.next_categorical(spec.p))];
        }
    return y;
}

double nb_branch_rho(const NbBranchSpec& spec, const Basis& basis, const MultiIndex& n) {
    auto inv = branching_inverse(spec.beta, spec.kappa, spec.p, spec.q);
    int d = spec.dim();
    // rho_j(xi) = |xi| theta_j with theta_j = sum_l omega_l u_l^{(j)}; recover
    // omega from the conditional type law (rows of p_cond share one omega).
    // p_{j|i}(omega) = p_j sum_r theta_r a_r^{-1} u_i u_j; project back:
    // theta_r = sum_j p_{j|i} u_j^{(r)} / u_i^{(r)} for any i with u_i^{(r)} != 0.
    double v = 1.0;
    for (int j = 0; j < d; ++j) {
        double rho_j;
        if (j == 0) {
            rho_j = inv.xi_norm;
        } else {
            double theta_r = 0.0;
            bool found = false;
            for (int i = 0; i < d && !found; ++i) {
                if (std::abs(basis.u[std::size_t(j)][std::size_t(i)]) < 1e-9) continue;
                KahanSum s;
                for (int k = 0; k < d; ++k)
                    s.add(inv.p_cond[std::size_t(i)][std::size_t(k)] *
                          basis.u[std::size_t(j)][std::size_t(k)]);
                theta_r = s.value() / basis.u[std::size_t(j)][std::size_t(i)];
                found = true;
            }
            if (!found) throw DomainError("nb_branch_rho: degenerate basis row");
            rho_j = inv.xi_norm * theta_r;
        }
        for (int e = 0; e < n[std::size_t(j)]; ++e) v *= rho_j;
    }
    return v;
}

// ---------- Gaussian autoregression ----------

GaussArSpec GaussArSpec::make(Basis basis, std::vector<double> tau, std::vector<double> xi) {
    for (double v : xi)
        if (std::abs(v) > 1.0 + 1e-12) throw InfeasibleKernel("gauss ar: xi outside [-1,1]");
    double tot = sum_of(tau);
    for (int i = 0; i < basis.dim(); ++i)
        if (std::abs(tau[std::size_t(i)] / tot - basis.p[std::size_t(i)]) > 1e-12)
            throw DomainMismatch("gauss ar: basis weights must equal tau/|tau|");
    GaussArSpec s;
    s.basis = std::move(basis);
    s.tau = std::move(tau);
    s.xi = std::move(xi);
    return s;
}

namespace {

// x_i = p_i sum_r a_r^{-1} u_i^{(r)} xhat_r  (completeness of the basis)
std::vector<double> unhat(const Basis& b, const std::vector<double>& xhat) {
    int d = b.dim();
    std::vector<double> x(std::size_t(d), 0.0);
    for (int i = 0; i < d; ++i) {
        KahanSum s;
        for (int r = 0; r < d; ++r)
            s.add(b.u[std::size_t(r)][std::size_t(i)] / b.a[std::size_t(r)] * xhat[std::size_t(r)]);
        x[std::size_t(i)] = b.p[std::size_t(i)] * s.value();
    }
    return x;
}

}  // namespace

std::vector<double> gauss_ar_step(const GaussArSpec& spec, const std::vector<double>& x,
                                  CounterRng& rng) {
    int d = spec.dim();
    double tt = sum_of(spec.tau);
    std::vector<double> xh = hat_coords(spec.basis, x);
    std::vector<double> yh(static_cast<std::size_t>(d));
    for (int r = 0; r < d; ++r) {
        double corr = spec.xi[std::size_t(r)];
        double var = (1.0 - corr * corr) * tt * spec.basis.a[std::size_t(r)];
        yh[std::size_t(r)] = corr * xh[std::size_t(r)] + std::sqrt(var) * rng.next_normal();
    }
    return unhat(spec.basis, yh);
}

std::vector<double> gauss_ar_cond_mean(const GaussArSpec& spec, const std::vector<double>& x) {
    std::vector<double> xh = hat_coords(spec.basis, x);
    for (int r = 0; r < spec.dim(); ++r) xh[std::size_t(r)] *= spec.xi[std::size_t(r)];
    return unhat(spec.basis, xh);
}

std::vector<std::vector<double>> gauss_ar_cond_cov(const GaussArSpec& spec) {
    int d = spec.dim();
    double tt = sum_of(spec.tau);
    std::vector<std::vector<double>> cov(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            KahanSum s;
            for (int r = 0; r < d; ++r)
                s.add((1.0 - spec.xi[std::size_t(r)] * spec.xi[std::size_t(r)]) /
                      spec.basis.a[std::size_t(r)] * spec.basis.u[std::size_t(r)][std::size_t(i)] *
                      spec.basis.u[std::size_t(r)][std::size_t(j)]);
            cov[std::size_t(i)][std::size_t(j)] =
                tt * spec.basis.p[std::size_t(i)] * spec.basis.p[std::size_t(j)] * s.value();
        }
    return cov;
}

double gauss_ar_cond_mgf(const GaussArSpec& spec, const std::vector<double>& x,
                         const std::vector<double>& t) {
    int d = spec.dim();
    auto mean = gauss_ar_cond_mean(spec, x);
    auto cov = gauss_ar_cond_cov(spec);
    KahanSum expo;
    for (int i = 0; i < d; ++i) {
        expo.add(t[std::size_t(i)] * mean[std::size_t(i)]);
        for (int j = 0; j < d; ++j)
            expo.add(0.5 * t[std::size_t(i)] * cov[std::size_t(i)][std::size_t(j)] * t[std::size_t(j)]);
    }
    return std::exp(expo.value());
}

// ---------- exact one-step laws ----------

std::size_t BoxMap::offset(const std::vector<int>& y) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < bounds.size(); ++i)
        o = o * std::size_t(bounds[i] + 1) + std::size_t(y[i]);
    return o;
}

bool BoxMap::contains(const std::vector<int>& y) const {
    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (y[i] < 0 || y[i] > bounds[i]) return false;
    return true;
}

namespace {

BoxMap zero_map(const std::vector<int>& bounds) {
    BoxMap m;
    m.bounds = bounds;
    std::size_t size = 1;
    for (int b : bounds) size *= std::size_t(b + 1);
    m.v.assign(size, 0.0);
    return m;
}

void box_for_each(const std::vector<int>& bounds,
                  const std::function<void(const std::vector<int>&, std::size_t)>& fn) {
    std::vector<int> y(bounds.size(), 0);
    std::size_t idx = 0;
    while (true) {
        fn(y, idx);
        ++idx;
        int i = int(bounds.size()) - 1;
        while (i >= 0) {
            if (y[std::size_t(i)] < bounds[std::size_t(i)]) {
                ++y[std::size_t(i)];
                break;
            }
            y[std::size_t(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

BoxMap truncated_pmf_map(const DistSpec& law, const std::vector<int>& bounds) {
    BoxMap m = zero_map(bounds);
    KahanSum covered;
    box_for_each(bounds, [&](const std::vector<int>& y, std::size_t idx) {
        double pr = pmf(law, y);
        m.v[idx] = pr;
        covered.add(pr);
    });
    m.deficiency = std::max(0.0, 1.0 - covered.value());
    return m;
}

}  // namespace

BoxMap immigration_law(const PoissonQueueSpec& spec, const std::vector<int>& bounds) {
    std::vector<double> means(spec.mu);
    for (double& v : means) v *= (1.0 - spec.xi_norm);
    if (spec.xi_norm >= 1.0 - 1e-15) {
        BoxMap m = zero_map(bounds);
        m.v[0] = 1.0;
        return m;
    }
    return truncated_pmf_map(DistSpec::poisson_product(means), bounds);
}

BoxMap individual_law(const PoissonQueueSpec& spec, int type, const std::vector<int>& bounds) {
    BoxMap m = zero_map(bounds);
    int d = spec.dim();
    std::vector<int> y(std::size_t(d), 0);
    m.v[m.offset(y)] += 1.0 - spec.xi_norm;
    for (int j = 0; j < d; ++j) {
        y.assign(std::size_t(d), 0);
        y[std::size_t(j)] = 1;
        if (m.contains(y))
            m.v[m.offset(y)] += spec.xi_norm * spec.p_cond[std::size_t(type)][std::size_t(j)];
    }
    KahanSum covered;
    for (double v : m.v) covered.add(v);
    m.deficiency = std::max(0.0, 1.0 - covered.value());
    return m;
}

BoxMap immigration_law(const NbBranchSpec& spec, const std::vector<int>& bounds) {
    if (spec.kappa <= 0.0) {
        BoxMap m = zero_map(bounds);
        m.v[0] = 1.0;
        return m;
    }
    double theta_imm = spec.kappa / (1.0 - spec.kappa);
    return truncated_pmf_map(DistSpec::meixner(spec.alpha, theta_imm, spec.p), bounds);
}

BoxMap individual_law(const NbBranchSpec& spec, int type, const std::vector<int>& bounds) {
    BoxMap m = zero_map(bounds);
    int d = spec.dim();
    std::vector<int> zero(std::size_t(d), 0);
    m.v[m.offset(zero)] += 1.0 - spec.beta;
    KahanSum covered;
    covered.add(1.0 - spec.beta);
    if (spec.beta > 0.0) {
        BoxMap burst = (spec.kappa > 0.0)
                           ? truncated_pmf_map(DistSpec::meixner(1.0, spec.kappa / (1.0 - spec.kappa),
                                                                 spec.p),
                                               bounds)
                           : [&] {
                                 BoxMap b = zero_map(bounds);
                                 b.v[0] = 1.0;
                                 return b;
                             }();
        box_for_each(bounds, [&](const std::vector<int>& g, std::size_t gidx) {
            double pg = burst.v[gidx];
            if (pg == 0.0) return;
            std::vector<int> y(g);
            for (int j = 0; j < d; ++j) {
                ++y[std::size_t(j)];
                if (m.contains(y)) {
                    double pr = spec.beta * spec.q[std::size_t(type)][std::size_t(j)] * pg;
                    m.v[m.offset(y)] += pr;
                    covered.add(pr);
                }
                --y[std::size_t(j)];
            }
        });
    }
    m.deficiency = std::max(0.0, 1.0 - covered.value());
    return m;
}

BoxMap convolve(const BoxMap& a, const BoxMap& b) {
    BoxMap out = zero_map(a.bounds);
    std::size_t n = a.v.size();
    int d = int(a.bounds.size());
    // supports of a and b are scanned; sums landing outside the box are lost mass
    std::vector<int> xa(a.bounds.size(), 0);
    for (std::size_t ia = 0; ia < n; ++ia) {
        double pa = a.v[ia];
        if (pa != 0.0) {
            std::vector<int> room(a.bounds);
            for (int i = 0; i < d; ++i) room[std::size_t(i)] -= xa[std::size_t(i)];
            // iterate b restricted to the room box
            std::vector<int> xb(b.bounds.size(), 0);
            while (true) {
                bool inside = true;
                for (int i = 0; i < d; ++i)
                    if (xb[std::size_t(i)] > room[std::size_t(i)]) {
                        inside = false;
                        break;
                    }
                if (inside) {
                    double pb = b.v[b.offset(xb)];
                    if (pb != 0.0) {
                        std::vector<int> y(static_cast<std::size_t>(d));
                        for (int i = 0; i < d; ++i) y[std::size_t(i)] = xa[std::size_t(i)] + xb[std::size_t(i)];
                        out.v[out.offset(y)] += pa * pb;
                    }
                }
                int i = d - 1;
                while (i >= 0) {
                    if (xb[std::size_t(i)] < std::min(b.bounds[std::size_t(i)], room[std::size_t(i)])) {
                        ++xb[std::size_t(i)];
                        break;
                    }
                    xb[std::size_t(i)] = 0;
                    --i;
                }
                if (i < 0) break;
            }
        }
        // advance xa odometer
        int i = d - 1;
        while (i >= 0) {
            if (xa[std::size_t(i)] < a.bounds[std::size_t(i)]) {
                ++xa[std::size_t(i)];
                break;
            }
            xa[std::size_t(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
    KahanSum covered;
    for (double v : out.v) covered.add(v);
    out.deficiency = std::max(0.0, 1.0 - covered.value());
    return out;
}

template <typename Kernel>
std::vector<BoxMap> one_step_laws(const Kernel& kernel, const std::vector<std::vector<int>>& xs,
                                  const std::vector<int>& bounds) {
    int d = int(bounds.size());
    std::vector<BoxMap> ind;
    for (int i = 0; i < d; ++i) ind.push_back(individual_law(kernel, i, bounds));

    // law(x) = law(x - e_i) * ind_i, built down from the first nonzero coordinate;
    // the zero state carries the immigration law alone.
    std::map<std::vector<int>, BoxMap> cache;
    cache[std::vector<int>(std::size_t(d), 0)] = immigration_law(kernel, bounds);
    auto first_nonzero = [&](const std::vector<int>& v) {
        int i = 0;
        while (i < d && v[std::size_t(i)] == 0) ++i;
        return i;
    };

    std::vector<BoxMap> out(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        std::vector<std::vector<int>> path;
        std::vector<int> cur(xs[k]);
        while (cache.find(cur) == cache.end()) {
            path.push_back(cur);
            --cur[std::size_t(first_nonzero(cur))];
        }
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            std::vector<int> pred(*it);
            int i = first_nonzero(pred);
            --pred[std::size_t(i)];
            cache[*it] = convolve(cache.at(pred), ind[std::size_t(i)]);
        }
        out[k] = cache.at(xs[k]);
    }
    return out;
}

template std::vector<BoxMap> one_step_laws<PoissonQueueSpec>(const PoissonQueueSpec&,
                                                             const std::vector<std::vector<int>>&,
                                                             const std::vector<int>&);
template std::vector<BoxMap> one_step_laws<NbBranchSpec>(const NbBranchSpec&,
                                                         const std::vector<std::vector<int>>&,
                                                         const std::vector<int>&);

template <typename Kernel>
std::vector<EigenCheckRow> discrete_eigen_check(const Kernel& kernel, const Basis& basis,
                                                const PolySystem& sys, int max_degree,
                                                const std::vector<std::vector<int>>& xgrid,
                                                const std::vector<int>& bounds) {
    auto laws = one_step_laws(kernel, xgrid, bounds);
    auto idx = indices_up_to(sys.dim(), max_degree);
    // P_n at every box point (box enumeration order matches the dense layout)
    std::vector<std::vector<int>> ypts;
    box_for_each(bounds, [&](const std::vector<int>& y, std::size_t) { ypts.push_back(y); });
    std::vector<std::vector<double>> pn(idx.size(), std::vector<double>(ypts.size()));
    for (std::size_t yi = 0; yi < ypts.size(); ++yi) {
        std::vector<double> yr(ypts[yi].begin(), ypts[yi].end());
        auto vals = mv_eval_all(sys, max_degree, yr);
        for (std::size_t k = 0; k < idx.size(); ++k) pn[k][yi] = vals[k];
    }

    std::vector<EigenCheckRow> rows;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        EigenCheckRow row;
        row.n = idx[k];
        if constexpr (std::is_same_v<Kernel, PoissonQueueSpec>) {
            row.value_theory = kernel.rho(idx[k]);
        } else {
            row.value_theory = nb_branch_rho(kernel, basis, idx[k]);
        }
        double best_scale = 0.0;
        double worst = 0.0;
        for (std::size_t xk = 0; xk < xgrid.size(); ++xk) {
            std::vector<double> xr(xgrid[xk].begin(), xgrid[xk].end());
            double pnx = mv_eval(sys, idx[k], xr);
            KahanSum e;
            for (std::size_t yi = 0; yi < ypts.size(); ++yi)
                e.add(laws[xk].v[yi] * pn[k][yi]);
            double resid = std::abs(e.value() - row.value_theory * pnx) / std::max(1.0, std::abs(pnx));
            worst = std::max(worst, resid);
            if (std::abs(pnx) > best_scale) {
                best_scale = std::abs(pnx);
                row.value_measured = e.value() / pnx;
            }
        }
        row.residual = worst;
        rows.push_back(row);
    }
    return rows;
}

template std::vector<EigenCheckRow> discrete_eigen_check<PoissonQueueSpec>(
    const PoissonQueueSpec&, const Basis&, const PolySystem&, int,
    const std::vector<std::vector<int>>&, const std::vector<int>&);
template std::vector<EigenCheckRow> discrete_eigen_check<NbBranchSpec>(
    const NbBranchSpec&, const Basis&, const PolySystem&, int,
    const std::vector<std::vector<int>>&, const std::vector<int>&);

// ---------- continuous-time generators ----------

CtPoissonSpec CtPoissonSpec::make(Basis basis, std::vector<double> mu, double nu,
                                  std::vector<double> gamma) {
    if (!(nu >= 0.0)) throw NegativeRate(-1, -1, "ct poisson: nu >= 0");
    if (!gamma.empty() && int(gamma.size()) != basis.dim() - 1)
        throw DomainMismatch("ct poisson: gamma needs d-1 entries");
    for (double g : gamma)
        if (g < 0.0) throw NegativeRate(-1, -1, "ct poisson: gamma >= 0");
    CtPoissonSpec s;
    s.basis = std::move(basis);
    s.mu = std::move(mu);
    s.nu = nu;
    s.gamma = std::move(gamma);
    return s;
}

double CtPoissonSpec::lambda_theory(const MultiIndex& n) const {
    double v = nu * degree_of(n);
    for (int j = 1; j < dim(); ++j) {
        KahanSum tj;
        for (std::size_t l = 0; l < gamma.size(); ++l)
            tj.add(gamma[l] * (1.0 - basis.u[std::size_t(j)][l]));
        v += n[std::size_t(j)] * tj.value();
    }
    return v;
}

CtMeixnerSpec CtMeixnerSpec::make(Basis basis, double alpha, double theta, double nu,
                                  std::vector<double> gamma) {
    if (!(nu >= 0.0)) throw NegativeRate(-1, -1, "ct meixner: nu >= 0");
    if (int(gamma.size()) != basis.dim() - 1)
        throw DomainMismatch("ct meixner: gamma needs d-1 entries");
    for (double g : gamma)
        if (g < 0.0) throw NegativeRate(-1, -1, "ct meixner: gamma >= 0");
    CtMeixnerSpec s;
    s.basis = std::move(basis);
    s.alpha = alpha;
    s.theta = theta;
    s.nu = nu;
    s.gamma = std::move(gamma);
    return s;
}

double CtMeixnerSpec::lambda_theory(const MultiIndex& n) const {
    double v = nu * degree_of(n);
    for (int j = 1; j < dim(); ++j) {
        KahanSum tj;
        for (std::size_t l = 0; l < gamma.size(); ++l)
            tj.add(gamma[l] * (1.0 - basis.u[std::size_t(j)][l]));
        v += n[std::size_t(j)] * tj.value();
    }
    return v;
}

int TruncatedGenerator::state_index(const std::vector<int>& x) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (x[i] < 0 || x[i] > bounds[i]) return -1;
        o = o * std::size_t(bounds[i] + 1) + std::size_t(x[i]);
    }
    // states enumerated in the same mixed-radix order
    return int(o);
}

namespace {

// type change rate factors c[i][j] = p_j sum_l gamma_l s(i,j,l) (l over first d-1 states)
std::vector<std::vector<double>> type_change_rates(const Basis& basis,
                                                   const std::vector<double>& gamma) {
    int d = basis.dim();
    auto tensor = hypergroup_tensor(basis);
    std::vector<std::vector<double>> c(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            KahanSum s;
            for (std::size_t l = 0; l < gamma.size(); ++l) s.add(gamma[l] * tensor.at(i, j, int(l)));
            c[std::size_t(i)][std::size_t(j)] = basis.p[std::size_t(j)] * s.value();
        }
    return c;
}

template <typename MoveBuilder>
TruncatedGenerator assemble_generator(const std::vector<int>& bounds, MoveBuilder&& builder) {
    TruncatedGenerator gen;
    gen.bounds = bounds;
    box_for_each(bounds, [&](const std::vector<int>& x, std::size_t) {
        gen.states.push_back(x);
    });
    gen.rows.resize(gen.states.size());
    gen.diag.assign(gen.states.size(), 0.0);
    gen.interior.assign(gen.states.size(), true);
    for (std::size_t k = 0; k < gen.states.size(); ++k) {
        const auto& x = gen.states[k];
        std::vector<GeneratorMove> moves = builder(x);
        double outflow = 0.0;
        for (const auto& mv : moves) {
            if (mv.rate == 0.0) continue;
            outflow += mv.rate;
            std::vector<int> y(x);
            if (mv.from >= 0) --y[std::size_t(mv.from)];
            if (mv.to >= 0) ++y[std::size_t(mv.to)];
            int target = gen.state_index(y);
            if (target < 0) gen.interior[k] = false;
            GeneratorMove stored = mv;
            gen.rows[k].push_back(stored);
        }
        gen.diag[k] = -outflow;
    }
    return gen;
}

}  // namespace

TruncatedGenerator build_ct_generator(const CtPoissonSpec& spec, const LatticeSlab& slab) {
    int d = spec.dim();
    auto tc = spec.gamma.empty() ? std::vector<std::vector<double>>(
                                       std::size_t(d), std::vector<double>(std::size_t(d), 0.0))
                                 : type_change_rates(spec.basis, spec.gamma);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (tc[std::size_t(i)][std::size_t(j)] < -1e-12)
                throw NegativeRate(i, j, "ct poisson: negative type-change rate");
    double mu_tot = sum_of(spec.mu);
    return assemble_generator(slab.bounds, [&](const std::vector<int>& x) {
        std::vector<GeneratorMove> moves;
        for (int j = 0; j < d; ++j)
            moves.push_back({-1, j, spec.nu * mu_tot * spec.basis.p[std::size_t(j)]});
        for (int i = 0; i < d; ++i)
            if (x[std::size_t(i)] > 0) {
                moves.push_back({i, -1, spec.nu * x[std::size_t(i)]});
                for (int j = 0; j < d; ++j)
                    if (j != i)
                        moves.push_back({i, j, x[std::size_t(i)] * tc[std::size_t(i)][std::size_t(j)]});
            }
        return moves;
    });
}

TruncatedGenerator build_ct_generator(const CtMeixnerSpec& spec, const LatticeSlab& slab) {
    int d = spec.dim();
    auto tc = type_change_rates(spec.basis, spec.gamma);
    // r_{j|i} = |gamma| ptilde_{j|i} - theta nu p_j
    std::vector<std::vector<double>> rr(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = tc[std::size_t(i)][std::size_t(j)] -
                       spec.theta * spec.nu * spec.basis.p[std::size_t(j)];
            if (j != i && v < -1e-12)
                throw NegativeRate(i, j, "ct meixner: r_{j|i} = " + std::to_string(v));
            rr[std::size_t(i)][std::size_t(j)] = std::max(0.0, v);
        }
    return assemble_generator(slab.bounds, [&](const std::vector<int>& x) {
        std::vector<GeneratorMove> moves;
        int tot = isum_of(x);
        for (int j = 0; j < d; ++j)
            moves.push_back({-1, j, spec.theta * spec.nu * (spec.alpha + tot) *
                                        spec.basis.p[std::size_t(j)]});
        for (int i = 0; i < d; ++i)
            if (x[std::size_t(i)] > 0) {
                moves.push_back({i, -1, spec.nu * (1.0 + spec.theta) * x[std::size_t(i)]});
                for (int j = 0; j < d; ++j)
                    if (j != i)
                        moves.push_back({i, j, x[std::size_t(i)] * rr[std::size_t(i)][std::size_t(j)]});
            }
        return moves;
    });
}

std::vector<EigenCheckRow> spectral_check(const TruncatedGenerator& gen, const PolySystem& sys,
                                          int max_degree,
                                          const std::vector<double>& lambda_theory) {
    auto idx = indices_up_to(sys.dim(), max_degree);
    std::vector<std::vector<double>> pn(idx.size(), std::vector<double>(gen.states.size()));
    for (std::size_t s = 0; s < gen.states.size(); ++s) {
        std::vector<double> xr(gen.states[s].begin(), gen.states[s].end());
        auto vals = mv_eval_all(sys, max_degree, xr);
        for (std::size_t k = 0; k < idx.size(); ++k) pn[k][s] = vals[k];
    }
    std::vector<EigenCheckRow> rows;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        EigenCheckRow row;
        row.n = idx[k];
        row.value_theory = lambda_theory[k];
        double worst = 0.0;
        double num = 0.0, den = 0.0;
        for (std::size_t s = 0; s < gen.states.size(); ++s) {
            if (!gen.interior[s]) continue;
            KahanSum g;
            g.add(gen.diag[s] * pn[k][s]);
            for (const auto& mv : gen.rows[s]) {
                std::vector<int> y(gen.states[s]);
                if (mv.from >= 0) --y[std::size_t(mv.from)];
                if (mv.to >= 0) ++y[std::size_t(mv.to)];
                g.add(mv.rate * pn[k][std::size_t(gen.state_index(y))]);
            }
            double gv = g.value();
            worst = std::max(worst, std::abs(gv + row.value_theory * pn[k][s]) /
                                        std::max(1.0, std::abs(pn[k][s])));
            num += -gv * pn[k][s];
            den += pn[k][s] * pn[k][s];
        }
        row.residual = worst;
        row.value_measured = (den > 0.0) ? num / den : 0.0;
        rows.push_back(row);
    }
    return rows;
}

double generator_stationarity_residual(const TruncatedGenerator& gen, const DistSpec& pi) {
    // inflow sums land exactly for columns whose every potential source is a state
    std::vector<double> pmass(gen.states.size());
    for (std::size_t s = 0; s < gen.states.size(); ++s) pmass[s] = pmf(pi, gen.states[s]);
    std::vector<double> col(gen.states.size(), 0.0);
    for (std::size_t s = 0; s < gen.states.size(); ++s) {
        col[s] += pmass[s] * gen.diag[s];
        for (const auto& mv : gen.rows[s]) {
            std::vector<int> y(gen.states[s]);
            if (mv.from >= 0) --y[std::size_t(mv.from)];
            if (mv.to >= 0) ++y[std::size_t(mv.to)];
            int t = gen.state_index(y);
            if (t >= 0) col[std::size_t(t)] += pmass[s] * mv.rate;
        }
    }
    KahanSum l1;
    for (std::size_t s = 0; s < gen.states.size(); ++s) {
        // a column is exact when y + e_i (all i) are inside the box
        bool exact = true;
        for (std::size_t i = 0; i < gen.bounds.size(); ++i)
            if (gen.states[s][i] + 1 > gen.bounds[i]) exact = false;
        if (exact) l1.add(std::abs(col[s]));
    }
    return l1.value();
}

double lumped_rate_residual(const TruncatedGenerator& gen, double b0, double b1, double d1) {
    double worst = 0.0;
    for (std::size_t s = 0; s < gen.states.size(); ++s) {
        int tot = isum_of(gen.states[s]);
        double up = 0.0, down = 0.0;
        for (const auto& mv : gen.rows[s]) {
            if (mv.from < 0 && mv.to >= 0) up += mv.rate;
            if (mv.from >= 0 && mv.to < 0) down += mv.rate;
        }
        worst = std::max(worst, std::abs(up - (b0 + b1 * tot)));
        worst = std::max(worst, std::abs(down - d1 * tot));
    }
    return worst;
}

}  // namespace mvop
