#include "mvop/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"
#include "mvop/report.hpp"

namespace mvop {

void SimReport::add(std::string name, double value, double target, double se) {
    SimStat s;
    s.name = std::move(name);
    s.value = value;
    s.target = target;
    s.stderr_ = se;
    s.z = (se > 0.0) ? (value - target) / se : 0.0;
    s.pass = std::abs(s.z) < 4.0;
    stats.push_back(std::move(s));
    all_pass = true;
    for (const auto& st : stats) all_pass = all_pass && st.pass;
}

std::string SimReport::to_csv() const {
    std::string out = "stat,value,target,stderr,z,pass\n";
    for (const auto& s : stats) {
        out += s.name + "," + format_double(s.value) + "," + format_double(s.target) + "," +
               format_double(s.stderr_) + "," + format_double(s.z) + "," + (s.pass ? "1" : "0") +
               "\n";
    }
    return out;
}

std::string SimReport::to_json(const std::string& model, std::uint64_t seed) const {
    std::string out = "{\n  \"schema\": 1,\n  \"model\": \"" + model + "\",\n  \"seed\": " +
                      std::to_string(seed) + ",\n  \"stats\": [\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        out += "    {\"name\": \"" + s.name + "\", \"value\": " + format_double(s.value) +
               ", \"target\": " + format_double(s.target) + ", \"stderr\": " +
               format_double(s.stderr_) + ", \"z\": " + format_double(s.z) + ", \"pass\": " +
               (s.pass ? "true" : "false") + "}";
        out += (i + 1 < stats.size()) ? ",\n" : "\n";
    }
    out += "  ],\n  \"all_pass\": ";
    out += all_pass ? "true" : "false";
    out += "\n}\n";
    return out;
}

namespace {

std::string index_name(const MultiIndex& n) {
    std::string s = "(";
    for (std::size_t i = 0; i < n.size(); ++i) {
        s += std::to_string(n[i]);
        if (i + 1 < n.size()) s += ",";
    }
    return s + ")";
}

// mean and stderr of a sample accumulated as (sum, sum of squares, count)
struct Accumulator {
    KahanSum sum, sumsq;
    long count = 0;
    void add(double v) {
        sum.add(v);
        sumsq.add(v * v);
        ++count;
    }
    double mean() const { return sum.value() / count; }
    double se() const {
        double m = mean();
        double var = std::max(0.0, sumsq.value() / count - m * m);
        return std::sqrt(var / count);
    }
};

}  // namespace

SimReport simulate_structural_poisson(const Basis& b, const MixingMeasure& m,
                                      const std::vector<double>& mu, const SimConfig& cfg) {
    int d = b.dim();
    auto params = poisson_structural_params(b, m, mu);  // throws on infeasible basis
    std::vector<double> weights;
    for (const auto& atom : m.atoms) weights.push_back(atom.w);

    PolySystem sys = PolySystem::poisson_charlier(mu, b);
    auto idx = indices_up_to(d, cfg.max_degree);
    RhoSequence rho = rho_from_measure(b, m, PolyFamily::PoissonCharlier, cfg.max_degree);

    std::size_t ni = idx.size();
    std::vector<Accumulator> acc(ni * ni);
    for (long s = 0; s < cfg.n_samples; ++s) {
        CounterRng rng(cfg.seed, std::uint64_t(s));
        int a = rng.next_categorical(weights);
        const auto& par = params[std::size_t(a)];
        std::vector<int> x(std::size_t(d), 0), y(std::size_t(d), 0);
        for (int j = 0; j < d; ++j) {
            x[std::size_t(j)] = rng.next_poisson(par.z_mean[std::size_t(j)]);
            y[std::size_t(j)] = rng.next_poisson(par.z_mean[std::size_t(j)]);
        }
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                int shared = rng.next_poisson(par.array_mean[std::size_t(j)][std::size_t(k)]);
                x[std::size_t(j)] += shared;
                y[std::size_t(k)] += shared;
            }
        std::vector<double> xr(x.begin(), x.end()), yr(y.begin(), y.end());
        auto cx = mv_eval_all(sys, cfg.max_degree, xr);
        auto cy = mv_eval_all(sys, cfg.max_degree, yr);
        for (std::size_t i = 0; i < ni; ++i)
            for (std::size_t j = 0; j < ni; ++j) acc[i * ni + j].add(cx[i] * cy[j]);
    }

    SimReport rep;
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < ni; ++j) {
            if (degree_of(idx[i]) == 0 && degree_of(idx[j]) == 0) continue;
            double target = 0.0;
            if (idx[i] == idx[j]) target = rho.at(idx[i]) * norm_h_inv(sys, idx[i]);
            const auto& a = acc[i * ni + j];
            rep.add("cross-moment " + index_name(idx[i]) + "x" + index_name(idx[j]), a.mean(),
                    target, a.se());
        }
    return rep;
}

namespace {

template <typename Spec, typename State, typename StepFn, typename CellKey>
void run_paths(const Spec& spec, const State& init, const SimConfig& cfg, StepFn&& step,
               std::map<CellKey, long>& counts, std::vector<std::pair<State, State>>& pairs) {
    (void)spec;
    for (long pth = 0; pth < cfg.n_samples; ++pth) {
        CounterRng rng(cfg.seed, std::uint64_t(pth));
        State x = init;
        State prev = x;
        for (int k = 0; k < cfg.burn_in + cfg.steps; ++k) {
            prev = x;
            x = step(x, rng);
        }
        counts[CellKey(x)] += 1;
        pairs.emplace_back(prev, x);
    }
}

void add_cell_stats(SimReport& rep, const std::map<std::vector<int>, long>& counts,
                    const DistSpec& pi, long n) {
    for (const auto& [cell, cnt] : counts) {
        double p = pmf(pi, cell);
        double expected = p * n;
        if (expected < 5.0) continue;
        double se = std::sqrt(p * (1.0 - p) / n);
        std::string name = "cell ";
        for (std::size_t i = 0; i < cell.size(); ++i)
            name += std::to_string(cell[i]) + (i + 1 < cell.size() ? "," : "");
        rep.add(name, double(cnt) / n, p, se);
    }
}

}  // namespace

SimReport simulate_chain(const PoissonQueueSpec& spec, const std::vector<int>& init,
                         const SimConfig& cfg) {
    std::map<std::vector<int>, long> counts;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
    run_paths(
        spec, init, cfg,
        [&](const std::vector<int>& x, CounterRng& rng) { return queue_sample(spec, x, rng); },
        counts, pairs);
    SimReport rep;
    add_cell_stats(rep, counts, spec.stationary(), cfg.n_samples);

    PolySystem sys = PolySystem::poisson_charlier(spec.mu, spec.basis);
    auto idx = indices_up_to(spec.dim(), cfg.max_degree);
    for (const auto& n : idx) {
        if (degree_of(n) == 0) continue;
        Accumulator num;
        for (const auto& [xa, xb] : pairs) {
            std::vector<double> xr(xa.begin(), xa.end()), yr(xb.begin(), xb.end());
            num.add(mv_eval(sys, n, xr) * mv_eval(sys, n, yr));
        }
        double target = spec.rho(n) * norm_h_inv(sys, n);
        rep.add("eigen " + index_name(n), num.mean(), target, num.se());
    }
    return rep;
}

SimReport simulate_chain(const NbBranchSpec& spec, const Basis& basis,
                         const std::vector<int>& init, const SimConfig& cfg) {
    std::map<std::vector<int>, long> counts;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
    run_paths(
        spec, init, cfg,
        [&](const std::vector<int>& x, CounterRng& rng) { return nb_branch_sample(spec, x, rng); },
        counts, pairs);
    SimReport rep;
    add_cell_stats(rep, counts, spec.stationary(), cfg.n_samples);

    PolySystem sys = PolySystem::meixner(spec.alpha, spec.theta(), basis);
    auto idx = indices_up_to(spec.dim(), cfg.max_degree);
    for (const auto& n : idx) {
        if (degree_of(n) == 0) continue;
        Accumulator num;
        for (const auto& [xa, xb] : pairs) {
            std::vector<double> xr(xa.begin(), xa.end()), yr(xb.begin(), xb.end());
            num.add(mv_eval(sys, n, xr) * mv_eval(sys, n, yr));
        }
        double target = nb_branch_rho(spec, basis, n) * norm_h_inv(sys, n);
        rep.add("eigen " + index_name(n), num.mean(), target, num.se());
    }
    return rep;
}

SimReport simulate_chain(const GaussArSpec& spec, const std::vector<double>& init,
                         const SimConfig& cfg) {
    int d = spec.dim();
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    pairs.reserve(std::size_t(cfg.n_samples));
    for (long pth = 0; pth < cfg.n_samples; ++pth) {
        CounterRng rng(cfg.seed, std::uint64_t(pth));
        std::vector<double> x = init;
        std::vector<double> prev = x;
        for (int k = 0; k < cfg.burn_in + cfg.steps; ++k) {
            prev = x;
            x = gauss_ar_step(spec, x, rng);
        }
        pairs.emplace_back(prev, x);
    }
    SimReport rep;
    double tt = sum_of(spec.tau);
    // hat-coordinate correlations; the prev state is stationary after burn-in
    for (int r = 0; r < d; ++r) {
        Accumulator prod;
        for (const auto& [xa, xb] : pairs) {
            double xh = hat_coords(spec.basis, xa)[std::size_t(r)];
            double yh = hat_coords(spec.basis, xb)[std::size_t(r)];
            double scale = tt * spec.basis.a[std::size_t(r)];
            prod.add(xh * yh / scale);
        }
        rep.add("hat-corr " + std::to_string(r), prod.mean(), spec.xi[std::size_t(r)], prod.se());
    }
    PolySystem sys = PolySystem::hermite(spec.tau, spec.basis);
    auto idx = indices_up_to(d, cfg.max_degree);
    for (const auto& n : idx) {
        if (degree_of(n) == 0) continue;
        Accumulator num;
        for (const auto& [xa, xb] : pairs)
            num.add(mv_eval(sys, n, xa) * mv_eval(sys, n, xb));
        double target = 1.0;
        for (int j = 0; j < d; ++j)
            for (int e = 0; e < n[std::size_t(j)]; ++e) target *= spec.xi[std::size_t(j)];
        target *= norm_h_inv(sys, n);
        rep.add("eigen " + index_name(n), num.mean(), target, num.se());
    }
    return rep;
}

namespace {

template <typename Spec>
SimReport sampler_agreement_impl(const Spec& spec, const std::vector<int>& x,
                                 const SimConfig& cfg) {
    std::map<std::vector<int>, long> counts;
    for (long s = 0; s < cfg.n_samples; ++s) {
        CounterRng rng(cfg.seed, std::uint64_t(s));
        std::vector<int> y;
        if constexpr (std::is_same_v<Spec, PoissonQueueSpec>)
            y = queue_sample(spec, x, rng);
        else
            y = nb_branch_sample(spec, x, rng);
        counts[y] += 1;
    }
    // exact one-step law on a box covering everything seen (plus margin)
    std::vector<int> bounds(x.size(), 0);
    for (const auto& [cell, cnt] : counts)
        for (std::size_t i = 0; i < cell.size(); ++i) bounds[i] = std::max(bounds[i], cell[i] + 2);
    auto laws = one_step_laws(spec, {x}, bounds);
    const BoxMap& law = laws[0];

    SimReport rep;
    for (const auto& [cell, cnt] : counts) {
        double p = law.v[law.offset(cell)];
        double expected = p * cfg.n_samples;
        if (expected < 5.0) continue;
        double se = std::sqrt(p * (1.0 - p) / cfg.n_samples);
        std::string name = "freq ";
        for (std::size_t i = 0; i < cell.size(); ++i)
            name += std::to_string(cell[i]) + (i + 1 < cell.size() ? "," : "");
        rep.add(name, double(cnt) / cfg.n_samples, p, se);
    }
    return rep;
}

}  // namespace

SimReport sampler_agreement(const PoissonQueueSpec& spec, const std::vector<int>& x,
                            const SimConfig& cfg) {
    return sampler_agreement_impl(spec, x, cfg);
}

SimReport sampler_agreement(const NbBranchSpec& spec, const std::vector<int>& x,
                            const SimConfig& cfg) {
    return sampler_agreement_impl(spec, x, cfg);
}

SimReport gillespie_ct(const CtPoissonSpec& spec, const std::vector<int>& init,
                       const SimConfig& cfg) {
    int d = spec.dim();
    double mu_tot = sum_of(spec.mu);
    auto tensor = hypergroup_tensor(spec.basis);
    std::vector<std::vector<double>> tc(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            KahanSum s;
            for (std::size_t l = 0; l < spec.gamma.size(); ++l)
                s.add(spec.gamma[l] * tensor.at(i, j, int(l)));
            tc[std::size_t(i)][std::size_t(j)] = spec.basis.p[std::size_t(j)] * s.value();
        }

    struct Event {
        int from, to;
        double rate;
    };
    auto advance = [&](std::vector<int>& x, double from_t, double to_t, CounterRng& rng) {
        double t = from_t;
        std::vector<Event> events;
        while (true) {
            events.clear();
            for (int j = 0; j < d; ++j)
                events.push_back({-1, j, spec.nu * mu_tot * spec.basis.p[std::size_t(j)]});
            for (int i = 0; i < d; ++i)
                if (x[std::size_t(i)] > 0) {
                    events.push_back({i, -1, spec.nu * x[std::size_t(i)]});
                    for (int j = 0; j < d; ++j)
                        if (j != i)
                            events.push_back({i, j, x[std::size_t(i)] * tc[std::size_t(i)][std::size_t(j)]});
                }
            double total = 0.0;
            for (const auto& e : events) total += e.rate;
            t += rng.next_exponential(total);
            if (t >= to_t) return;
            double u = rng.next_double() * total;
            double acc = 0.0;
            for (const auto& e : events) {
                acc += e.rate;
                if (u < acc) {
                    if (e.from >= 0) --x[std::size_t(e.from)];
                    if (e.to >= 0) ++x[std::size_t(e.to)];
                    break;
                }
            }
        }
    };

    // snapshots at t_horizon and 2 t_horizon for the decay estimate
    MultiIndex e1(std::size_t(d), 0);
    e1[1] = 1;
    PolySystem sys = PolySystem::poisson_charlier(spec.mu, spec.basis);
    std::map<std::vector<int>, long> counts;
    Accumulator c_t1, c_t2;
    KahanSum cross_sum;
    std::vector<Accumulator> mean_acc(static_cast<std::size_t>(d));
    for (long pth = 0; pth < cfg.n_samples; ++pth) {
        CounterRng rng(cfg.seed, std::uint64_t(pth));
        std::vector<int> x = init;
        advance(x, 0.0, cfg.t_horizon, rng);
        std::vector<double> xr(x.begin(), x.end());
        double v1 = mv_eval(sys, e1, xr);
        c_t1.add(v1);
        counts[x] += 1;
        for (int i = 0; i < d; ++i) mean_acc[std::size_t(i)].add(x[std::size_t(i)]);
        advance(x, cfg.t_horizon, 2.0 * cfg.t_horizon, rng);
        std::vector<double> yr(x.begin(), x.end());
        double v2 = mv_eval(sys, e1, yr);
        c_t2.add(v2);
        cross_sum.add(v1 * v2);
    }

    SimReport rep;
    // exact transient means through the degree-1 eigenfunctions:
    // E[xhat_r(t)] = e^{-lambda_{e_r} t} xhat_r(0) + (1 - e^{-nu t} ...) stationary part
    {
        std::vector<double> x0(init.begin(), init.end());
        std::vector<double> xh0 = hat_coords(spec.basis, x0);
        std::vector<double> xh_t(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) {
            MultiIndex er(std::size_t(d), 0);
            er[std::size_t(r)] = 1;
            double lam = spec.lambda_theory(er);
            double stat = (r == 0) ? mu_tot : 0.0;  // stationary hat means
            xh_t[std::size_t(r)] = stat + std::exp(-lam * cfg.t_horizon) * (xh0[std::size_t(r)] - stat);
        }
        for (int i = 0; i < d; ++i) {
            KahanSum s;
            for (int r = 0; r < d; ++r)
                s.add(spec.basis.u[std::size_t(r)][std::size_t(i)] / spec.basis.a[std::size_t(r)] *
                      xh_t[std::size_t(r)]);
            double target = spec.basis.p[std::size_t(i)] * s.value();
            rep.add("mean " + std::to_string(i), mean_acc[std::size_t(i)].mean(), target,
                    mean_acc[std::size_t(i)].se());
        }
    }
    // spectral prediction of the law at t_horizon, cells with expected count >= 5
    {
        auto idx = indices_up_to(d, cfg.max_degree);
        std::vector<double> x0(init.begin(), init.end());
        auto cn_x0 = mv_eval_all(sys, cfg.max_degree, x0);
        DistSpec pi = spec.stationary();
        for (const auto& [cell, cnt] : counts) {
            std::vector<double> cr(cell.begin(), cell.end());
            auto cn_y = mv_eval_all(sys, cfg.max_degree, cr);
            KahanSum bracket;
            bracket.add(1.0);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (degree_of(idx[k]) == 0) continue;
                double lam = spec.lambda_theory(idx[k]);
                bracket.add(std::exp(-lam * cfg.t_horizon) / norm_h_inv(sys, idx[k]) *
                            cn_x0[k] * cn_y[k]);
            }
            double p = pmf(pi, cell) * bracket.value();
            double expected = p * cfg.n_samples;
            if (expected < 5.0) continue;
            double se = std::sqrt(std::max(p * (1.0 - p), 1e-300) / cfg.n_samples);
            std::string name = "cell ";
            for (std::size_t i = 0; i < cell.size(); ++i)
                name += std::to_string(cell[i]) + (i + 1 < cell.size() ? "," : "");
            rep.add(name, double(cnt) / cfg.n_samples, p, se);
        }
    }
    // eigen decay: E[C_{e1}(X(2h)) C_{e1}(X(h))] / E[C_{e1}(X(h))^2]-free ratio
    {
        double lam = spec.lambda_theory(e1);
        double target = std::exp(-lam * cfg.t_horizon);
        // ratio of means measures the one-interval decay given X(h)
        double m1 = c_t1.mean();
        double m2 = c_t2.mean();
        if (std::abs(m1) > 1e-12) {
            // delta method on the ratio m2/m1 with correlated numerator/denominator
            long n = cfg.n_samples;
            double cov = cross_sum.value() / n - m1 * m2;
            double v1 = c_t1.se() * c_t1.se() * n;
            double v2 = c_t2.se() * c_t2.se() * n;
            double ratio = m2 / m1;
            double var_ratio =
                (v2 - 2.0 * ratio * cov + ratio * ratio * v1) / (m1 * m1) / n;
            rep.add("decay e1", ratio, target, std::sqrt(std::max(var_ratio, 0.0)));
        }
    }
    return rep;
}

}  // namespace mvop
