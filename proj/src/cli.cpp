#include "mvop/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <optional>

#include "mvop/dist.hpp"
#include "mvop/errors.hpp"
#include "mvop/json_io.hpp"
#include "mvop/montecarlo.hpp"
#include "mvop/numeric.hpp"
#include "mvop/report.hpp"

namespace mvop::cli {

using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0: per-check defaults
    int degree = 0;    // 0: per-check defaults
};

json load_config(const Options& opt) {
    if (opt.config_path.empty()) return json::object();
    try {
        return json::parse(read_text_file(opt.config_path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

void require_schema(const json& cfg) {
    if (!cfg.empty() && cfg.value("schema", 1) != 1) throw ConfigError("config: schema must be 1");
}

Basis basis_from_config(const json& cfg) {
    if (cfg.contains("basis")) return basis_from_json(cfg.at("basis").dump());
    std::vector<double> p = cfg.value("p", std::vector<double>{0.5, 0.5});
    Basis b = build_basis(Weights(p));
    if (cfg.value("rescale_last", true)) b = rescale_last(b);
    return b;
}

std::string index_label(const MultiIndex& n) {
    std::string s;
    for (std::size_t i = 0; i < n.size(); ++i) s += std::to_string(n[i]) + (i + 1 < n.size() ? ";" : "");
    return s;
}

void emit(const Options& opt, const std::string& command, const std::vector<CheckRow>& rows,
          const std::vector<std::pair<std::string, std::string>>& artifacts, std::ostream& out) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    write_file(opt.out_dir + "/report.json", checks_to_json(command, opt.seed, rows));
    write_file(opt.out_dir + "/checks.csv", checks_to_csv(rows));
    for (const auto& [name, content] : artifacts) write_file(opt.out_dir + "/" + name, content);
    print_summary(out, rows);
}

// ---- subcommand payloads ----

std::vector<CheckRow> run_basis(const json& cfg, const Options& opt,
                                std::vector<std::pair<std::string, std::string>>& artifacts) {
    Basis b = basis_from_config(cfg);
    double tol = opt.tol > 0 ? opt.tol : 1e-10;
    std::vector<CheckRow> rows;
    rows.push_back(CheckRow::of("basis-orthogonality", b.orthogonality_residual(), tol));
    artifacts.emplace_back("basis.json", basis_to_json(b));
    return rows;
}

std::vector<CheckRow> run_hypergroup(const json& cfg, const Options& opt,
                                     std::vector<std::pair<std::string, std::string>>& artifacts) {
    Basis b = basis_from_config(cfg);
    double tol = opt.tol > 0 ? opt.tol : 1e-10;
    auto t = hypergroup_tensor(b, tol);
    int d = b.dim();
    double marg = 0.0;
    for (int l = 0; l < d; ++l) {
        KahanSum s;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                s.add(b.p[std::size_t(j)] * b.p[std::size_t(k)] * t.at(j, k, l));
        marg = std::max(marg, std::abs(s.value() - 1.0));
    }
    std::vector<CheckRow> rows;
    rows.push_back(CheckRow::of("hypergroup-marginal-identity", marg, tol));
    rows.push_back(CheckRow::flag("hypergroup-feasible", t.feasible));
    std::string csv = "j,k,l,s\n";
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
                csv += std::to_string(j) + "," + std::to_string(k) + "," + std::to_string(l) +
                       "," + format_double(t.at(j, k, l)) + "\n";
    artifacts.emplace_back("tensor.csv", csv);
    artifacts.emplace_back(
        "summary.csv", "min_entry,feasible\n" + format_double(t.min_entry) + "," +
                           (t.feasible ? std::string("1") : std::string("0")) + "\n");
    return rows;
}

PolySystem system_from_config(const json& cfg, const std::string& family, const Basis& b) {
    if (family == "krawtchouk") return PolySystem::krawtchouk(cfg.value("N", 4), b);
    if (family == "charlier")
        return PolySystem::poisson_charlier(cfg.value("mu", std::vector<double>{1.0, 1.0}), b);
    if (family == "meixner")
        return PolySystem::meixner(cfg.value("alpha", 1.5), cfg.value("theta", 0.7), b);
    if (family == "hermite")
        return PolySystem::hermite(cfg.value("tau", std::vector<double>{0.5, 0.5}), b);
    throw ConfigError("orthogonality: unknown family " + family);
}

std::vector<CheckRow> run_orthogonality(const json& cfg, const Options& opt,
                                        std::vector<std::pair<std::string, std::string>>& artifacts) {
    std::string family = cfg.value("family", "charlier");
    std::vector<double> p;
    if (family == "charlier") {
        auto mu = cfg.value("mu", std::vector<double>{1.0, 1.0});
        double tot = sum_of(mu);
        for (double v : mu) p.push_back(v / tot);
    } else if (family == "hermite") {
        auto tau = cfg.value("tau", std::vector<double>{0.5, 0.5});
        double tot = sum_of(tau);
        for (double v : tau) p.push_back(v / tot);
    } else {
        p = cfg.value("p", std::vector<double>{0.5, 0.5});
    }
    Basis b = rescale_last(build_basis(Weights(p)));
    PolySystem sys = system_from_config(cfg, family, b);
    int degree = opt.degree > 0 ? opt.degree : cfg.value("degree", 3);
    double eps = cfg.value("epsilon", 1e-12);

    std::vector<CheckRow> rows;
    std::string csv = "m,n,expected,measured,residual\n";
    if (family == "hermite") {
        // Monte Carlo orthogonality with CLT error bars
        long n_samples = cfg.value("n_samples", 200000L);
        auto idx = indices_up_to(sys.dim(), degree);
        std::vector<std::vector<double>> vals(idx.size());
        DistSpec pi = DistSpec::normal_product(sys.tau);
        (void)pi;
        std::vector<double> sums(idx.size() * idx.size(), 0.0),
            sumsq(idx.size() * idx.size(), 0.0);
        for (long s = 0; s < n_samples; ++s) {
            CounterRng rng(opt.seed, std::uint64_t(s));
            std::vector<double> x(static_cast<std::size_t>(sys.dim()));
            for (int i = 0; i < sys.dim(); ++i)
                x[std::size_t(i)] = std::sqrt(sys.tau[std::size_t(i)]) * rng.next_normal();
            auto v = mv_eval_all(sys, degree, x);
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t c = a; c < idx.size(); ++c) {
                    double pr = v[a] * v[c];
                    sums[a * idx.size() + c] += pr;
                    sumsq[a * idx.size() + c] += pr * pr;
                }
        }
        double worst_z = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t c = a; c < idx.size(); ++c) {
                double mean = sums[a * idx.size() + c] / n_samples;
                double var = std::max(0.0, sumsq[a * idx.size() + c] / n_samples - mean * mean);
                double se = std::sqrt(var / n_samples);
                double target = (idx[a] == idx[c]) ? norm_h_inv(sys, idx[a]) : 0.0;
                double z = se > 0 ? std::abs(mean - target) / se : 0.0;
                worst_z = std::max(worst_z, z);
                csv += index_label(idx[a]) + "," + index_label(idx[c]) + "," +
                       format_double(target) + "," + format_double(mean) + "," +
                       format_double(z) + "\n";
            }
        rows.push_back(CheckRow::of("hermite-orthogonality-worst-z", worst_z, 4.0));
    } else {
        DistSpec ambient =
            (family == "krawtchouk")
                ? DistSpec::multinomial(sys.N, b.p)
                : (family == "charlier" ? DistSpec::poisson_product(sys.mu)
                                        : DistSpec::meixner(sys.alpha, sys.theta, b.p));
        int margin = (family == "krawtchouk") ? 0 : (family == "meixner" ? 35 : 12);
        LatticeSlab slab = expand(slab_for(ambient, eps), margin);
        int slots = (family == "krawtchouk") ? sys.dim() - 1 : sys.dim();
        auto idx = indices_up_to(slots, degree);
        std::vector<KahanSum> gram(idx.size() * idx.size());
        for_each_point(slab, [&](const std::vector<int>& xi) {
            std::vector<double> xr(xi.begin(), xi.end());
            double w = pmf(ambient, xi);
            auto v = mv_eval_all(sys, degree, xr);
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t c = a; c < idx.size(); ++c)
                    gram[a * idx.size() + c].add(w * v[a] * v[c]);
        });
        double tol = opt.tol > 0 ? opt.tol : (family == "meixner" ? 1e-7 : 1e-8);
        double worst = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t c = a; c < idx.size(); ++c) {
                if (family == "krawtchouk" && (degree_of(idx[a]) > sys.N || degree_of(idx[c]) > sys.N))
                    continue;
                double target = (idx[a] == idx[c]) ? norm_h_inv(sys, idx[a]) : 0.0;
                double got = gram[a * idx.size() + c].value();
                double resid = std::abs(got - target) / std::max(1.0, std::abs(target));
                worst = std::max(worst, resid);
                csv += index_label(idx[a]) + "," + index_label(idx[c]) + "," +
                       format_double(target) + "," + format_double(got) + "," +
                       format_double(resid) + "\n";
            }
        rows.push_back(CheckRow::of(family + "-orthogonality", worst, tol));
        // norm table export
        std::string norms = "n,h_inv\n";
        auto nt = norm_table(sys, degree);
        for (std::size_t k = 0; k < nt.index.size(); ++k)
            norms += index_label(nt.index[k]) + "," + format_double(nt.h_inv[k]) + "\n";
        artifacts.emplace_back("norms.csv", norms);
    }
    artifacts.emplace_back("residuals.csv", csv);
    return rows;
}

std::vector<CheckRow> run_limits(const Options& opt,
                                 std::vector<std::pair<std::string, std::string>>& artifacts) {
    (void)opt;
    auto rep = verify_limits();
    std::vector<CheckRow> rows;
    std::string csv = "limit,param,max_diff\n";
    for (const auto& row : rep.rows) {
        for (std::size_t k = 0; k < row.params.size(); ++k)
            csv += row.name + "," + format_double(row.params[k]) + "," +
                   format_double(row.max_diff[k]) + "\n";
        rows.push_back(CheckRow::of(row.name + "-final", row.max_diff.back(), row.threshold));
        rows.push_back(CheckRow::flag(row.name + "-monotone", row.monotone));
    }
    artifacts.emplace_back("limits.csv", csv);
    return rows;
}

std::vector<CheckRow> run_lancaster_build(const json& cfg, const Options& opt,
                                          std::vector<std::pair<std::string, std::string>>& artifacts) {
    std::string family = cfg.value("family", "poisson");
    Basis b = basis_from_config(cfg);
    MixingMeasure m = measure_from_json(cfg.at("measure").dump());
    int degree = opt.degree > 0 ? opt.degree : cfg.value("degree", 8);
    double eps = cfg.value("epsilon", 1e-12);
    std::vector<CheckRow> rows;
    if (family == "normal") {
        auto tau = cfg.value("tau", std::vector<double>{0.5, 0.5});
        PolySystem sys = PolySystem::hermite(tau, b);
        LancasterLaw law = LancasterLaw::from_measure(sys, m, degree);
        std::vector<std::vector<double>> grid;
        for (double x0 = -2.0; x0 <= 2.01; x0 += 1.0)
            for (double x1 = -2.0; x1 <= 2.01; x1 += 1.0) grid.push_back({x0, x1});
        auto t = assemble_joint_grid(law, grid);
        rows.push_back(CheckRow::of("joint-min-value", -t.min_value,
                                    opt.tol > 0 ? opt.tol : 1e-8));
        return rows;
    }
    PolySystem sys = (family == "poisson")
                         ? PolySystem::poisson_charlier(
                               cfg.value("mu", std::vector<double>{1.0, 1.0}), b)
                         : PolySystem::meixner(cfg.value("alpha", 1.5), cfg.value("theta", 0.7), b);
    LancasterLaw law = LancasterLaw::from_measure(sys, m, degree);
    DistSpec ambient = (family == "poisson")
                           ? DistSpec::poisson_product(sys.mu)
                           : DistSpec::meixner(sys.alpha, sys.theta, b.p);
    auto t = assemble_joint(law, slab_for(ambient, eps));
    double tol = opt.tol > 0 ? opt.tol : 1e-8;
    rows.push_back(CheckRow::of("joint-min-value", -t.min_value, tol));
    rows.push_back(CheckRow::of("joint-marginal-residual", t.marginal_residual, tol));
    rows.push_back(CheckRow::of("joint-mass-deficit", std::abs(1.0 - t.total_mass),
                                std::max(1e-6, 4.0 * eps + 2.0 * t.last_shell_max)));
    std::string csv;
    for (std::size_t i = 0; i < t.points[0].size(); ++i) csv += "x" + std::to_string(i) + ",";
    for (std::size_t i = 0; i < t.points[0].size(); ++i) csv += "y" + std::to_string(i) + ",";
    csv += "value\n";
    for (std::size_t xi = 0; xi < t.points.size(); ++xi)
        for (std::size_t yi = 0; yi < t.points.size(); ++yi) {
            for (int v : t.points[xi]) csv += std::to_string(v) + ",";
            for (int v : t.points[yi]) csv += std::to_string(v) + ",";
            csv += format_double(t.at(int(xi), int(yi))) + "\n";
        }
    artifacts.emplace_back("joint.csv", csv);
    return rows;
}

std::vector<CheckRow> run_feasibility(const json& cfg, const Options& opt,
                                      std::vector<std::pair<std::string, std::string>>& artifacts) {
    Basis b = basis_from_config(cfg);
    double theta = cfg.value("theta", 0.7);
    MixingMeasure m = measure_from_json(cfg.at("measure").dump());
    auto rep = meixner_feasibility(b, m, theta);
    std::vector<CheckRow> rows;
    std::string csv = "atom,xi_norm,min_slack,strong_min_slack,pass\n";
    double worst_roundtrip = 0.0;
    for (std::size_t k = 0; k < rep.atoms.size(); ++k) {
        const auto& ar = rep.atoms[k];
        csv += std::to_string(k) + "," + format_double(ar.xi_norm) + "," +
               format_double(ar.min_slack) + "," + format_double(ar.strong_min_slack) + "," +
               (ar.pass ? "1" : "0") + "\n";
        if (ar.pass && !ar.independence) {
            const auto& atom = m.atoms[k];
            std::vector<double> omega(atom.xi);
            for (double& v : omega) v /= ar.xi_norm;
            auto pc = conditional_type_law(b, omega);
            auto bm = map_to_branching(theta, ar.xi_norm, b.p, pc);
            auto inv = branching_inverse(bm.beta, bm.kappa, b.p, bm.q);
            double resid = std::abs(inv.theta - theta) + std::abs(inv.xi_norm - ar.xi_norm);
            for (int i = 0; i < b.dim(); ++i)
                for (int j = 0; j < b.dim(); ++j)
                    resid = std::max(resid, std::abs(inv.p_cond[std::size_t(i)][std::size_t(j)] -
                                                     pc[std::size_t(i)][std::size_t(j)]));
            worst_roundtrip = std::max(worst_roundtrip, resid);
        }
    }
    bool expect = cfg.value("expect_feasible", true);
    rows.push_back(CheckRow::flag("feasibility-verdict", rep.pass == expect));
    rows.push_back(CheckRow::of("branching-map-roundtrip", worst_roundtrip,
                                opt.tol > 0 ? opt.tol : 1e-12));
    artifacts.emplace_back("feasibility.csv", csv);
    return rows;
}

std::vector<CheckRow> run_contingency(const json& cfg, const Options& opt,
                                      std::vector<std::pair<std::string, std::string>>& artifacts) {
    int N = cfg.value("N", 2);
    auto cells = cfg.value("cells", std::vector<std::vector<double>>{{0.375, 0.125},
                                                                     {0.125, 0.375}});
    auto res = contingency_joint(N, cells);
    std::vector<CheckRow> rows;
    rows.push_back(CheckRow::of("contingency-expansion-residual", res.residual,
                                opt.tol > 0 ? opt.tol : 1e-10));
    std::string csv = "k,rho\n";
    for (std::size_t k = 0; k < res.decomp.rho.size(); ++k)
        csv += std::to_string(k + 1) + "," + format_double(res.decomp.rho[k]) + "\n";
    artifacts.emplace_back("canonical.csv", csv);
    return rows;
}

std::vector<CheckRow> run_poisson_array(const json& cfg, const Options& opt,
                                        std::vector<std::pair<std::string, std::string>>& artifacts) {
    auto mu_cells = cfg.value("mu_cells", std::vector<std::vector<double>>{{1.5, 0.5},
                                                                           {0.5, 1.5}});
    double eps = cfg.value("epsilon", 1e-12);
    int degree = opt.degree > 0 ? opt.degree : cfg.value("degree", 8);
    auto res = poisson_array_joint(mu_cells, eps, degree);
    double mu_total = 0.0;
    for (const auto& row : mu_cells)
        for (double v : row) mu_total += v;
    std::vector<CheckRow> rows;
    rows.push_back(CheckRow::of("array-expansion-net-residual", res.residual_net,
                                opt.tol > 0 ? opt.tol : 1e-6));
    double cross_target = res.decomp.rho.empty() ? 0.0 : res.decomp.rho[0] / mu_total;
    rows.push_back(
        CheckRow::of("array-cross-moment", std::abs(res.cross_moment_e1 - cross_target), 1e-9));
    std::string csv = "residual_raw,tail_bound_max,residual_net,cross_moment\n";
    csv += format_double(res.residual_raw) + "," + format_double(res.tail_bound_max) + "," +
           format_double(res.residual_net) + "," + format_double(res.cross_moment_e1) + "\n";
    artifacts.emplace_back("array.csv", csv);
    return rows;
}

std::vector<CheckRow> run_spectral(const json& cfg, const Options& opt,
                                   std::vector<std::pair<std::string, std::string>>& artifacts) {
    std::string variant = cfg.value("variant", "ct_poisson");
    Basis b = basis_from_config(cfg);
    int degree = opt.degree > 0 ? opt.degree : cfg.value("degree", 4);
    double eps = cfg.value("epsilon", 1e-12);
    std::vector<CheckRow> rows;
    std::string csv = "n,lambda_theoretical,lambda_measured,residual\n";
    if (variant == "ct_poisson" || variant == "ct_meixner") {
        PolySystem sys = (variant == "ct_poisson")
                             ? PolySystem::poisson_charlier(
                                   cfg.value("mu", std::vector<double>{1.0, 1.0}), b)
                             : PolySystem::meixner(cfg.value("alpha", 1.5),
                                                   cfg.value("theta", 0.7), b);
        auto idx = indices_up_to(b.dim(), degree);
        std::vector<double> lam;
        TruncatedGenerator gen;
        DistSpec pi = DistSpec::poisson_product({1.0, 1.0});
        if (variant == "ct_poisson") {
            auto spec = CtPoissonSpec::make(b, cfg.value("mu", std::vector<double>{1.0, 1.0}),
                                            cfg.value("nu", 1.0),
                                            cfg.value("gamma", std::vector<double>{}));
            for (const auto& n : idx) lam.push_back(spec.lambda_theory(n));
            gen = build_ct_generator(spec, slab_for(spec.stationary(), eps));
            pi = spec.stationary();
        } else {
            auto spec = CtMeixnerSpec::make(b, cfg.value("alpha", 1.5), cfg.value("theta", 0.7),
                                            cfg.value("nu", 1.0),
                                            cfg.value("gamma", std::vector<double>{1.0}));
            for (const auto& n : idx) lam.push_back(spec.lambda_theory(n));
            gen = build_ct_generator(spec, slab_for(spec.stationary(), eps));
            pi = spec.stationary();
        }
        auto checks = spectral_check(gen, sys, degree, lam);
        double worst = 0.0;
        for (const auto& row : checks) {
            worst = std::max(worst, row.residual);
            csv += index_label(row.n) + "," + format_double(row.value_theory) + "," +
                   format_double(row.value_measured) + "," + format_double(row.residual) + "\n";
        }
        rows.push_back(CheckRow::of("generator-eigen-residual", worst,
                                    opt.tol > 0 ? opt.tol : 1e-8));
        rows.push_back(
            CheckRow::of("generator-stationarity", generator_stationarity_residual(gen, pi),
                         opt.tol > 0 ? opt.tol : 1e-8));
    } else if (variant == "queue" || variant == "nb_branch") {
        std::vector<double> mu = cfg.value("mu", std::vector<double>{1.0, 1.0});
        std::vector<EigenCheckRow> checks;
        if (variant == "queue") {
            auto spec = PoissonQueueSpec::make(b, mu, cfg.value("xi", std::vector<double>{0.0, 0.5}));
            PolySystem sys = PolySystem::poisson_charlier(mu, b);
            LatticeSlab slab = slab_for(spec.stationary(), eps);
            auto xs = slab_points(slab);
            std::vector<int> box(slab.bounds);
            for (int& v : box) v += degree + 2;
            checks = discrete_eigen_check(spec, b, sys, degree, xs, box);
        } else {
            double alpha = cfg.value("alpha", 1.5), theta = cfg.value("theta", 0.7);
            double xin = cfg.value("xi_norm", 0.5);
            auto omega = cfg.value("omega", std::vector<double>{0.0, 1.0});
            auto pc = conditional_type_law(b, omega);
            auto bm = map_to_branching(theta, xin, b.p, pc);
            auto spec = NbBranchSpec::make(alpha, bm.beta, bm.kappa, bm.q, b.p);
            PolySystem sys = PolySystem::meixner(alpha, theta, b);
            LatticeSlab slab = slab_for(spec.stationary(), eps);
            auto xs = slab_points(slab);
            std::vector<int> box(slab.bounds);
            for (int& v : box) v += degree + 2;
            checks = discrete_eigen_check(spec, b, sys, degree, xs, box);
        }
        double worst = 0.0;
        for (const auto& row : checks) {
            worst = std::max(worst, row.residual);
            csv += index_label(row.n) + "," + format_double(row.value_theory) + "," +
                   format_double(row.value_measured) + "," + format_double(row.residual) + "\n";
        }
        rows.push_back(CheckRow::of("kernel-eigen-residual", worst,
                                    opt.tol > 0 ? opt.tol : 1e-8));
    } else {
        throw ConfigError("spectral: unknown variant " + variant);
    }
    artifacts.emplace_back("spectral.csv", csv);
    return rows;
}

std::vector<CheckRow> run_simulate(const json& cfg, const Options& opt,
                                   std::vector<std::pair<std::string, std::string>>& artifacts) {
    std::string model = cfg.value("model", "structural_poisson");
    SimConfig sc;
    sc.seed = opt.seed;
    sc.n_samples = cfg.value("n_samples", 100000L);
    sc.steps = cfg.value("steps", 1);
    sc.burn_in = cfg.value("burn_in", 0);
    sc.t_horizon = cfg.value("t_horizon", 1.0);
    sc.max_degree = cfg.value("degree", 2);
    Basis b = basis_from_config(cfg);

    SimReport rep;
    if (model == "structural_poisson") {
        MixingMeasure m = measure_from_json(cfg.at("measure").dump());
        rep = simulate_structural_poisson(b, m, cfg.value("mu", std::vector<double>{1.0, 1.0}), sc);
    } else if (model == "queue") {
        auto spec = PoissonQueueSpec::make(b, cfg.value("mu", std::vector<double>{1.0, 1.0}),
                                           cfg.value("xi", std::vector<double>{0.0, 0.5}));
        rep = simulate_chain(spec, cfg.value("init", std::vector<int>{0, 0}), sc);
    } else if (model == "nb_branch") {
        auto spec = NbBranchSpec::make(cfg.value("alpha", 1.5), cfg.value("beta", 0.3),
                                       cfg.value("kappa", 0.2),
                                       cfg.value("q", std::vector<std::vector<double>>{
                                                          {0.5, 0.5}, {0.5, 0.5}}),
                                       b.p);
        rep = simulate_chain(spec, b, cfg.value("init", std::vector<int>{0, 0}), sc);
    } else if (model == "gauss_ar") {
        auto spec = GaussArSpec::make(b, cfg.value("tau", std::vector<double>{0.5, 0.5}),
                                      cfg.value("xi", std::vector<double>{1.0, 0.0}));
        rep = simulate_chain(spec, cfg.value("init", std::vector<double>{0.0, 0.0}), sc);
    } else if (model == "ct_poisson") {
        auto spec = CtPoissonSpec::make(b, cfg.value("mu", std::vector<double>{1.0, 1.0}),
                                        cfg.value("nu", 1.0),
                                        cfg.value("gamma", std::vector<double>{}));
        rep = gillespie_ct(spec, cfg.value("init", std::vector<int>{3, 0}), sc);
    } else {
        throw ConfigError("simulate: unknown model " + model);
    }
    artifacts.emplace_back("sim.csv", rep.to_csv());
    artifacts.emplace_back("sim.json", rep.to_json(model, opt.seed));
    std::vector<CheckRow> rows;
    int fails = 0;
    for (const auto& s : rep.stats)
        if (!s.pass) ++fails;
    rows.push_back(CheckRow::of("simulation-4sigma-failures", double(fails), 0.5));
    rows.push_back(CheckRow::of("simulation-stat-count", rep.stats.empty() ? 1.0 : 0.0, 0.5));
    return rows;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"orthogonal polynomial system verification tool"};
    app.require_subcommand(1);
    app.fallthrough(true);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON configuration file");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--tol", opt.tol, "tolerance override");
    app.add_option("--degree", opt.degree, "degree override");

    // flag shortcuts for the orthogonality subcommand
    std::string family;
    std::string mu_csv, p_csv, tau_csv;
    int dflag = 0;

    auto* c_basis = app.add_subcommand("basis", "build a basis and verify orthogonality");
    auto* c_hyper = app.add_subcommand("hypergroup", "linearization tensor and feasibility");
    auto* c_orth = app.add_subcommand("orthogonality", "polynomial orthogonality by enumeration");
    c_orth->add_option("--family", family, "krawtchouk|charlier|meixner|hermite");
    c_orth->add_option("--mu", mu_csv, "comma separated means");
    c_orth->add_option("--p", p_csv, "comma separated weights");
    c_orth->add_option("--tau", tau_csv, "comma separated variances");
    c_orth->add_option("--d", dflag, "dimension (with uniform defaults)");
    auto* c_lim = app.add_subcommand("limits", "polynomial family limit relations");
    auto* c_lanc = app.add_subcommand("lancaster-build", "assemble a bivariate law");
    auto* c_feas = app.add_subcommand("feasibility", "Meixner positivity conditions");
    auto* c_cont = app.add_subcommand("contingency", "contingency table margins");
    auto* c_arr = app.add_subcommand("poisson-array", "Poisson array margins");
    auto* c_spec = app.add_subcommand("spectral", "kernel and generator eigen checks");
    auto* c_sim = app.add_subcommand("simulate", "stochastic simulation reports");

    std::vector<const char*> argv;
    argv.push_back("mvop");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        json cfg = load_config(opt);
        require_schema(cfg);
        std::vector<std::pair<std::string, std::string>> artifacts;
        std::vector<CheckRow> rows;
        std::string command;
        if (c_basis->parsed()) {
            command = "basis";
            rows = run_basis(cfg, opt, artifacts);
        } else if (c_hyper->parsed()) {
            command = "hypergroup";
            rows = run_hypergroup(cfg, opt, artifacts);
        } else if (c_orth->parsed()) {
            command = "orthogonality";
            auto parse_csv = [](const std::string& s) {
                std::vector<double> v;
                std::size_t pos = 0;
                while (pos < s.size()) {
                    std::size_t next = s.find(',', pos);
                    if (next == std::string::npos) next = s.size();
                    v.push_back(std::stod(s.substr(pos, next - pos)));
                    pos = next + 1;
                }
                return v;
            };
            if (!family.empty()) cfg["family"] = family;
            if (!mu_csv.empty()) cfg["mu"] = parse_csv(mu_csv);
            if (!p_csv.empty()) cfg["p"] = parse_csv(p_csv);
            if (!tau_csv.empty()) cfg["tau"] = parse_csv(tau_csv);
            if (dflag > 0 && !cfg.contains("mu") && !cfg.contains("p") && !cfg.contains("tau")) {
                std::vector<double> uni(std::size_t(dflag), 1.0 / dflag);
                cfg["p"] = uni;
            }
            rows = run_orthogonality(cfg, opt, artifacts);
        } else if (c_lim->parsed()) {
            command = "limits";
            rows = run_limits(opt, artifacts);
        } else if (c_lanc->parsed()) {
            command = "lancaster-build";
            rows = run_lancaster_build(cfg, opt, artifacts);
        } else if (c_feas->parsed()) {
            command = "feasibility";
            rows = run_feasibility(cfg, opt, artifacts);
        } else if (c_cont->parsed()) {
            command = "contingency";
            rows = run_contingency(cfg, opt, artifacts);
        } else if (c_arr->parsed()) {
            command = "poisson-array";
            rows = run_poisson_array(cfg, opt, artifacts);
        } else if (c_spec->parsed()) {
            command = "spectral";
            rows = run_spectral(cfg, opt, artifacts);
        } else if (c_sim->parsed()) {
            command = "simulate";
            rows = run_simulate(cfg, opt, artifacts);
        }
        emit(opt, command, rows, artifacts, out);
        return all_pass(rows) ? 0 : 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mvop::cli
