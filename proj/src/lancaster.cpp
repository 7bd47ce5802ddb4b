#include "mvop/lancaster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mvop/errors.hpp"
#include "mvop/numeric.hpp"

namespace mvop {

namespace {

void validate_measure(const MixingMeasure& m) {
    if (m.atoms.empty()) throw DomainMismatch("mixing measure: no atoms");
    double wsum = 0.0;
    for (const auto& atom : m.atoms) {
        if (!(atom.w > 0.0)) throw DomainMismatch("mixing measure: atom weight must be > 0");
        wsum += atom.w;
        if (m.domain == MixingMeasure::Domain::Simplex) {
            double s = 0.0;
            for (double v : atom.xi) {
                if (v < -1e-12) throw DomainMismatch("mixing measure: simplex atom has negative entry");
                s += v;
            }
            if (s > 1.0 + 1e-12) throw DomainMismatch("mixing measure: simplex atom has |xi| > 1");
        } else {
            for (double v : atom.xi)
                if (std::abs(v) > 1.0 + 1e-12)
                    throw DomainMismatch("mixing measure: box atom outside [-1,1]");
        }
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw DomainMismatch("mixing measure: weights sum to " + std::to_string(wsum));
}

}  // namespace

MixingMeasure MixingMeasure::simplex(std::vector<Atom> atoms) {
    MixingMeasure m{Domain::Simplex, std::move(atoms)};
    validate_measure(m);
    return m;
}

MixingMeasure MixingMeasure::box(std::vector<Atom> atoms) {
    MixingMeasure m{Domain::Box, std::move(atoms)};
    validate_measure(m);
    return m;
}

MixingMeasure MixingMeasure::single_atom(Domain dom, std::vector<double> xi) {
    MixingMeasure m{dom, {Atom{std::move(xi), 1.0}}};
    validate_measure(m);
    return m;
}

double RhoSequence::at(const MultiIndex& n) const {
    for (std::size_t k = 0; k < index.size(); ++k)
        if (index[k] == n) return rho[k];
    throw DomainError("RhoSequence: index not tabulated");
}

RhoSequence rho_from_measure(const Basis& b, const MixingMeasure& m, PolyFamily family,
                             int max_degree) {
    int d = b.dim();
    bool simplex_family =
        (family == PolyFamily::PoissonCharlier || family == PolyFamily::Meixner);
    if (simplex_family && m.domain != MixingMeasure::Domain::Simplex)
        throw DomainMismatch("rho_from_measure: family needs a simplex measure");
    if (family == PolyFamily::Hermite && m.domain != MixingMeasure::Domain::Box)
        throw DomainMismatch("rho_from_measure: normal family needs a box measure");
    if (family == PolyFamily::Krawtchouk)
        throw DomainMismatch("rho_from_measure: no mixture form for the Krawtchouk family");

    RhoSequence seq;
    seq.dim = d;
    seq.max_degree = max_degree;
    seq.index = indices_up_to(d, max_degree);
    seq.rho.assign(seq.index.size(), 0.0);

    for (const auto& atom : m.atoms) {
        if (int(atom.xi.size()) != d)
            throw DomainMismatch("rho_from_measure: atom dimension mismatch");
        // per-function factors rho_j(xi)
        std::vector<double> rj(std::size_t(d), 0.0);
        if (simplex_family) {
            for (int j = 0; j < d; ++j) {
                KahanSum s;
                for (int i = 0; i < d; ++i) s.add(b.u[std::size_t(j)][std::size_t(i)] * atom.xi[std::size_t(i)]);
                rj[std::size_t(j)] = s.value();
            }
        } else {
            rj = atom.xi;
        }
        for (std::size_t k = 0; k < seq.index.size(); ++k) {
            double v = 1.0;
            for (int j = 0; j < d; ++j)
                for (int e = 0; e < seq.index[k][std::size_t(j)]; ++e) v *= rj[std::size_t(j)];
            seq.rho[k] += atom.w * v;
        }
    }
    return seq;
}

LancasterLaw LancasterLaw::from_measure(PolySystem sys, const MixingMeasure& m, int max_degree) {
    LancasterLaw law{std::move(sys), {}, max_degree};
    law.rho = rho_from_measure(law.sys.basis, m, law.sys.family, max_degree);
    return law;
}

LancasterLaw LancasterLaw::from_rho(PolySystem sys, RhoSequence rho) {
    int degree = rho.max_degree;
    return LancasterLaw{std::move(sys), std::move(rho), degree};
}

JointTable assemble_joint(const LancasterLaw& law, const LatticeSlab& slab) {
    const auto& sys = law.sys;
    JointTable t;
    t.points = slab_points(slab);
    std::size_t npts = t.points.size();
    auto idx = indices_up_to(sys.dim(), law.max_degree);

    DistSpec ambient = (sys.family == PolyFamily::PoissonCharlier)
                           ? DistSpec::poisson_product(sys.mu)
                           : DistSpec::meixner(sys.alpha, sys.theta, sys.basis.p);

    // weight rho_n h_n per index (h_n = 1 / squared norm); skip n = 0
    std::vector<double> wgt(idx.size(), 0.0);
    for (std::size_t k = 1; k < idx.size(); ++k)
        wgt[k] = law.rho.at(idx[k]) / norm_h_inv(sys, idx[k]);

    // P_n(x) per point
    std::vector<std::vector<double>> P(npts);
    t.marginal_pmf.resize(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        std::vector<double> xr(t.points[i].begin(), t.points[i].end());
        P[i].resize(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) P[i][k] = mv_eval(sys, idx[k], xr);
        t.marginal_pmf[i] = pmf(ambient, t.points[i]);
    }

    t.values.assign(npts * npts, 0.0);
    t.min_value = std::numeric_limits<double>::infinity();
    KahanSum mass;
    double shell_max = 0.0;
    for (std::size_t xi = 0; xi < npts; ++xi) {
        for (std::size_t yi = 0; yi < npts; ++yi) {
            KahanSum bracket;
            bracket.add(1.0);
            for (std::size_t k = 1; k < idx.size(); ++k)
                bracket.add(wgt[k] * (P[xi][k] * P[yi][k]));
            double v = t.marginal_pmf[xi] * t.marginal_pmf[yi] * bracket.value();
            t.values[xi * npts + yi] = v;
            mass.add(v);
            if (v < t.min_value) {
                t.min_value = v;
                t.argmin = {int(xi), int(yi)};
            }
            KahanSum shell;
            for (std::size_t k = 1; k < idx.size(); ++k)
                if (degree_of(idx[k]) == law.max_degree)
                    shell.add(std::abs(wgt[k] * (P[xi][k] * P[yi][k])));
            shell_max = std::max(shell_max,
                                 shell.value() * t.marginal_pmf[xi] * t.marginal_pmf[yi]);
        }
    }
    t.total_mass = mass.value();
    t.last_shell_max = shell_max;

    double worst = 0.0;
    for (std::size_t xi = 0; xi < npts; ++xi) {
        KahanSum row;
        for (std::size_t yi = 0; yi < npts; ++yi) row.add(t.values[xi * npts + yi]);
        worst = std::max(worst, std::abs(row.value() - t.marginal_pmf[xi]));
    }
    t.marginal_residual = worst;
    return t;
}

RealJointTable assemble_joint_grid(const LancasterLaw& law,
                                   const std::vector<std::vector<double>>& points) {
    const auto& sys = law.sys;
    if (sys.family != PolyFamily::Hermite)
        throw DomainMismatch("assemble_joint_grid: normal family only");
    auto idx = indices_up_to(sys.dim(), law.max_degree);
    DistSpec ambient = DistSpec::normal_product(sys.tau);

    std::vector<double> wgt(idx.size(), 0.0);
    for (std::size_t k = 1; k < idx.size(); ++k)
        wgt[k] = law.rho.at(idx[k]) / norm_h_inv(sys, idx[k]);

    std::size_t npts = points.size();
    std::vector<std::vector<double>> P(npts);
    std::vector<double> dens(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        P[i].resize(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) P[i][k] = mv_eval(sys, idx[k], points[i]);
        dens[i] = normal_density(ambient, points[i]);
    }

    RealJointTable t;
    t.points = points;
    t.values.assign(npts * npts, 0.0);
    t.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t xi = 0; xi < npts; ++xi)
        for (std::size_t yi = 0; yi < npts; ++yi) {
            KahanSum bracket;
            bracket.add(1.0);
            for (std::size_t k = 1; k < idx.size(); ++k)
                bracket.add(wgt[k] * (P[xi][k] * P[yi][k]));
            double v = dens[xi] * dens[yi] * bracket.value();
            t.values[xi * npts + yi] = v;
            t.min_value = std::min(t.min_value, v);
        }
    return t;
}

std::vector<std::vector<double>> pairwise_type_law(const Basis& b,
                                                   const std::vector<double>& omega) {
    return lancaster_2point(b, theta_from_omega(b, omega));
}

std::vector<std::vector<double>> conditional_type_law(const Basis& b,
                                                      const std::vector<double>& omega) {
    auto m = pairwise_type_law(b, omega);
    for (int i = 0; i < b.dim(); ++i)
        for (int j = 0; j < b.dim(); ++j) m[std::size_t(i)][std::size_t(j)] /= b.p[std::size_t(i)];
    return m;
}

std::vector<StructuralAtomParams> poisson_structural_params(const Basis& b,
                                                            const MixingMeasure& m,
                                                            const std::vector<double>& mu,
                                                            double tol) {
    if (m.domain != MixingMeasure::Domain::Simplex)
        throw DomainMismatch("poisson_structural_params: simplex measure required");
    int d = b.dim();
    double mu_tot = sum_of(mu);
    auto tensor = hypergroup_tensor(b, tol);
    if (!tensor.feasible)
        throw InfeasibleBasis("poisson_structural_params: basis is not hypergroup-feasible");

    std::vector<StructuralAtomParams> out;
    for (const auto& atom : m.atoms) {
        StructuralAtomParams sp;
        double xin = sum_of(atom.xi);
        sp.z_mean.resize(std::size_t(d));
        for (int j = 0; j < d; ++j) sp.z_mean[std::size_t(j)] = (1.0 - xin) * mu[std::size_t(j)];
        sp.array_mean.assign(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
        sp.min_entry = std::numeric_limits<double>::infinity();
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                KahanSum s;
                for (int l = 0; l < d; ++l) s.add(atom.xi[std::size_t(l)] * tensor.at(j, k, l));
                double v = mu_tot * b.p[std::size_t(j)] * b.p[std::size_t(k)] * s.value();
                sp.array_mean[std::size_t(j)][std::size_t(k)] = v;
                sp.min_entry = std::min(sp.min_entry, v);
            }
        if (sp.min_entry < -tol)
            throw InfeasibleBasis("poisson_structural_params: negative array mean");
        out.push_back(std::move(sp));
    }
    return out;
}

MeixnerFeasibility meixner_feasibility(const Basis& b, const MixingMeasure& m, double theta,
                                       double tol) {
    if (m.domain != MixingMeasure::Domain::Simplex)
        throw DomainMismatch("meixner_feasibility: simplex measure required");
    int d = b.dim();
    MeixnerFeasibility rep;
    rep.pass = true;
    for (const auto& atom : m.atoms) {
        MeixnerFeasibility::AtomReport ar;
        ar.xi_norm = sum_of(atom.xi);
        if (ar.xi_norm <= tol) {
            // omega undefined; independence case passes by convention
            ar.independence = true;
            ar.pass = true;
            ar.min_slack = 0.0;
            ar.strong_min_slack = 0.0;
            rep.atoms.push_back(ar);
            continue;
        }
        std::vector<double> omega(atom.xi);
        for (double& v : omega) v /= ar.xi_norm;
        auto pij = pairwise_type_law(b, omega);
        double bound = theta * (1.0 - ar.xi_norm) / (1.0 + theta * (1.0 - ar.xi_norm));
        double strong = theta / (1.0 + theta);
        ar.min_slack = std::numeric_limits<double>::infinity();
        ar.strong_min_slack = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double pp = b.p[std::size_t(i)] * b.p[std::size_t(j)];
                ar.min_slack = std::min(ar.min_slack, pij[std::size_t(i)][std::size_t(j)] - bound * pp);
                ar.strong_min_slack =
                    std::min(ar.strong_min_slack, pij[std::size_t(i)][std::size_t(j)] - strong * pp);
            }
        ar.pass = ar.min_slack >= -tol;
        rep.atoms.push_back(ar);
        rep.pass = rep.pass && ar.pass;
    }
    return rep;
}

BranchingMap map_to_branching(double theta, double xi_norm, const std::vector<double>& p,
                              const std::vector<std::vector<double>>& p_cond, double tol) {
    int d = int(p.size());
    BranchingMap bm;
    double denom = 1.0 + theta * (1.0 - xi_norm);
    bm.beta = xi_norm / denom;
    bm.kappa = theta * (1.0 - xi_norm) / denom;
    bm.q.assign(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = (p_cond[std::size_t(i)][std::size_t(j)] - bm.kappa * p[std::size_t(j)]) /
                       (1.0 - bm.kappa);
            if (v < -tol)
                throw NegativeQ("map_to_branching: q[" + std::to_string(i) + "][" +
                                std::to_string(j) + "] = " + std::to_string(v));
            bm.q[std::size_t(i)][std::size_t(j)] = v;
        }
    return bm;
}

BranchingInverse branching_inverse(double beta, double kappa, const std::vector<double>& p,
                                   const std::vector<std::vector<double>>& q) {
    if (!(kappa < 1.0 - beta))
        throw DomainError("branching_inverse: need kappa < 1 - beta");
    int d = int(p.size());
    BranchingInverse inv;
    inv.theta = kappa / (1.0 - beta - kappa);
    inv.xi_norm = beta / (1.0 - kappa);
    inv.p_cond.assign(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            inv.p_cond[std::size_t(i)][std::size_t(j)] =
                (1.0 - kappa) * q[std::size_t(i)][std::size_t(j)] + kappa * p[std::size_t(j)];
    return inv;
}

CanonicalDecomposition canonical_decomposition(const std::vector<std::vector<double>>& cells) {
    int r = int(cells.size());
    int c = int(cells[0].size());
    if (r > c) throw DomainError("canonical_decomposition: need r <= c");
    CanonicalDecomposition dec;
    dec.prow.assign(std::size_t(r), 0.0);
    dec.pcol.assign(std::size_t(c), 0.0);
    double total = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            if (cells[std::size_t(i)][std::size_t(j)] < 0.0)
                throw DomainError("canonical_decomposition: negative cell");
            dec.prow[std::size_t(i)] += cells[std::size_t(i)][std::size_t(j)];
            dec.pcol[std::size_t(j)] += cells[std::size_t(i)][std::size_t(j)];
            total += cells[std::size_t(i)][std::size_t(j)];
        }
    if (std::abs(total - 1.0) > 1e-12)
        throw DomainError("canonical_decomposition: cells must sum to 1");
    for (double v : dec.prow)
        if (!(v > 0.0)) throw NoLancasterForm("canonical_decomposition: zero row marginal");
    for (double v : dec.pcol)
        if (!(v > 0.0)) throw NoLancasterForm("canonical_decomposition: zero column marginal");

    Eigen::MatrixXd A(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            A(i, j) = (cells[std::size_t(i)][std::size_t(j)] -
                       dec.prow[std::size_t(i)] * dec.pcol[std::size_t(j)]) /
                      std::sqrt(dec.prow[std::size_t(i)] * dec.pcol[std::size_t(j)]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);

    // r-1 canonical pairs; singular values are the correlations, signs live in v
    for (int k = 0; k < r - 1; ++k) {
        dec.rho.push_back(svd.singularValues()(k));
        std::vector<double> uk(static_cast<std::size_t>(r)), vk(static_cast<std::size_t>(c));
        for (int i = 0; i < r; ++i) uk[std::size_t(i)] = svd.matrixU()(i, k) / std::sqrt(dec.prow[std::size_t(i)]);
        for (int j = 0; j < c; ++j) vk[std::size_t(j)] = svd.matrixV()(j, k) / std::sqrt(dec.pcol[std::size_t(j)]);
        dec.u.push_back(std::move(uk));
        dec.v.push_back(std::move(vk));
    }

    double worst = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            KahanSum s;
            s.add(1.0);
            for (int k = 0; k < r - 1; ++k)
                s.add(dec.rho[std::size_t(k)] * dec.u[std::size_t(k)][std::size_t(i)] *
                      dec.v[std::size_t(k)][std::size_t(j)]);
            double rec = dec.prow[std::size_t(i)] * dec.pcol[std::size_t(j)] * s.value();
            worst = std::max(worst, std::abs(rec - cells[std::size_t(i)][std::size_t(j)]));
        }
    dec.reconstruction_residual = worst;
    if (worst > 1e-10)
        throw NoLancasterForm("canonical_decomposition: reconstruction residual " +
                              std::to_string(worst));
    return dec;
}

namespace {

// enumerate all nonnegative integer tables with given per-cell caps
void for_each_table(const std::vector<int>& caps, std::vector<int>& cell, std::size_t k,
                    const std::function<void(const std::vector<int>&)>& fn) {
    if (k == caps.size()) {
        fn(cell);
        return;
    }
    for (int v = 0; v <= caps[k]; ++v) {
        cell[k] = v;
        for_each_table(caps, cell, k + 1, fn);
    }
}

Basis basis_from_rows(const std::vector<double>& p,
                      const std::vector<std::vector<double>>& rows) {
    Basis b;
    b.p = p;
    int d = int(p.size());
    b.u.assign(std::size_t(d), std::vector<double>(std::size_t(d), 1.0));
    b.a.assign(std::size_t(d), 0.0);
    b.a[0] = 1.0;
    for (int k = 1; k < d; ++k) {
        b.u[std::size_t(k)] = rows[std::size_t(k - 1)];
        KahanSum s;
        for (int j = 0; j < d; ++j)
            s.add(b.u[std::size_t(k)][std::size_t(j)] * b.u[std::size_t(k)][std::size_t(j)] *
                  p[std::size_t(j)]);
        b.a[std::size_t(k)] = s.value();
    }
    b.scaled_last = false;
    return b;
}

}  // namespace

ContingencyResult contingency_joint(int N, const std::vector<std::vector<double>>& cell_probs) {
    int r = int(cell_probs.size());
    int c = int(cell_probs[0].size());
    if (N > 8 || r * c > 9) throw DomainError("contingency_joint: enumeration bounds exceeded");
    ContingencyResult res;
    res.decomp = canonical_decomposition(cell_probs);

    // exact joint law of margins by enumerating all tables with N observations
    std::vector<double> flat;
    for (const auto& row : cell_probs)
        for (double v : row) flat.push_back(v);
    DistSpec table_law = DistSpec::multinomial(N, flat);
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> exact;
    LatticeSlab tslab;
    tslab.bounds.assign(std::size_t(r * c), N);
    tslab.exact_total = N;
    for_each_point(tslab, [&](const std::vector<int>& cellv) {
        std::vector<int> x(std::size_t(r), 0), y(std::size_t(c), 0);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                x[std::size_t(i)] += cellv[std::size_t(i * c + j)];
                y[std::size_t(j)] += cellv[std::size_t(i * c + j)];
            }
        exact[{x, y}] += pmf(table_law, cellv);
    });

    // expansion side on the product of the two margin simplices
    DistSpec mx = DistSpec::multinomial(N, res.decomp.prow);
    DistSpec my = DistSpec::multinomial(N, res.decomp.pcol);
    auto nidx = indices_up_to(r - 1, N);
    double worst = 0.0;
    LatticeSlab sx, sy;
    sx.bounds.assign(std::size_t(r), N);
    sx.exact_total = N;
    sy.bounds.assign(std::size_t(c), N);
    sy.exact_total = N;
    for (const auto& x : slab_points(sx)) {
        std::vector<double> xr(x.begin(), x.end());
        for (const auto& y : slab_points(sy)) {
            std::vector<double> yr(y.begin(), y.end());
            KahanSum bracket;
            bracket.add(1.0);
            for (const auto& n : nidx) {
                if (degree_of(n) == 0) continue;
                double coef = 1.0 / multinomial_with_rest(N, n);
                for (std::size_t k = 0; k < n.size(); ++k)
                    for (int e = 0; e < n[k]; ++e) coef *= res.decomp.rho[k];
                double qx = gf_product_coeff(res.decomp.u, n, xr);
                double qy = gf_product_coeff(res.decomp.v, n, yr);
                bracket.add(coef * qx * qy);
            }
            double expansion = pmf(mx, x) * pmf(my, y) * bracket.value();
            auto it = exact.find({x, y});
            double target = (it == exact.end()) ? 0.0 : it->second;
            worst = std::max(worst, std::abs(expansion - target));
        }
    }
    res.residual = worst;
    return res;
}

PoissonArrayResult poisson_array_joint(const std::vector<std::vector<double>>& mu_cells,
                                       double epsilon, int max_degree) {
    int r = int(mu_cells.size());
    int c = int(mu_cells[0].size());
    double mu_total = 0.0;
    for (const auto& row : mu_cells)
        for (double v : row) mu_total += v;
    std::vector<std::vector<double>> p_cells(mu_cells);
    for (auto& row : p_cells)
        for (double& v : row) v /= mu_total;

    PoissonArrayResult res;
    res.decomp = canonical_decomposition(p_cells);

    std::vector<double> mu_x(std::size_t(r), 0.0), mu_y(std::size_t(c), 0.0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            mu_x[std::size_t(i)] += mu_cells[std::size_t(i)][std::size_t(j)];
            mu_y[std::size_t(j)] += mu_cells[std::size_t(i)][std::size_t(j)];
        }

    // per-cell truncation with union-bound tail
    std::vector<int> caps;
    double tail = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            DistSpec one = DistSpec::poisson_product({mu_cells[std::size_t(i)][std::size_t(j)]});
            LatticeSlab s1 = slab_for(one, epsilon / (r * c));
            caps.push_back(s1.bounds[0]);
            tail += s1.tail_mass_bound;
        }
    res.enumeration_tail = tail;

    std::vector<int> bx(std::size_t(r), 0), by(std::size_t(c), 0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            bx[std::size_t(i)] += caps[std::size_t(i * c + j)];
            by[std::size_t(j)] += caps[std::size_t(i * c + j)];
        }
    auto xstride = [&](const std::vector<int>& x) {
        std::size_t o = 0;
        for (int i = 0; i < r; ++i) o = o * std::size_t(bx[std::size_t(i)] + 1) + std::size_t(x[std::size_t(i)]);
        return o;
    };
    auto ystride = [&](const std::vector<int>& y) {
        std::size_t o = 0;
        for (int j = 0; j < c; ++j) o = o * std::size_t(by[std::size_t(j)] + 1) + std::size_t(y[std::size_t(j)]);
        return o;
    };
    std::size_t nx = 1, ny = 1;
    for (int i = 0; i < r; ++i) nx *= std::size_t(bx[std::size_t(i)] + 1);
    for (int j = 0; j < c; ++j) ny *= std::size_t(by[std::size_t(j)] + 1);
    std::vector<double> exact(nx * ny, 0.0);

    DistSpec cell_law = DistSpec::poisson_product(
        [&] {
            std::vector<double> flat;
            for (const auto& row : mu_cells)
                for (double v : row) flat.push_back(v);
            return flat;
        }());
    std::vector<int> cellv(std::size_t(r * c), 0);
    KahanSum covered;
    for_each_table(caps, cellv, 0, [&](const std::vector<int>& cv) {
        std::vector<int> x(std::size_t(r), 0), y(std::size_t(c), 0);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                x[std::size_t(i)] += cv[std::size_t(i * c + j)];
                y[std::size_t(j)] += cv[std::size_t(i * c + j)];
            }
        double pr = pmf(cell_law, cv);
        exact[xstride(x) * ny + ystride(y)] += pr;
        covered.add(pr);
    });

    // expansion side
    Basis basis_x = basis_from_rows(res.decomp.prow, res.decomp.u);
    Basis basis_y = basis_from_rows(res.decomp.pcol, res.decomp.v);
    PolySystem sys_x = PolySystem::poisson_charlier(mu_x, basis_x);
    PolySystem sys_y = PolySystem::poisson_charlier(mu_y, basis_y);
    DistSpec px_law = DistSpec::poisson_product(mu_x);
    DistSpec py_law = DistSpec::poisson_product(mu_y);

    auto nidx = indices_up_to(r, max_degree);
    std::vector<double> coef(nidx.size(), 0.0);
    for (std::size_t k = 1; k < nidx.size(); ++k) {
        const auto& n = nidx[k];
        double v = std::pow(mu_total, degree_of(n));
        for (int j = 0; j < r; ++j) v *= factorial(n[std::size_t(j)]);
        for (int j = 1; j < r; ++j)
            for (int e = 0; e < n[std::size_t(j)]; ++e) v *= res.decomp.rho[std::size_t(j - 1)];
        coef[k] = v;
    }

    LatticeSlab slx, sly;
    slx.bounds = bx;
    sly.bounds = by;
    auto xpts = slab_points(slx);
    auto ypts = slab_points(sly);
    std::vector<std::vector<double>> Cx(xpts.size()), Cy(ypts.size());
    std::vector<double> fx(xpts.size()), fy(ypts.size());
    std::vector<double> e1x(xpts.size()), e1y(ypts.size());
    MultiIndex e1x_idx(std::size_t(r), 0), e1y_idx(std::size_t(c), 0);
    if (r > 1) e1x_idx[1] = 1;
    if (c > 1) e1y_idx[1] = 1;
    for (std::size_t i = 0; i < xpts.size(); ++i) {
        std::vector<double> xr(xpts[i].begin(), xpts[i].end());
        Cx[i].resize(nidx.size());
        for (std::size_t k = 0; k < nidx.size(); ++k) Cx[i][k] = mv_charlier_eval(sys_x, nidx[k], xr);
        fx[i] = pmf(px_law, xpts[i]);
        e1x[i] = mv_charlier_eval(sys_x, e1x_idx, xr);
    }
    for (std::size_t i = 0; i < ypts.size(); ++i) {
        std::vector<double> yr(ypts[i].begin(), ypts[i].end());
        Cy[i].resize(nidx.size());
        for (std::size_t k = 0; k < nidx.size(); ++k) {
            MultiIndex nstar(std::size_t(c), 0);
            for (int j = 0; j < r; ++j) nstar[std::size_t(j)] = nidx[k][std::size_t(j)];
            Cy[i][k] = mv_charlier_eval(sys_y, nstar, yr);
        }
        fy[i] = pmf(py_law, ypts[i]);
        e1y[i] = mv_charlier_eval(sys_y, e1y_idx, yr);
    }

    // certified truncation tail, depending on (|x|, |y|) only
    int smax = 0;
    for (int v : bx) smax += v;
    int tmax = 0;
    for (int v : by) tmax += v;
    const int shell_cap = 120;
    std::vector<std::vector<double>> tail_tab;
    {
        // |C_m(arg; mu_total)| for arg in [-shell_cap, max(smax,tmax)]
        int lo = -shell_cap, hi = std::max(smax, tmax);
        std::vector<std::vector<double>> crow(std::size_t(hi - lo + 1));
        for (int arg = lo; arg <= hi; ++arg)
            crow[std::size_t(arg - lo)] = charlier_row(shell_cap, double(arg), mu_total);
        // |Q|-majorant per total count: coeff of w^n1 in prod over vars of
        // (1 + sum_l w_l max_j|u_l(j)|)^s
        std::vector<double> umax(std::size_t(r - 1), 0.0);
        for (int l = 0; l < r - 1; ++l)
            for (int j = 0; j < r; ++j)
                umax[std::size_t(l)] = std::max(umax[std::size_t(l)],
                                                std::abs(res.decomp.u[std::size_t(l)][std::size_t(j)]));
        std::vector<double> vmax(std::size_t(c - 1), 1.0);
        for (int l = 0; l < c - 1; ++l) {
            vmax[std::size_t(l)] = 0.0;
            for (int j = 0; j < c; ++j)
                if (l < int(res.decomp.v.size()))
                    vmax[std::size_t(l)] = std::max(vmax[std::size_t(l)],
                                                    std::abs(res.decomp.v[std::size_t(l)][std::size_t(j)]));
        }
        auto nshell = indices_up_to(r, shell_cap);
        tail_tab.assign(std::size_t(smax + 1), std::vector<double>(std::size_t(tmax + 1), 0.0));
        // qbar[s][k] = coeff of w^k in (1 + w umax)...; for r = 2 a single variable
        std::vector<std::vector<double>> qbar_s(std::size_t(smax + 1)),
            qbar_t(std::size_t(tmax + 1));
        for (int s = 0; s <= smax; ++s) {
            qbar_s[std::size_t(s)].assign(std::size_t(shell_cap + 1), 0.0);
            for (int k = 0; k <= shell_cap; ++k) {
                // sum over compositions of k into r-1 parts of multinomial * prod umax
                // (r = 2 in practice: binom(s, k) umax^k)
                double acc = 0.0;
                for (const auto& n1 : indices_up_to(r - 1, k)) {
                    if (degree_of(n1) != k) continue;
                    double term = binomial(double(s), k) * multinomial_of(n1);
                    for (int l = 0; l < r - 1; ++l)
                        for (int e = 0; e < n1[std::size_t(l)]; ++e) term *= umax[std::size_t(l)];
                    acc += std::abs(term);
                }
                qbar_s[std::size_t(s)][std::size_t(k)] = acc;
            }
        }
        for (int t = 0; t <= tmax; ++t) {
            qbar_t[std::size_t(t)].assign(std::size_t(shell_cap + 1), 0.0);
            for (int k = 0; k <= shell_cap; ++k) {
                double acc = 0.0;
                for (const auto& n1 : indices_up_to(c - 1, k)) {
                    if (degree_of(n1) != k) continue;
                    double term = binomial(double(t), k) * multinomial_of(n1);
                    for (int l = 0; l < c - 1; ++l)
                        for (int e = 0; e < n1[std::size_t(l)]; ++e) term *= vmax[std::size_t(l)];
                    acc += std::abs(term);
                }
                qbar_t[std::size_t(t)][std::size_t(k)] = acc;
            }
        }
        // aggregate shell weights by (n0, k1); the (s,t) scan then only does lookups
        std::vector<std::vector<double>> agg(std::size_t(shell_cap + 1),
                                             std::vector<double>(std::size_t(shell_cap + 1), 0.0));
        for (const auto& n : nshell) {
            int deg = degree_of(n);
            if (deg <= max_degree) continue;
            int n0 = n[0];
            int k1 = deg - n0;
            double rho_pow = 1.0;
            for (int j = 1; j < r; ++j)
                for (int e = 0; e < n[std::size_t(j)]; ++e)
                    rho_pow *= std::abs(res.decomp.rho[std::size_t(j - 1)]);
            double h = std::pow(mu_total, deg);
            for (int j = 0; j < r; ++j) h *= factorial(n[std::size_t(j)]);
            double inv = 1.0 / factorial(n0);
            agg[std::size_t(n0)][std::size_t(k1)] +=
                rho_pow * h * inv * inv * std::pow(mu_total, -2.0 * k1);
        }
        for (int s = 0; s <= smax; ++s)
            for (int t = 0; t <= tmax; ++t) {
                KahanSum acc;
                for (int n0 = 0; n0 <= shell_cap; ++n0)
                    for (int k1 = 0; k1 <= shell_cap - n0; ++k1) {
                        double w = agg[std::size_t(n0)][std::size_t(k1)];
                        if (w == 0.0) continue;
                        double qb = qbar_s[std::size_t(s)][std::size_t(k1)] *
                                    qbar_t[std::size_t(t)][std::size_t(k1)];
                        if (qb == 0.0) continue;
                        acc.add(w * qb *
                                std::abs(crow[std::size_t(s - k1 + shell_cap)][std::size_t(n0)]) *
                                std::abs(crow[std::size_t(t - k1 + shell_cap)][std::size_t(n0)]));
                    }
                tail_tab[std::size_t(s)][std::size_t(t)] = acc.value();
            }
    }

    double worst_raw = 0.0, worst_net = 0.0, tail_max = 0.0;
    KahanSum cross;
    for (std::size_t i = 0; i < xpts.size(); ++i) {
        int s = isum_of(xpts[i]);
        for (std::size_t j = 0; j < ypts.size(); ++j) {
            int t = isum_of(ypts[j]);
            KahanSum bracket;
            bracket.add(1.0);
            for (std::size_t k = 1; k < nidx.size(); ++k)
                bracket.add(coef[k] * Cx[i][k] * Cy[j][k]);
            double expansion = fx[i] * fy[j] * bracket.value();
            double target = exact[xstride(xpts[i]) * ny + ystride(ypts[j])];
            double diff = std::abs(expansion - target);
            double tb = fx[i] * fy[j] * tail_tab[std::size_t(s)][std::size_t(t)] +
                        res.enumeration_tail;
            worst_raw = std::max(worst_raw, diff);
            tail_max = std::max(tail_max, tb);
            worst_net = std::max(worst_net, diff - tb);
            cross.add(target * e1x[i] * e1y[j]);
        }
    }
    res.residual_raw = worst_raw;
    res.tail_bound_max = tail_max;
    res.residual_net = std::max(0.0, worst_net);
    res.cross_moment_e1 = cross.value();
    return res;
}

std::vector<std::vector<double>> normal_cross_covariance(const Basis& b,
                                                         const std::vector<double>& tau,
                                                         const std::vector<double>& xi) {
    int d = b.dim();
    double tt = sum_of(tau);
    std::vector<std::vector<double>> V(std::size_t(d), std::vector<double>(std::size_t(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            KahanSum s;
            for (int l = 0; l < d; ++l)
                s.add(xi[std::size_t(l)] / b.a[std::size_t(l)] * b.u[std::size_t(l)][std::size_t(i)] *
                      b.u[std::size_t(l)][std::size_t(j)]);
            V[std::size_t(i)][std::size_t(j)] =
                tt * b.p[std::size_t(i)] * b.p[std::size_t(j)] * s.value();
        }
    return V;
}

double block_covariance_min_eigenvalue(const std::vector<double>& tau,
                                       const std::vector<std::vector<double>>& V) {
    int d = int(tau.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        M(i, i) = tau[std::size_t(i)];
        M(d + i, d + i) = tau[std::size_t(i)];
        for (int j = 0; j < d; ++j) {
            M(i, d + j) = V[std::size_t(i)][std::size_t(j)];
            M(d + j, i) = V[std::size_t(i)][std::size_t(j)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return es.eigenvalues().minCoeff();
}

}  // namespace mvop
