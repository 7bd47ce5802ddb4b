#pragma once
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mvop/basis.hpp"
#include "mvop/dist.hpp"
#include "mvop/multi_index.hpp"
#include "mvop/polysys.hpp"

namespace mvop {

// Finite atomic measure for the eigenvalue mixture. Simplex atoms are state
// vectors xi with xi_i >= 0, |xi| <= 1 (Poisson / Meixner families); box atoms
// are per-function correlations in [-1,1]^d (normal family).
struct MixingMeasure {
    enum class Domain { Simplex, Box };
    struct Atom {
        std::vector<double> xi;
        double w;
    };
    Domain domain;
    std::vector<Atom> atoms;

    static MixingMeasure simplex(std::vector<Atom> atoms);
    static MixingMeasure box(std::vector<Atom> atoms);
    static MixingMeasure single_atom(Domain dom, std::vector<double> xi);
};

// Eigenvalue sequence rho_n, |n| <= max_degree, aligned with indices_up_to.
struct RhoSequence {
    int dim = 0;
    int max_degree = 0;
    std::vector<MultiIndex> index;
    std::vector<double> rho;

    double at(const MultiIndex& n) const;
};

// rho_n = E_xi[ prod_j rho_j(xi)^{n_j} ] with rho_j(xi) = sum_i u_i^{(j)} xi_i
// for the discrete families; rho_n = E[ prod_j xi_j^{n_j} ] for the normal one.
RhoSequence rho_from_measure(const Basis& b, const MixingMeasure& m, PolyFamily family,
                             int max_degree);

struct LancasterLaw {
    PolySystem sys;   // carries family, basis, parameters
    RhoSequence rho;
    int max_degree = 0;

    static LancasterLaw from_measure(PolySystem sys, const MixingMeasure& m, int max_degree);
    static LancasterLaw from_rho(PolySystem sys, RhoSequence rho);
};

// Pointwise truncated bivariate values over slab x slab.
struct JointTable {
    std::vector<std::vector<int>> points;
    std::vector<double> marginal_pmf;
    std::vector<double> values;  // row-major points x points
    double min_value = 0.0;
    std::pair<int, int> argmin{0, 0};
    double total_mass = 0.0;
    double last_shell_max = 0.0;   // max contribution of the top degree shell
    double marginal_residual = 0.0;

    double at(int xi, int yi) const { return values[std::size_t(xi) * points.size() + std::size_t(yi)]; }
};

JointTable assemble_joint(const LancasterLaw& law, const LatticeSlab& slab);

// Normal-family variant on an explicit grid of real points (density values).
struct RealJointTable {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    double min_value = 0.0;
};
RealJointTable assemble_joint_grid(const LancasterLaw& law,
                                   const std::vector<std::vector<double>>& points);

// Per-atom means of the structural Poisson array representation:
// X_j = Z_j + sum_k A_jk, Y_k = Z'_k + sum_j A_jk with E[Z|xi] = (1-|xi|) mu
// and E[A_jk|xi] = |mu| p_j p_k sum_l xi_l s(j,k,l).
struct StructuralAtomParams {
    std::vector<double> z_mean;
    std::vector<std::vector<double>> array_mean;
    double min_entry = 0.0;
};
std::vector<StructuralAtomParams> poisson_structural_params(const Basis& b,
                                                            const MixingMeasure& m,
                                                            const std::vector<double>& mu,
                                                            double tol = 1e-10);

// Pairwise type law p_ij(omega) = p_i p_j sum_l omega_l s(i,j,l) and conditionals.
std::vector<std::vector<double>> pairwise_type_law(const Basis& b,
                                                   const std::vector<double>& omega);
std::vector<std::vector<double>> conditional_type_law(const Basis& b,
                                                      const std::vector<double>& omega);

// Slack of p_ij(omega) >= theta(1-|xi|) / (1 + theta(1-|xi|)) p_i p_j per atom,
// plus the stronger theta/(1+theta) variant. |xi| = 0 atoms pass by convention.
struct MeixnerFeasibility {
    struct AtomReport {
        double xi_norm = 0.0;
        double min_slack = 0.0;
        double strong_min_slack = 0.0;
        bool pass = false;
        bool independence = false;
    };
    std::vector<AtomReport> atoms;
    bool pass = false;
};
MeixnerFeasibility meixner_feasibility(const Basis& b, const MixingMeasure& m, double theta,
                                       double tol = 1e-10);

// Branching-kernel parameterization of a feasible extreme point.
struct BranchingMap {
    double beta = 0.0;
    double kappa = 0.0;
    std::vector<std::vector<double>> q;  // q[i][j] = q_{j|i}
};
BranchingMap map_to_branching(double theta, double xi_norm, const std::vector<double>& p,
                              const std::vector<std::vector<double>>& p_cond,
                              double tol = 1e-10);
struct BranchingInverse {
    double theta = 0.0;
    double xi_norm = 0.0;
    std::vector<std::vector<double>> p_cond;
};
BranchingInverse branching_inverse(double beta, double kappa, const std::vector<double>& p,
                                   const std::vector<std::vector<double>>& q);

// Canonical (weighted SVD) decomposition of a probability cell matrix:
// cells_ij = prow_i pcol_j (1 + sum_k rho_k u^{(k)}_i v^{(k)}_j), u orthonormal
// on prow, v on pcol, rho_k >= 0.
struct CanonicalDecomposition {
    std::vector<double> prow, pcol;
    std::vector<std::vector<double>> u, v;  // k = 1..r-1 rows
    std::vector<double> rho;
    double reconstruction_residual = 0.0;
};
CanonicalDecomposition canonical_decomposition(const std::vector<std::vector<double>>& cells);

// Exact joint law of contingency-table margins versus its diagonal expansion.
struct ContingencyResult {
    CanonicalDecomposition decomp;
    double residual = 0.0;
};
ContingencyResult contingency_joint(int N, const std::vector<std::vector<double>>& cell_probs);

// Exact joint law of Poisson-array margins versus the expansion truncated at
// degree D. residual_net subtracts a certified bound on the truncation tail.
struct PoissonArrayResult {
    CanonicalDecomposition decomp;
    double residual_raw = 0.0;
    double tail_bound_max = 0.0;
    double residual_net = 0.0;
    double cross_moment_e1 = 0.0;   // E[C_{e1}(X) C_{e1}(Y)]
    double enumeration_tail = 0.0;
};
PoissonArrayResult poisson_array_joint(const std::vector<std::vector<double>>& mu_cells,
                                       double epsilon, int max_degree);

// V_ij = |tau| p_i p_j sum_l xi_l a_l^{-1} u_i^{(l)} u_j^{(l)}
std::vector<std::vector<double>> normal_cross_covariance(const Basis& b,
                                                         const std::vector<double>& tau,
                                                         const std::vector<double>& xi);

// Min eigenvalue of [[diag(tau), V], [V^T, diag(tau)]].
double block_covariance_min_eigenvalue(const std::vector<double>& tau,
                                       const std::vector<std::vector<double>>& V);

}  // namespace mvop
