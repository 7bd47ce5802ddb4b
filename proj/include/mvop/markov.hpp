#pragma once
#include <vector>

#include "mvop/basis.hpp"
#include "mvop/dist.hpp"
#include "mvop/lancaster.hpp"
#include "mvop/polysys.hpp"
#include "mvop/rng.hpp"

namespace mvop {

// ---------- discrete-time kernels ----------

// Infinite-server queue with d server types: arrivals Poisson |mu|(1-|xi|)
// thinned by p, each customer of type i served w.p. 1-|xi| or moved to type j
// w.p. |xi| p_{j|i}(omega). Stationary law is the Poisson product with mean mu.
struct PoissonQueueSpec {
    Basis basis;
    std::vector<double> mu;
    std::vector<double> xi;
    double xi_norm = 0.0;
    std::vector<std::vector<double>> p_cond;  // p_cond[i][j] = p_{j|i}(omega)

    static PoissonQueueSpec make(Basis basis, std::vector<double> mu, std::vector<double> xi,
                                 double tol = 1e-10);
    int dim() const { return basis.dim(); }
    DistSpec stationary() const { return DistSpec::poisson_product(mu); }
    /// prod_j rho_j(xi)^{n_j}
    double rho(const MultiIndex& n) const;
};

double queue_pgf(const PoissonQueueSpec& spec, const std::vector<int>& x,
                 const std::vector<double>& t);
std::vector<int> queue_sample(const PoissonQueueSpec& spec, const std::vector<int>& x,
                              CounterRng& rng);

// Branching chain with immigration: each individual dies w.p. 1-beta or turns
// into type j ~ q_{j|i} plus a geometric(kappa) burst of type-p offspring;
// immigration is negative binomial (alpha, kappa) typed by p. Stationary law
// is the Meixner distribution with theta = kappa/(1-beta-kappa).
struct NbBranchSpec {
    double alpha = 1.0, beta = 0.0, kappa = 0.0;
    std::vector<std::vector<double>> q;  // q[i][j] = q_{j|i}
    std::vector<double> p;

    static NbBranchSpec make(double alpha, double beta, double kappa,
                             std::vector<std::vector<double>> q, std::vector<double> p);
    int dim() const { return int(p.size()); }
    double theta() const { return kappa / (1.0 - beta - kappa); }
    DistSpec stationary() const { return DistSpec::meixner(alpha, theta(), p); }
};

double nb_branch_pgf(const NbBranchSpec& spec, const std::vector<int>& x,
                     const std::vector<double>& t);
std::vector<int> nb_branch_sample(const NbBranchSpec& spec, const std::vector<int>& x,
                                  CounterRng& rng);
/// Eigenvalue prod_j rho_j(xi)^{n_j} recovered through the inverse branching map.
double nb_branch_rho(const NbBranchSpec& spec, const Basis& basis, const MultiIndex& n);

// Gaussian autoregression: in hat coordinates Y_r = xi_r x_r + noise with
// Var = (1 - xi_r^2) |tau| a_r. Stationary law is the normal product.
struct GaussArSpec {
    Basis basis;
    std::vector<double> tau;
    std::vector<double> xi;  // per-function correlations in [-1,1]

    static GaussArSpec make(Basis basis, std::vector<double> tau, std::vector<double> xi);
    int dim() const { return basis.dim(); }
    DistSpec stationary() const { return DistSpec::normal_product(tau); }
};

std::vector<double> gauss_ar_step(const GaussArSpec& spec, const std::vector<double>& x,
                                  CounterRng& rng);
std::vector<double> gauss_ar_cond_mean(const GaussArSpec& spec, const std::vector<double>& x);
std::vector<std::vector<double>> gauss_ar_cond_cov(const GaussArSpec& spec);
double gauss_ar_cond_mgf(const GaussArSpec& spec, const std::vector<double>& x,
                         const std::vector<double>& t);

// ---------- exact one-step laws on a box ----------

// Dense law over the box {0..bounds_i}; deficiency is the mass lost to truncation.
struct BoxMap {
    std::vector<int> bounds;
    std::vector<double> v;
    double deficiency = 0.0;

    std::size_t size() const { return v.size(); }
    std::size_t offset(const std::vector<int>& y) const;
    bool contains(const std::vector<int>& y) const;
};

BoxMap immigration_law(const PoissonQueueSpec& spec, const std::vector<int>& bounds);
BoxMap individual_law(const PoissonQueueSpec& spec, int type, const std::vector<int>& bounds);
BoxMap immigration_law(const NbBranchSpec& spec, const std::vector<int>& bounds);
BoxMap individual_law(const NbBranchSpec& spec, int type, const std::vector<int>& bounds);

BoxMap convolve(const BoxMap& a, const BoxMap& b);

// K(x, .) for every x in the slab, by convolving individual laws along the
// lattice (moves only add nonnegative vectors, so box truncation is exact
// for every y inside the box).
template <typename Kernel>
std::vector<BoxMap> one_step_laws(const Kernel& kernel, const std::vector<std::vector<int>>& xs,
                                  const std::vector<int>& bounds);

struct EigenCheckRow {
    MultiIndex n;
    double value_theory = 0.0;   // rho_n (discrete) or lambda_n (generator)
    double value_measured = 0.0;
    double residual = 0.0;
};

// E[P_n(Y) | X = x] = rho_n P_n(x) over a grid of states, by enumeration.
template <typename Kernel>
std::vector<EigenCheckRow> discrete_eigen_check(const Kernel& kernel, const Basis& basis,
                                                const PolySystem& sys, int max_degree,
                                                const std::vector<std::vector<int>>& xgrid,
                                                const std::vector<int>& bounds);

// ---------- continuous-time generators ----------

// Multi-type birth-death with Poisson(mu) stationary law: immigration at rate
// nu |mu| p_j, death at rate nu per individual, type change i->j at rate
// x_i p_j sum_l gamma_l s(i,j,l) (gamma over the first d-1 states).
struct CtPoissonSpec {
    Basis basis;
    std::vector<double> mu;
    double nu = 1.0;
    std::vector<double> gamma;

    static CtPoissonSpec make(Basis basis, std::vector<double> mu, double nu,
                              std::vector<double> gamma);
    int dim() const { return basis.dim(); }
    DistSpec stationary() const { return DistSpec::poisson_product(mu); }
    double lambda_theory(const MultiIndex& n) const;
};

// Meixner variant: immigration theta nu alpha p_j, per-individual birth
// theta nu p_j, death nu(1+theta), type change r_{j|i} = |gamma| ptilde_{j|i}
// - theta nu p_j (must be nonnegative).
struct CtMeixnerSpec {
    Basis basis;
    double alpha = 1.0, theta = 1.0, nu = 1.0;
    std::vector<double> gamma;

    static CtMeixnerSpec make(Basis basis, double alpha, double theta, double nu,
                              std::vector<double> gamma);
    int dim() const { return basis.dim(); }
    DistSpec stationary() const { return DistSpec::meixner(alpha, theta, basis.p); }
    double lambda_theory(const MultiIndex& n) const;
};

struct GeneratorMove {
    int from = -1;  // -1: immigration / pure birth
    int to = -1;    // -1: death
    double rate = 0.0;
};

struct TruncatedGenerator {
    std::vector<std::vector<int>> states;
    std::vector<int> bounds;
    std::vector<std::vector<GeneratorMove>> rows;  // per state, off-diagonal moves
    std::vector<double> diag;                      // -(total outgoing rate)
    std::vector<bool> interior;                    // all moves land inside the box
    int state_index(const std::vector<int>& x) const;
};

TruncatedGenerator build_ct_generator(const CtPoissonSpec& spec, const LatticeSlab& slab);
TruncatedGenerator build_ct_generator(const CtMeixnerSpec& spec, const LatticeSlab& slab);

// Per-degree residual max over interior x of |(G P_n)(x) + lambda_n P_n(x)| /
// max(1, |P_n(x)|), plus a least-squares measured eigenvalue.
std::vector<EigenCheckRow> spectral_check(const TruncatedGenerator& gen, const PolySystem& sys,
                                          int max_degree,
                                          const std::vector<double>& lambda_theory);

// l1 norm of pi^T G over interior columns.
double generator_stationarity_residual(const TruncatedGenerator& gen, const DistSpec& pi);

// Lumped total-count rates: max deviation of (up, down) rates from the
// 1-d birth-death form (birth b0 + b1 |x|, death d1 |x|).
double lumped_rate_residual(const TruncatedGenerator& gen, double b0, double b1, double d1);

}  // namespace mvop
