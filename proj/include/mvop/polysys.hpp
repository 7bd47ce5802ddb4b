#pragma once
#include <string>
#include <vector>

#include "mvop/basis.hpp"
#include "mvop/multi_index.hpp"

namespace mvop {

enum class PolyFamily { Krawtchouk, PoissonCharlier, Meixner, Hermite };

// One of the four orthogonal polynomial families, tied to an elementary basis.
// Krawtchouk lives on the multinomial (N trials, weights = basis.p),
// PoissonCharlier on a Poisson product with means mu (p = mu/|mu|),
// Meixner on the negative-binomial mixture (alpha, theta, p = basis.p),
// Hermite on a normal product with variances tau (p = tau/|tau|).
struct PolySystem {
    PolyFamily family;
    Basis basis;
    int N = 0;
    std::vector<double> mu;
    double alpha = 0.0, theta = 0.0;
    std::vector<double> tau;

    int dim() const { return basis.dim(); }
    double mu_total() const;
    double tau_total() const;

    static PolySystem krawtchouk(int N, Basis basis);
    static PolySystem poisson_charlier(std::vector<double> mu, Basis basis);
    static PolySystem meixner(double alpha, double theta, Basis basis);
    static PolySystem hermite(std::vector<double> tau, Basis basis);
};

// --- 1-d polynomials (x real; polynomial extension off the integer lattice) ---

/// Charlier C_n(x; lambda): coefficients of z^n/n! in e^z (1 - z/lambda)^x.
double charlier_eval(int n, double x, double lambda);
std::vector<double> charlier_row(int nmax, double x, double lambda);

/// Meixner M_n(x; alpha, kappa): sum_n [G(a+n)/(G(a)n!)] M_n z^n = (1-z/k)^x (1-z)^-(x+a).
double meixner1d_eval(int n, double x, double alpha, double kappa);
std::vector<double> meixner1d_row(int nmax, double x, double alpha, double kappa);

/// Hermite H_n(x; tau): coefficients of z^n/n! in exp{xz - tau z^2/2}.
double hermite1d_eval(int n, double x, double tau);
std::vector<double> hermite1d_row(int nmax, double x, double tau);

// --- generating-function coefficient extraction ---

// Coefficient of w^{n1} in prod_j (1 + sum_l w_l rows[l][j])^{x_j}.
// rows[l][j]: non-constant function l = 0..m-1 evaluated at state j; x may be real.
double gf_product_coeff(const std::vector<std::vector<double>>& rows, const MultiIndex& n1,
                        const std::vector<double>& x);

// All coefficients with |n1| <= max_degree, aligned with indices_up_to(m, max_degree).
std::vector<double> gf_product_coeffs_up_to(const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& x, int max_degree);

std::vector<std::vector<double>> nonconstant_rows(const Basis& b);

// --- multivariate evaluation ---

/// Krawtchouk Q_{n1}(x; N, p, u); requires |x| = N and |n1| <= N.
double krawtchouk_eval(const PolySystem& sys, const MultiIndex& n1, const std::vector<int>& x);

double mv_charlier_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);
double mv_meixner_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);
double mv_hermite_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);

/// Dispatch on family (Krawtchouk expects n of size d-1, others size d).
double mv_eval(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);

/// P_n(x) for all |n| <= max_degree at once, aligned with indices_up_to;
/// shares the generating-function table across indices.
std::vector<double> mv_eval_all(const PolySystem& sys, int max_degree,
                                const std::vector<double>& x);

// Generating-function routes, used as independent cross-checks of the closed forms.
double mv_charlier_eval_gf(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);
double mv_meixner_eval_gf(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& x);

/// Hat coordinates x_hat[j] = sum_i u[j][i] x_i, j = 0..d-1 (x_hat[0] = |x|).
std::vector<double> hat_coords(const Basis& b, const std::vector<double>& x);

/// Coefficient of the single leading monomial prod_j hat_j^{n_j}.
double leading_coefficient(const PolySystem& sys, const MultiIndex& n);

// --- norms ---

/// Squared norms h_n^{-1} = E[P_n^2] for all |n| <= max_degree (paired with the index).
struct NormTable {
    std::vector<MultiIndex> index;
    std::vector<double> h_inv;
};
NormTable norm_table(const PolySystem& sys, int max_degree);
double norm_h_inv(const PolySystem& sys, const MultiIndex& n);

// --- transforms ---

/// E[prod s_i^{X_i} P_n(X)] (discrete families) or E[exp(phi.X) H_n(X)] (Hermite).
double transform(const PolySystem& sys, const MultiIndex& n, const std::vector<double>& dual);

/// 1-d Meixner transform E[s^X M_n(X; alpha, kappa)], theta = kappa/(1-kappa).
double meixner1d_transform(int n, double s, double alpha, double theta);

// --- limit relations ---

struct LimitRow {
    std::string name;
    std::vector<double> params;
    std::vector<double> max_diff;
    double threshold = 0.0;
    bool monotone = false;
    bool pass = false;
};

struct LimitsReport {
    std::vector<LimitRow> rows;
    bool all_pass = false;
};

/// Evaluate both sides of each limit relation over the parameter schedule
/// (default 10, 10^2, 10^3, 10^4) on fixed grids with |n| <= 3.
LimitsReport verify_limits(const std::vector<double>& schedule = {10.0, 100.0, 1000.0, 10000.0});

}  // namespace mvop
