#pragma once
#include <functional>
#include <vector>

namespace mvop {

enum class DistFamily { Multinomial, PoissonProduct, MeixnerDist, NormalProduct };

// Ambient laws the polynomial systems are orthogonal on.
struct DistSpec {
    DistFamily family;
    int trials = 0;                // Multinomial N
    std::vector<double> p;         // Multinomial / Meixner type law
    std::vector<double> mu;        // PoissonProduct means
    std::vector<double> tau;       // NormalProduct variances
    double alpha = 0.0, theta = 0.0;  // Meixner shape / odds

    int dim() const;
    static DistSpec multinomial(int N, std::vector<double> p);
    static DistSpec poisson_product(std::vector<double> mu);
    static DistSpec meixner(double alpha, double theta, std::vector<double> p);
    static DistSpec normal_product(std::vector<double> tau);
};

double pmf(const DistSpec& spec, const std::vector<int>& x);
double normal_density(const DistSpec& spec, const std::vector<double>& x);

// Truncated integer lattice {x : x_i <= bounds_i [, |x| <= total_bound][, |x| = exact_total]}
// with a certified bound on the ambient mass outside it.
struct LatticeSlab {
    std::vector<int> bounds;
    int total_bound = -1;   // -1: none
    int exact_total = -1;   // -1: none (Multinomial support |x| = N)
    double tail_mass_bound = 0.0;
};

LatticeSlab slab_for(const DistSpec& spec, double epsilon);

// Same certified tail with every bound pushed out; used where polynomial
// weights multiply the tail mass.
LatticeSlab expand(LatticeSlab slab, int margin);

// Visit every slab point exactly once, in lexicographic order.
void for_each_point(const LatticeSlab& slab, const std::function<void(const std::vector<int>&)>& fn);

std::vector<std::vector<int>> slab_points(const LatticeSlab& slab);

// Mass of the slab under the ambient law (deterministic lexicographic sum).
double slab_mass(const DistSpec& spec, const LatticeSlab& slab);

// Max over slab points of |pmf - integral of Poisson(mu*p) against Gamma(alpha,theta)|,
// the integral evaluated by 200-node Gauss-Laguerre quadrature.
double poisson_gamma_mixture_max_error(double alpha, double theta,
                                       const std::vector<double>& p, double epsilon = 1e-12);

// Nodes/weights for int_0^inf t^a e^{-t} f(t) dt (Golub-Welsch); a = 0 is the
// plain rule with unit total weight.
void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights,
                    double a = 0.0);

}  // namespace mvop
