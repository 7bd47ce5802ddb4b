#pragma once
#include <array>
#include <optional>
#include <vector>

namespace mvop {

/// Probability weights p on d states; each p_i > 0 and sum(p) = 1 within 1e-12.
struct Weights {
    std::vector<double> p;
    explicit Weights(std::vector<double> probs);
    int dim() const { return int(p.size()); }
};

/// Complete orthogonal function system u on d weighted states.
/// Row l = 0..d-1 is the function u^{(l)} (row 0 is the constant 1),
/// column j = 0..d-1 the state. a[l] is the squared norm sum_j u[l][j]^2 p[j],
/// with a[0] = 1. If scaled_last, every row has last entry 1.
struct Basis {
    std::vector<double> p;
    std::vector<std::vector<double>> u;
    std::vector<double> a;
    bool scaled_last = false;

    int dim() const { return int(p.size()); }
    /// max_{k,l} |sum_j u[k][j] u[l][j] p[j] - delta_{kl} a[k]|
    double orthogonality_residual() const;
};

/// Linearization tensor s(j,k,l) = sum_r a_r^{-1} u_j^{(r)} u_k^{(r)} u_l^{(r)},
/// the sum running over all d rows including the constant one, so that
/// sum_{j,k} p_j p_k s(j,k,l) = 1 for every l. feasible iff min entry >= -tol.
struct HypergroupTensor {
    int d = 0;
    std::vector<double> s;  // flattened d*d*d
    bool feasible = false;
    double min_entry = 0.0;
    std::array<int, 3> argmin{0, 0, 0};

    double at(int j, int k, int l) const { return s[std::size_t((j * d + k) * d + l)]; }
};

/// Gram-Schmidt under weights p. Seeds, together with the constant vector,
/// must be linearly independent; by default reversed Helmert contrasts
/// (seed l contrasts state l+1 against the states before it) are used.
Basis build_basis(const Weights& w,
                  const std::optional<std::vector<std::vector<double>>>& seeds = std::nullopt);

/// Divide each non-constant row by its last entry so u[r][d-1] = 1; recompute a.
Basis rescale_last(const Basis& b);

HypergroupTensor hypergroup_tensor(const Basis& b, double tol = 1e-10);

/// theta_r = sum_l omega_l u_l^{(r)} for r = 1..d-1 (omega a distribution on states).
std::vector<double> theta_from_omega(const Basis& b, const std::vector<double>& omega);

/// Two-point law p_jk = p_j p_k {1 + sum_{r>=1} theta_r a_r^{-1} u_j^{(r)} u_k^{(r)}}.
/// If require_nonneg, throws NegativeCell when an entry drops below -tol.
std::vector<std::vector<double>> lancaster_2point(const Basis& b,
                                                  const std::vector<double>& theta,
                                                  bool require_nonneg = false,
                                                  double tol = 1e-10);

}  // namespace mvop
