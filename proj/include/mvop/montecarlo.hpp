#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mvop/lancaster.hpp"
#include "mvop/markov.hpp"

namespace mvop {

struct SimConfig {
    std::uint64_t seed = 0;
    long n_samples = 100000;
    int steps = 1;
    int burn_in = 0;
    double t_horizon = 1.0;
    int max_degree = 3;
};

// Every statistic carries its standard error; pass means |z| < 4.
struct SimStat {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double stderr_ = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct SimReport {
    std::vector<SimStat> stats;
    bool all_pass = false;

    void add(std::string name, double value, double target, double se);
    std::string to_csv() const;
    std::string to_json(const std::string& model, std::uint64_t seed) const;
};

// Draw the Poisson array construction (common cells + private parts) and
// compare empirical E[C_m(X) C_n(Y)] with delta_{mn} rho_n / h_n^{-1} scaling.
SimReport simulate_structural_poisson(const Basis& b, const MixingMeasure& m,
                                      const std::vector<double>& mu, const SimConfig& cfg);

// Long-run law of the chain versus its stationary distribution, plus one-step
// eigenvalue estimates from consecutive states.
SimReport simulate_chain(const PoissonQueueSpec& spec, const std::vector<int>& init,
                         const SimConfig& cfg);
SimReport simulate_chain(const NbBranchSpec& spec, const Basis& basis,
                         const std::vector<int>& init, const SimConfig& cfg);
SimReport simulate_chain(const GaussArSpec& spec, const std::vector<double>& init,
                         const SimConfig& cfg);

// One-step sampler frequencies versus the exact evaluator law (the master test
// tying samplers to their pgfs).
SimReport sampler_agreement(const PoissonQueueSpec& spec, const std::vector<int>& x,
                            const SimConfig& cfg);
SimReport sampler_agreement(const NbBranchSpec& spec, const std::vector<int>& x,
                            const SimConfig& cfg);

// Event-driven simulation of the continuous-time chain; empirical law at the
// horizon versus the spectral prediction, and eigenfunction decay rates.
SimReport gillespie_ct(const CtPoissonSpec& spec, const std::vector<int>& init,
                       const SimConfig& cfg);

}  // namespace mvop
