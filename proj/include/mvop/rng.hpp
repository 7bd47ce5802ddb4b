#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

namespace mvop {

// Counter-based stream: output k of stream s under seed is a fixed mixing
// function of (seed, s, k), so parallel replicas are reproducible by stream
// splitting and never share state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^ mix(stream + 0xD1B54A32D192ED03ULL))),
          ctr_(0) {}

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL); }

    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    // Knuth product method, chunked so exp(-mean) stays in range.
    int next_poisson(double mean) {
        int total = 0;
        while (mean > 30.0) {
            total += poisson_small(30.0);
            mean -= 30.0;
        }
        return total + poisson_small(mean);
    }

    // P(k) = (1-kappa) kappa^k, k >= 0
    int next_geometric(double kappa) {
        if (kappa <= 0.0) return 0;
        double u = next_double();
        while (u <= 0.0) u = next_double();
        return int(std::floor(std::log(u) / std::log(kappa)));
    }

    // Marsaglia-Tsang; scale 1
    double next_gamma(double shape) {
        if (shape < 1.0) {
            double u = next_double();
            while (u <= 0.0) u = next_double();
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double z = next_normal();
            double v = 1.0 + c * z;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = next_double();
            if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    int next_categorical(const std::vector<double>& probs) {
        double u = next_double();
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return int(k);
        }
        return int(probs.size()) - 1;
    }

    double next_exponential(double rate) {
        double u = next_double();
        while (u <= 0.0) u = next_double();
        return -std::log(u) / rate;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    int poisson_small(double mean) {
        double limit = std::exp(-mean);
        double prod = next_double();
        int k = 0;
        while (prod > limit) {
            prod *= next_double();
            ++k;
        }
        return k;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mvop
