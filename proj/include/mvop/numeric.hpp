#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

namespace mvop {

// Compensated (Kahan) accumulator for long deterministic sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Generalized binomial coefficient: x real, k >= 0.
inline double binomial(double x, int k) {
    double b = 1.0;
    for (int i = 0; i < k; ++i) b *= (x - i) / (i + 1);
    return b;
}

// Multinomial coefficient |m|! / prod m_i!.
inline double multinomial_of(const std::vector<int>& m) {
    int tot = 0;
    for (int v : m) tot += v;
    double c = factorial(tot);
    for (int v : m) c /= factorial(v);
    return c;
}

// N! / (n_1! ... n_k! (N - |n|)!); zero when |n| > N.
inline double multinomial_with_rest(int N, const std::vector<int>& n) {
    int tot = 0;
    for (int v : n) tot += v;
    if (tot > N) return 0.0;
    double c = 1.0;
    int used = 0;
    for (int v : n) {
        for (int i = 0; i < v; ++i) c *= double(N - used - i) / (i + 1);
        used += v;
    }
    return c;
}

// Gamma(alpha + n) / Gamma(alpha) as an iterative product (n small).
inline double gamma_ratio(double alpha, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= alpha + k;
    return r;
}

inline double sum_of(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value();
}

inline int isum_of(const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
}

}  // namespace mvop
