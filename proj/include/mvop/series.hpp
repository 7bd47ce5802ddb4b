#pragma once
#include <vector>

#include "mvop/multi_index.hpp"
#include "mvop/numeric.hpp"

namespace mvop {

// Dense multivariate power series in m variables, truncated to per-variable
// caps and a total-degree cap. Coefficients are stored in a mixed-radix dense
// table; entries beyond the total cap are kept at zero. All the polynomial
// families here are read off as coefficients of such series, so this is the
// one evaluation primitive everything else reduces to.
class TruncatedSeries {
public:
    TruncatedSeries(std::vector<int> caps, int total_cap)
        : caps_(std::move(caps)), total_cap_(total_cap) {
        strides_.assign(caps_.size(), 1);
        std::size_t size = 1;
        for (std::size_t v = 0; v < caps_.size(); ++v) {
            strides_[v] = size;
            size *= std::size_t(caps_[v] + 1);
        }
        c_.assign(size, 0.0);
    }

    static TruncatedSeries one(std::vector<int> caps, int total_cap) {
        TruncatedSeries s(std::move(caps), total_cap);
        s.c_[0] = 1.0;
        return s;
    }

    int vars() const { return int(caps_.size()); }
    const std::vector<int>& caps() const { return caps_; }
    int total_cap() const { return total_cap_; }

    double coeff(const MultiIndex& m) const { return c_[offset(m)]; }
    void set_coeff(const MultiIndex& m, double v) { c_[offset(m)] = v; }

    // (1 + sum_l lin[l] w_l)^expo, exponent real, via generalized binomials:
    // coefficient of w^m is binom(expo,|m|) * multinomial(|m|;m) * prod lin^m.
    static TruncatedSeries binomial_linear(double expo, const std::vector<double>& lin,
                                           const std::vector<int>& caps, int total_cap) {
        TruncatedSeries s(caps, total_cap);
        s.fill_each([&](const MultiIndex& m, int deg) {
            double v = binomial(expo, deg) * multinomial_of(m);
            for (std::size_t l = 0; l < lin.size(); ++l)
                for (int k = 0; k < m[l]; ++k) v *= lin[l];
            return v;
        });
        return s;
    }

    // exp(sum_l lin[l] w_l): coefficient of w^m is prod lin^m / m!.
    static TruncatedSeries exp_linear(const std::vector<double>& lin,
                                      const std::vector<int>& caps, int total_cap) {
        TruncatedSeries s(caps, total_cap);
        s.fill_each([&](const MultiIndex& m, int) {
            double v = 1.0;
            for (std::size_t l = 0; l < lin.size(); ++l) {
                for (int k = 0; k < m[l]; ++k) v *= lin[l];
                v /= factorial(m[l]);
            }
            return v;
        });
        return s;
    }

    TruncatedSeries operator*(const TruncatedSeries& rhs) const {
        TruncatedSeries out(caps_, total_cap_);
        MultiIndex a(caps_.size(), 0), b(caps_.size(), 0);
        mul_rec(rhs, out, a, b, 0);
        return out;
    }

private:
    std::size_t offset(const MultiIndex& m) const {
        std::size_t o = 0;
        for (std::size_t v = 0; v < caps_.size(); ++v) o += strides_[v] * std::size_t(m[v]);
        return o;
    }

    template <typename F>
    void fill_each(F&& f) {
        MultiIndex m(caps_.size(), 0);
        while (true) {
            int deg = degree_of(m);
            if (deg <= total_cap_) c_[offset(m)] = f(m, deg);
            // odometer increment over the cap box
            std::size_t v = 0;
            for (; v < caps_.size(); ++v) {
                if (m[v] < caps_[v]) {
                    ++m[v];
                    break;
                }
                m[v] = 0;
            }
            if (v == caps_.size()) break;
        }
    }

    void mul_rec(const TruncatedSeries& rhs, TruncatedSeries& out, MultiIndex& a,
                 MultiIndex& b, int var) const {
        // convolve: out[a+b] += this[a] * rhs[b], truncated
        if (var == vars()) {
            double ca = c_[offset(a)];
            if (ca == 0.0) return;
            conv_rec(rhs, out, a, b, 0, ca, degree_of(a));
            return;
        }
        for (a[var] = 0; a[var] <= caps_[var]; ++a[var]) mul_rec(rhs, out, a, b, var + 1);
        a[var] = 0;
    }

    void conv_rec(const TruncatedSeries& rhs, TruncatedSeries& out, const MultiIndex& a,
                  MultiIndex& b, int var, double ca, int dega) const {
        if (var == vars()) {
            double cb = rhs.c_[rhs.offset(b)];
            if (cb == 0.0) return;
            MultiIndex m(a.size());
            for (std::size_t v = 0; v < a.size(); ++v) m[v] = a[v] + b[v];
            out.c_[out.offset(m)] += ca * cb;
            return;
        }
        int room = caps_[var] - a[var];
        int degb = degree_of(b);
        for (b[var] = 0; b[var] <= room && dega + degb + b[var] <= total_cap_; ++b[var])
            conv_rec(rhs, out, a, b, var + 1, ca, dega);
        b[var] = 0;
    }

    std::vector<int> caps_;
    int total_cap_;
    std::vector<std::size_t> strides_;
    std::vector<double> c_;
};

}  // namespace mvop
