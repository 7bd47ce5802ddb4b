#pragma once
#include <algorithm>
#include <vector>

namespace mvop {

// Polynomial degree vectors n = (n_0,...,n_{k-1}). Ordering is graded
// lexicographic: first by |n|, ties broken lexicographically.
using MultiIndex = std::vector<int>;

inline int degree_of(const MultiIndex& n) {
    int s = 0;
    for (int v : n) s += v;
    return s;
}

inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    int da = degree_of(a), db = degree_of(b);
    if (da != db) return da < db;
    return a < b;
}

// All indices of the given dimension with |n| <= max_degree, in graded-lex order.
inline std::vector<MultiIndex> indices_up_to(int dim, int max_degree) {
    std::vector<MultiIndex> out;
    for (int deg = 0; deg <= max_degree; ++deg) {
        MultiIndex n(dim, 0);
        if (dim == 0) {
            if (deg == 0) out.push_back(n);
            continue;
        }
        n[0] = deg;
        std::size_t shell_begin = out.size();
        while (true) {
            out.push_back(n);
            // next composition of deg into dim parts (first part non-increasing)
            int i = dim - 2;
            while (i >= 0 && n[i] == 0) --i;
            if (i < 0) break;
            --n[i];
            int rest = deg;
            for (int k = 0; k <= i; ++k) rest -= n[k];
            for (int k = i + 1; k < dim; ++k) n[k] = 0;
            n[i + 1] = rest;
        }
        std::reverse(out.begin() + shell_begin, out.end());  // lex ascending within shell
    }
    return out;
}

}  // namespace mvop
