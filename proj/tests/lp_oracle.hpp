#pragma once

// Test-only brute force: optimum of a small bounded LP by enumerating every
// vertex (every choice of n linearly independent tight constraints).

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "drcr/lp.hpp"

namespace oracle {

struct Halfspace {
    std::vector<double> a;
    double b;  // a'x >= b
};

inline std::vector<Halfspace> halfspaces(const drcr::lp::LinearProgram& lp) {
    using drcr::lp::Sense;
    const auto n = lp.num_cols();
    std::vector<std::vector<double>> dense(lp.num_rows(), std::vector<double>(n, 0.0));
    for (const auto& t : lp.entries) dense[t.row][t.col] += t.value;
    std::vector<Halfspace> out;
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
        if (lp.senses[r] != Sense::less_equal) out.push_back({dense[r], lp.rhs[r]});
        if (lp.senses[r] != Sense::greater_equal) {
            auto neg = dense[r];
            for (auto& v : neg) v = -v;
            out.push_back({neg, -lp.rhs[r]});
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        if (std::isfinite(lp.lower[j])) {
            e[j] = 1.0;
            out.push_back({e, lp.lower[j]});
        }
        if (std::isfinite(lp.upper[j])) {
            e[j] = -1.0;
            out.push_back({e, -lp.upper[j]});
        }
    }
    return out;
}

// Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> rhs) {
    const auto n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-10) return std::nullopt;
        std::swap(m[piv], m[c]);
        std::swap(rhs[piv], rhs[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
        x[i] = s / m[i][i];
    }
    return x;
}

/// Best objective over all feasible vertices; nullopt if none exists.
inline std::optional<double> vertex_enumeration(const drcr::lp::LinearProgram& lp, double tol = 1e-9) {
    const auto hs = halfspaces(lp);
    const auto n = lp.num_cols();
    const auto k = hs.size();
    if (k < n) return std::nullopt;
    std::optional<double> best;
    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i) pick[i] = i;
    for (;;) {
        std::vector<std::vector<double>> m;
        std::vector<double> rhs;
        for (auto i : pick) {
            m.push_back(hs[i].a);
            rhs.push_back(hs[i].b);
        }
        if (auto x = solve_square(m, rhs)) {
            bool feasible = true;
            for (const auto& h : hs) {
                double s = 0;
                for (std::size_t j = 0; j < n; ++j) s += h.a[j] * (*x)[j];
                if (s < h.b - tol * (1 + std::abs(h.b))) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                double obj = 0;
                for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
                if (!best || obj < *best) best = obj;
            }
        }
        // next combination
        std::size_t i = n;
        while (i > 0 && pick[i - 1] == k - n + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

}  // namespace oracle
