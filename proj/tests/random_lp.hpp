#pragma once

#include <random>

#include "drcr/lp.hpp"

namespace testgen {

// Small dense LP with box bounds on every column. When `feasible` is set the
// right-hand sides are chosen so a random interior point satisfies every row.
inline drcr::lp::LinearProgram random_lp(std::mt19937_64& rng, bool feasible) {
    using namespace drcr::lp;
    std::uniform_int_distribution<int> nvar(1, 6), nrow(1, 10), sense(0, 1);
    std::uniform_real_distribution<double> coef(-5.0, 5.0), unit(0.0, 1.0);
    LinearProgram lp;
    const int n = nvar(rng);
    const int m = nrow(rng);
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double lo = -1.0 - 4.0 * unit(rng);
        const double hi = 1.0 + 4.0 * unit(rng);
        lp.add_variable(lo, hi, coef(rng));
        x0[static_cast<std::size_t>(j)] = lo + (hi - lo) * unit(rng);
    }
    for (int r = 0; r < m; ++r) {
        std::vector<Term> terms;
        double ax = 0;
        for (int j = 0; j < n; ++j) {
            const double a = unit(rng) < 0.8 ? coef(rng) : 0.0;
            if (a != 0) terms.push_back({static_cast<std::size_t>(j), a});
            ax += a * x0[static_cast<std::size_t>(j)];
        }
        const bool ge = sense(rng) == 1;
        double b = feasible ? (ge ? ax - 2.0 * unit(rng) : ax + 2.0 * unit(rng)) : coef(rng) * 3.0;
        lp.add_row(terms, ge ? Sense::greater_equal : Sense::less_equal, b);
    }
    return lp;
}

}  // namespace testgen
