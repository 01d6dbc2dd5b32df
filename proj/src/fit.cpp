#include "drcr/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "drcr/error.hpp"

namespace drcr {

const char* to_string(ScheduleKind k) noexcept {
    switch (k) {
        case ScheduleKind::experimental: return "experimental";
        case ScheduleKind::theoretical: return "theoretical";
        case ScheduleKind::explicit_value: return "fixed";
    }
    return "?";
}

ScheduleKind parse_schedule(const std::string& s) {
    if (s == "experimental") return ScheduleKind::experimental;
    if (s == "theoretical") return ScheduleKind::theoretical;
    if (s == "fixed" || s == "explicit") return ScheduleKind::explicit_value;
    detail::invalid("unknown radius schedule '" + s + "' (expected experimental, theoretical or fixed)");
}

double default_radius(std::size_t n, std::size_t d, ScheduleKind kind, std::optional<double> gamma) {
    detail::require(n >= 2, "radius: n must be >= 2");
    detail::require(d >= 1, "radius: d must be >= 1");
    const double nn = static_cast<double>(n);
    const double base = std::pow(nn, -2.0 / static_cast<double>(d));
    switch (kind) {
        case ScheduleKind::experimental: return base;
        case ScheduleKind::theoretical:
            detail::require(gamma.has_value(), "radius: the theoretical schedule needs gamma");
            detail::require(*gamma > 0 && std::isfinite(*gamma), "radius: gamma must be > 0");
            return base * std::pow(std::log(nn), 1.0 + 3.0 / *gamma);
        case ScheduleKind::explicit_value: break;
    }
    detail::invalid("radius: the fixed schedule has no default value");
}

double resolve_radius(std::size_t n, std::size_t d, const RadiusSchedule& s) {
    if (s.kind == ScheduleKind::explicit_value) {
        detail::require(s.value >= 0 && std::isfinite(s.value), "radius: delta must be >= 0");
        return s.value;
    }
    detail::require(s.multiplier > 0 && std::isfinite(s.multiplier), "radius: multiplier must be > 0");
    const double base = default_radius(n, d, s.kind, s.gamma);
    return s.kind == ScheduleKind::theoretical ? s.multiplier * base : base;
}

void FitConfig::validate() const {
    if (delta) detail::require(*delta >= 0 && std::isfinite(*delta), "fit: delta must be >= 0");
    if (grad_cap) detail::require(*grad_cap > 0, "fit: grad_cap must be > 0");
    detail::require(violation_tol > 0, "fit: violation_tol must be > 0");
    solver.validate();
}

double FitConfig::radius(std::size_t n, std::size_t d) const {
    return delta ? *delta : resolve_radius(n, d, schedule);
}

double FitConfig::cap(std::size_t n) const {
    return grad_cap ? *grad_cap : std::log(static_cast<double>(n));
}

bool FitConfig::lazy(std::size_t n) const { return row_generation ? *row_generation : n > 120; }

DrcrLp build_drcr_lp_base(const Dataset& data, const FitConfig& cfg) {
    cfg.validate();
    const auto n = data.n(), d = data.d();
    detail::require(n >= 2, "fit: need at least 2 observations");
    const double delta = cfg.radius(n, d);
    const double cap = cfg.cap(n);

    DrcrLp out;
    out.index.n = n;
    out.index.d = d;
    auto& lp = out.lp;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) lp.add_variable(-lp::inf, lp::inf, 0.0);
    for (std::size_t i = 0; i < n * d; ++i) lp.add_variable(-cap, cap, 0.0);
    for (std::size_t i = 0; i < n; ++i) lp.add_variable(0.0, lp::inf, inv_n);
    lp.add_variable(0.0, lp::inf, delta);

    const auto& ix = out.index;
    for (std::size_t i = 0; i < n; ++i) {
        lp.add_row({{ix.r(i), 1.0}, {ix.g(i), 1.0}}, lp::Sense::greater_equal, data.y(i));
        lp.add_row({{ix.r(i), 1.0}, {ix.g(i), -1.0}}, lp::Sense::greater_equal, -data.y(i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            lp.add_row({{ix.t(), 1.0}, {ix.xi(i, k), -1.0}}, lp::Sense::greater_equal, 0.0);
            lp.add_row({{ix.t(), 1.0}, {ix.xi(i, k), 1.0}}, lp::Sense::greater_equal, 0.0);
        }
    return out;
}

void add_convexity_row(DrcrLp& prog, const Dataset& data, std::size_t i, std::size_t j) {
    const auto& ix = prog.index;
    std::vector<lp::Term> terms;
    terms.reserve(data.d() + 2);
    terms.push_back({ix.g(j), 1.0});
    terms.push_back({ix.g(i), -1.0});
    const auto xi = data.x(i), xj = data.x(j);
    for (std::size_t k = 0; k < data.d(); ++k) terms.push_back({ix.xi(i, k), -(xj[k] - xi[k])});
    prog.lp.add_row(terms, lp::Sense::greater_equal, 0.0);
    prog.index.pairs.emplace_back(i, j);
}

DrcrLp build_drcr_lp(const Dataset& data, const FitConfig& cfg) {
    auto prog = build_drcr_lp_base(data, cfg);
    const auto n = data.n();
    prog.index.pairs.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) add_convexity_row(prog, data, i, j);
    return prog;
}

std::vector<double> median_start(const Dataset& data, const DrcrLpIndex& index) {
    auto ys = data.ys();
    const auto n = ys.size();
    std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(n / 2), ys.end());
    const double med = ys[n / 2];
    std::vector<double> x(index.num_cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[index.g(i)] = med;
        x[index.r(i)] = std::abs(data.y(i) - med);
    }
    return x;
}

namespace {

double pair_violation(const Dataset& data, std::span<const double> g, std::span<const double> xi, std::size_t i,
                      std::size_t j) {
    const auto d = data.d();
    const auto xi_i = data.x(i), xj = data.x(j);
    double v = g[i] - g[j];
    for (std::size_t k = 0; k < d; ++k) v += xi[i * d + k] * (xj[k] - xi_i[k]);
    return v;
}

struct Violation {
    double amount;
    std::size_t key;  // i * n + j
};

// All pairs violated by more than tol, worst first, ties by pair index.
std::vector<Violation> scan_violations(const Dataset& data, std::span<const double> g, std::span<const double> xi,
                                       double tol) {
    const auto n = data.n();
    std::vector<Violation> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = pair_violation(data, g, xi, i, j);
            if (v > tol) out.push_back({v, i * n + j});
        }
    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return a.amount != b.amount ? a.amount > b.amount : a.key < b.key;
    });
    return out;
}

// Ordered pairs (i, j) with j among the 2d nearest neighbours of i in l1.
std::vector<std::size_t> neighbour_pairs(const Dataset& data) {
    const auto n = data.n(), d = data.d();
    const std::size_t k = std::min(n - 1, 2 * d);
    std::vector<std::size_t> keys;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.x(i);
        for (std::size_t j = 0; j < n; ++j) {
            const auto xj = data.x(j);
            double s = 0;
            for (std::size_t c = 0; c < d; ++c) s += std::abs(xj[c] - xi[c]);
            dist[j] = {j == i ? lp::inf : s, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t m = 0; m < k; ++m) {
            keys.push_back(i * n + dist[m].second);
            keys.push_back(dist[m].second * n + i);
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

[[noreturn]] void fail(const char* stage, const lp::LPSolution& sol, const DrcrLp& prog) {
    std::ostringstream os;
    os << "fit: LP " << stage << " ended with status=" << lp::to_string(sol.status) << " n=" << prog.index.n
       << " d=" << prog.index.d << " rows=" << prog.lp.num_rows() << " iterations=" << sol.iterations;
    throw SolverError(os.str());
}

}  // namespace

double max_convexity_violation(const Dataset& data, std::span<const double> g, std::span<const double> xi) {
    const auto n = data.n();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) worst = std::max(worst, pair_violation(data, g, xi, i, j));
    return worst;
}

DrcrFit fit_drcr_detailed(const Dataset& data, const FitConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    const auto n = data.n(), d = data.d();
    const bool lazy = cfg.lazy(n);
    DrcrLp prog = lazy ? build_drcr_lp_base(data, cfg) : build_drcr_lp(data, cfg);
    const auto& ix = prog.index;
    const double delta = cfg.radius(n, d);
    const double cap = cfg.cap(n);
    if (lazy)
        for (auto key : neighbour_pairs(data)) add_convexity_row(prog, data, key / n, key % n);

    const auto start = median_start(data, ix);
    lp::IncrementalSolver solver(prog.lp, cfg.solver, start);
    lp::LPSolution sol = solver.solve();
    if (sol.status != lp::Status::optimal) fail("solve", sol, prog);
    std::size_t rounds = 1;

    auto g_of = [&](const lp::LPSolution& s) {
        return std::vector<double>(s.primal.begin(), s.primal.begin() + static_cast<std::ptrdiff_t>(n));
    };
    auto xi_of = [&](const lp::LPSolution& s) {
        return std::vector<double>(s.primal.begin() + static_cast<std::ptrdiff_t>(n),
                                   s.primal.begin() + static_cast<std::ptrdiff_t>(n + n * d));
    };

    if (lazy) {
        std::vector<char> present(n * n, 0);
        for (const auto& [i, j] : prog.index.pairs) present[i * n + j] = 1;
        for (;;) {
            const auto g = g_of(sol), xi = xi_of(sol);
            const auto viol = scan_violations(data, g, xi, cfg.violation_tol);
            std::size_t added = 0;
            for (const auto& v : viol) {
                if (added == 5 * n) break;
                // rows already in the LP can only show solver-tolerance slack
                if (present[v.key]) continue;
                present[v.key] = 1;
                add_convexity_row(prog, data, v.key / n, v.key % n);
                ++added;
            }
            if (added == 0) break;
            sol = solver.add_rows_and_resolve(prog.lp);
            ++rounds;
            if (sol.status != lp::Status::optimal) fail("resolve", sol, prog);
        }
    }

    auto g = g_of(sol);
    auto xi = xi_of(sol);
    std::vector<AffinePiece> pieces(n);
    for (std::size_t i = 0; i < n; ++i) {
        pieces[i].g = g[i];
        pieces[i].xi.assign(xi.begin() + static_cast<std::ptrdiff_t>(i * d),
                            xi.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        const auto x = data.x(i);
        pieces[i].anchor.assign(x.begin(), x.end());
    }
    FitMeta meta{sol.objective_value, solver.total_iterations(), delta};
    DrcrFit out{MaxAffineModel(d, std::move(pieces), cap, meta), std::move(g), sol.objective_value, delta, cap,
                prog.index.pairs.size(), rounds, solver.total_iterations(), 0.0};
    out.max_violation = max_convexity_violation(data, out.g, xi);

    if (cfg.log) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        *cfg.log << "event=drcr_fit n=" << n << " d=" << d << " delta=" << delta << " grad_cap=" << cap
                 << " row_generation=" << (lazy ? "on" : "off") << " rounds=" << rounds
                 << " convexity_rows=" << out.convexity_rows << " lp_iterations=" << out.lp_iterations
                 << " objective=" << out.objective << " max_violation=" << out.max_violation << " seconds=" << secs
                 << '\n';
    }
    return out;
}

MaxAffineModel fit_drcr(const Dataset& data, const FitConfig& cfg) {
    return std::move(fit_drcr_detailed(data, cfg).model);
}

// ---------------------------------------------------------------------------
// Worst-case loss oracle.
//
// A feasible perturbation moves a fraction p of point i's mass by e/p along
// an l1-unit direction u, at transport cost e/n. Its contribution is
//   phi_i(e) = max over (p, u) of (1-p) l_i + p |Y_i - f(X_i + (e/p) u)|
// and a knapsack over budget units spreads n*delta across the points. Every
// candidate is a real distribution inside the ball, so the value is a lower
// bound on the supremum; the grids are nested in `resolution`.

double worst_case_loss_oracle(const MaxAffineModel& model, const Dataset& data, double delta,
                              std::size_t resolution) {
    const auto n = data.n(), d = data.d();
    detail::require(n <= 8 && d <= 2, "oracle: limited to n <= 8 and d <= 2");
    detail::require(model.d() == d, "oracle: model and data dimensions differ");
    detail::require(delta >= 0 && std::isfinite(delta), "oracle: delta must be >= 0");
    detail::require(resolution >= 1, "oracle: resolution must be >= 1");

    std::vector<std::vector<double>> dirs;
    for (std::size_t k = 0; k < d; ++k)
        for (double s : {1.0, -1.0}) {
            std::vector<double> u(d, 0.0);
            u[k] = s;
            dirs.push_back(u);
        }
    for (const auto& p : model.pieces()) {
        double norm = 0;
        for (double v : p.xi) norm += std::abs(v);
        if (norm == 0) continue;
        for (double s : {1.0, -1.0}) {
            std::vector<double> u(d);
            for (std::size_t k = 0; k < d; ++k) u[k] = s * p.xi[k] / norm;
            dirs.push_back(u);
        }
    }

    const std::size_t units = resolution;
    const std::size_t halvings = std::min<std::size_t>(resolution, 48);
    const double total = static_cast<double>(n) * delta;
    std::vector<std::vector<double>> phi(n, std::vector<double>(units + 1));
    std::vector<double> moved(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.x(i);
        const double loss = std::abs(data.y(i) - predict(model, x));
        phi[i][0] = loss;
        for (std::size_t u = 1; u <= units; ++u) {
            const double e = total * static_cast<double>(u) / static_cast<double>(units);
            double best = loss;
            for (std::size_t h = 0; h <= halvings; ++h) {
                const double p = std::ldexp(1.0, -static_cast<int>(h));
                for (const auto& dir : dirs) {
                    for (std::size_t k = 0; k < d; ++k) moved[k] = x[k] + (e / p) * dir[k];
                    const double v = (1.0 - p) * loss + p * std::abs(data.y(i) - predict(model, moved));
                    best = std::max(best, v);
                }
            }
            phi[i][u] = best;
        }
    }

    // best[u] = max total over the points so far using at most u units
    std::vector<double> best(units + 1, 0.0), next(units + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t u = 0; u <= units; ++u) {
            double v = -lp::inf;
            for (std::size_t a = 0; a <= u; ++a) v = std::max(v, best[u - a] + phi[i][a]);
            next[u] = v;
        }
        best.swap(next);
    }
    return best[units] / static_cast<double>(n);
}

}  // namespace drcr
