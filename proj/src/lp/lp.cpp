#include <algorithm>
#include <cmath>
#include <ostream>

#include "drcr/error.hpp"
#include "drcr/lp.hpp"
#include "simplex_engine.hpp"

namespace drcr::lp {

LPSolution solve_interior_point(const LinearProgram& lp, const SolverOptions& opts);

std::size_t LinearProgram::add_variable(double lo, double hi, double cost, std::string name) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    if (!name.empty() || !names.empty()) {
        names.resize(objective.size() - 1);
        names.push_back(std::move(name));
    }
    return objective.size() - 1;
}

std::size_t LinearProgram::add_row(std::span<const Term> terms, Sense sense, double b) {
    const auto r = rhs.size();
    for (const auto& t : terms) entries.push_back({r, t.col, t.value});
    senses.push_back(sense);
    rhs.push_back(b);
    return r;
}

void LinearProgram::validate() const {
    const auto n = num_cols();
    detail::require(lower.size() == n && upper.size() == n, "lp: bounds must have one entry per column");
    detail::require(names.empty() || names.size() == n, "lp: names must be empty or one per column");
    detail::require(senses.size() == rhs.size(), "lp: senses and rhs differ in length");
    for (std::size_t j = 0; j < n; ++j) {
        detail::require(std::isfinite(objective[j]), "lp: objective entries must be finite");
        detail::require(!std::isnan(lower[j]) && !std::isnan(upper[j]), "lp: NaN bound");
        detail::require(lower[j] <= upper[j], "lp: lower bound exceeds upper bound");
        detail::require(lower[j] < inf && upper[j] > -inf, "lp: bound on the wrong side of infinity");
    }
    for (double b : rhs) detail::require(std::isfinite(b), "lp: rhs entries must be finite");
    for (const auto& t : entries) {
        detail::require(t.row < rhs.size() && t.col < n, "lp: triplet index out of range");
        detail::require(std::isfinite(t.value), "lp: matrix entries must be finite");
    }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::span<const Triplet> t) {
    std::vector<Triplet> sorted(t.begin(), t.end());
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_start.assign(rows + 1, 0);
    for (std::size_t i = 0; i < sorted.size();) {
        const auto& head = sorted[i];
        if (head.row >= rows || head.col >= cols) detail::invalid("csr: triplet index out of range");
        double v = 0;
        std::size_t k = i;
        for (; k < sorted.size() && sorted[k].row == head.row && sorted[k].col == head.col; ++k)
            v += sorted[k].value;
        if (v != 0) {
            m.col_index.push_back(head.col);
            m.values.push_back(v);
            ++m.row_start[head.row + 1];
        }
        i = k;
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_start[r + 1] += m.row_start[r];
    return m;
}

double CsrMatrix::row_dot(std::size_t r, std::span<const double> x) const {
    double s = 0;
    for (std::size_t e = row_start[r]; e < row_start[r + 1]; ++e) s += values[e] * x[col_index[e]];
    return s;
}

const char* to_string(Status s) noexcept {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration-limit";
    }
    return "unknown";
}

void SolverOptions::validate() const {
    detail::require(feas_tol > 0 && gap_tol > 0, "solver: tolerances must be positive");
    detail::require(refactor_interval > 0, "solver: refactor interval must be positive");
    detail::require(perturbation >= 0 && perturbation < 1e-2, "solver: perturbation must be in [0, 1e-2)");
}

LPSolution solve_lp(const LinearProgram& lp, const SolverOptions& opts, std::span<const double> start) {
    LPSolution sol;
    if (opts.algorithm == Algorithm::interior_point) {
        lp.validate();
        opts.validate();
        sol = solve_interior_point(lp, opts);
    } else {
        SimplexEngine engine(lp, opts, start);
        sol = engine.solve();
    }
    if (sol.status == Status::optimal) sol.residuals = certify(lp, sol);
    return sol;
}

Residuals certify(const LinearProgram& lp, const LPSolution& sol) {
    const auto n = lp.num_cols();
    const auto m = lp.num_rows();
    if (sol.primal.size() != n || sol.dual.size() != m)
        detail::invalid("certify: solution dimensions do not match the program");
    const auto a = CsrMatrix::from_triplets(m, n, lp.entries);
    Residuals res;
    auto bump = [](double& acc, double v) { acc = std::max(acc, v); };

    for (std::size_t r = 0; r < m; ++r) {
        const double ax = a.row_dot(r, sol.primal);
        const double diff = ax - lp.rhs[r];
        switch (lp.senses[r]) {
            case Sense::greater_equal:
                bump(res.primal_infeasibility, -diff);
                bump(res.dual_infeasibility, -sol.dual[r]);
                break;
            case Sense::less_equal:
                bump(res.primal_infeasibility, diff);
                bump(res.dual_infeasibility, sol.dual[r]);
                break;
            case Sense::equal: bump(res.primal_infeasibility, std::abs(diff)); break;
        }
    }
    std::vector<double> z(lp.objective);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t e = a.row_start[r]; e < a.row_start[r + 1]; ++e)
            z[a.col_index[e]] -= a.values[e] * sol.dual[r];

    double primal_obj = 0, dual_obj = 0;
    for (std::size_t r = 0; r < m; ++r) dual_obj += lp.rhs[r] * sol.dual[r];
    for (std::size_t j = 0; j < n; ++j) {
        const double x = sol.primal[j];
        primal_obj += lp.objective[j] * x;
        bump(res.primal_infeasibility, lp.lower[j] - x);
        bump(res.primal_infeasibility, x - lp.upper[j]);
        if (z[j] > 0) {
            if (std::isfinite(lp.lower[j]))
                dual_obj += z[j] * lp.lower[j];
            else
                bump(res.dual_infeasibility, z[j]);
        } else if (z[j] < 0) {
            if (std::isfinite(lp.upper[j]))
                dual_obj += z[j] * lp.upper[j];
            else
                bump(res.dual_infeasibility, -z[j]);
        }
    }
    res.primal_objective = primal_obj;
    res.dual_objective = dual_obj;
    res.complementarity_gap = std::abs(primal_obj - dual_obj);
    res.relative_gap = res.complementarity_gap / (1.0 + std::abs(primal_obj));
    return res;
}

double check_farkas(const LinearProgram& lp, const LPSolution& sol, double* imbalance) {
    const auto n = lp.num_cols();
    const auto m = lp.num_rows();
    if (sol.farkas_rows.size() != m || sol.farkas_bounds.size() != n)
        detail::invalid("check_farkas: no infeasibility witness attached");
    std::vector<double> combo(sol.farkas_bounds);
    double value = 0;
    for (const auto& t : lp.entries) combo[t.col] += t.value * sol.farkas_rows[t.row];
    for (std::size_t r = 0; r < m; ++r) {
        const double y = sol.farkas_rows[r];
        const bool ok = lp.senses[r] == Sense::equal || (lp.senses[r] == Sense::greater_equal ? y >= 0 : y <= 0);
        if (!ok && std::abs(y) > 1e-12) return -inf;
        value += y * lp.rhs[r];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double y = sol.farkas_bounds[j];
        if (y > 0) value += y * lp.lower[j];
        if (y < 0) value += y * lp.upper[j];
    }
    if (imbalance) {
        *imbalance = 0;
        for (double c : combo) *imbalance = std::max(*imbalance, std::abs(c));
    }
    return value;
}

void write_text(std::ostream& os, const LinearProgram& lp) {
    auto col_name = [&](std::size_t j) {
        return lp.names.empty() || lp.names[j].empty() ? "x" + std::to_string(j) : lp.names[j];
    };
    const auto a = CsrMatrix::from_triplets(lp.num_rows(), lp.num_cols(), lp.entries);
    os << "obj min";
    for (std::size_t j = 0; j < lp.num_cols(); ++j)
        if (lp.objective[j] != 0) os << ' ' << lp.objective[j] << ':' << col_name(j);
    os << '\n';
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
        const char* sense = lp.senses[r] == Sense::less_equal ? "<=" : lp.senses[r] == Sense::greater_equal ? ">=" : "=";
        os << 'r' << r << ' ' << sense << ' ' << lp.rhs[r];
        for (std::size_t e = a.row_start[r]; e < a.row_start[r + 1]; ++e)
            os << ' ' << a.values[e] << ':' << col_name(a.col_index[e]);
        os << '\n';
    }
    for (std::size_t j = 0; j < lp.num_cols(); ++j)
        os << "bound " << col_name(j) << ' ' << lp.lower[j] << ' ' << lp.upper[j] << '\n';
}

IncrementalSolver::IncrementalSolver(const LinearProgram& lp, const SolverOptions& opts,
                                     std::span<const double> start)
    : engine_(std::make_unique<SimplexEngine>(lp, opts, start)), lp_(lp) {}

IncrementalSolver::~IncrementalSolver() = default;
IncrementalSolver::IncrementalSolver(IncrementalSolver&&) noexcept = default;
IncrementalSolver& IncrementalSolver::operator=(IncrementalSolver&&) noexcept = default;

LPSolution IncrementalSolver::solve() {
    auto sol = engine_->solve();
    if (sol.status == Status::optimal) sol.residuals = certify(lp_, sol);
    return sol;
}

LPSolution IncrementalSolver::add_rows_and_resolve(const LinearProgram& lp) {
    auto sol = engine_->append_rows_and_resolve(lp);
    lp_ = lp;
    if (sol.status == Status::optimal) sol.residuals = certify(lp_, sol);
    return sol;
}

std::size_t IncrementalSolver::total_iterations() const noexcept { return engine_->iterations(); }

}  // namespace drcr::lp
