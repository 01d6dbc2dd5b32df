#pragma once

// Sparse linear programming: problem container, simplex / interior-point
// solve, and a solver-independent residual check.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace drcr::lp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, greater_equal, equal };

struct Term {
    std::size_t col;
    double value;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// minimize c'x subject to  a_r'x (<=|>=|=) b_r,  lo <= x <= hi.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> names;  ///< optional, empty or one per column

    std::vector<Triplet> entries;
    std::vector<Sense> senses;
    std::vector<double> rhs;

    std::size_t num_cols() const noexcept { return objective.size(); }
    std::size_t num_rows() const noexcept { return rhs.size(); }

    std::size_t add_variable(double lo, double hi, double cost, std::string name = {});
    std::size_t add_row(std::span<const Term> terms, Sense sense, double b);
    std::size_t add_row(std::initializer_list<Term> terms, Sense sense, double b) {
        return add_row(std::span<const Term>(terms.begin(), terms.size()), sense, b);
    }

    /// Throws InvalidArgument when indices are out of range, lo > hi, a
    /// value is NaN, or names has the wrong length.
    void validate() const;
};

/// Compressed-row copy of the constraint matrix with duplicate (row, col)
/// entries summed and explicit zeros dropped.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_start;  ///< size rows + 1
    std::vector<std::size_t> col_index;
    std::vector<double> values;

    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::span<const Triplet> t);
    /// a_r' x
    double row_dot(std::size_t r, std::span<const double> x) const;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(Status s) noexcept;

enum class Algorithm { simplex, interior_point };

struct SolverOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-7;
    std::size_t max_iterations = 0;  ///< 0 means 200 * (rows + cols)
    bool scaling = true;
    Algorithm algorithm = Algorithm::simplex;
    std::size_t stall_threshold = 60;     ///< non-improving pivots before Bland's rule
    std::size_t refactor_interval = 150;  ///< basis updates between refactorizations
    /// Relative size of the temporary right-hand-side relaxation used against
    /// degeneracy (0 disables it).
    double perturbation = 1e-6;

    void validate() const;
};

struct Residuals {
    double primal_infeasibility = 0.0;  ///< max violation of any row or bound
    double dual_infeasibility = 0.0;    ///< max violation of dual sign / bound conditions
    double complementarity_gap = 0.0;   ///< |primal objective - dual objective|
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double relative_gap = 0.0;          ///< gap / (1 + |primal objective|)
};

struct LPSolution {
    Status status = Status::iteration_limit;
    std::vector<double> primal;
    std::vector<double> dual;           ///< one multiplier per row
    std::vector<double> reduced_costs;  ///< c - A'y, one per column
    double objective_value = 0.0;
    Residuals residuals;
    std::size_t iterations = 0;

    /// Set when status == infeasible: y >= 0 over the one-sided constraint
    /// set with sum_k y_k a_k = 0 and sum_k y_k b_k > 0. `farkas_rows` holds
    /// the row part (sign convention as `dual`), `farkas_bounds` the column
    /// part (positive = lower bound, negative = upper bound).
    std::vector<double> farkas_rows;
    std::vector<double> farkas_bounds;
    /// Set when status == unbounded: a feasible direction with c'd < 0.
    std::vector<double> ray;
};

/// Solve from scratch. `start`, when non-empty, seeds phase 1 (a feasible
/// start skips it entirely).
LPSolution solve_lp(const LinearProgram& lp, const SolverOptions& opts = {},
                    std::span<const double> start = {});

/// Recomputes residuals of (primal, dual) against `lp` directly from the
/// problem data. Throws InvalidArgument on dimension mismatch.
Residuals certify(const LinearProgram& lp, const LPSolution& sol);

/// Checks an infeasibility witness attached to `sol`; returns b'y (> 0 for
/// a valid witness) and writes max |sum y_k a_k| to `*imbalance`.
double check_farkas(const LinearProgram& lp, const LPSolution& sol, double* imbalance);

/// Debug dump: one constraint per line, `name sense rhs  coef:col ...`.
void write_text(std::ostream& os, const LinearProgram& lp);

class SimplexEngine;

/// Incremental simplex for row generation: solve, append rows to the same
/// LinearProgram, resolve from the previous basis (dual simplex).
class IncrementalSolver {
public:
    IncrementalSolver(const LinearProgram& lp, const SolverOptions& opts,
                      std::span<const double> start = {});
    ~IncrementalSolver();
    IncrementalSolver(IncrementalSolver&&) noexcept;
    IncrementalSolver& operator=(IncrementalSolver&&) noexcept;

    LPSolution solve();
    /// `lp` must be the original program with rows appended (columns and
    /// existing rows unchanged).
    LPSolution add_rows_and_resolve(const LinearProgram& lp);
    std::size_t total_iterations() const noexcept;

private:
    std::unique_ptr<SimplexEngine> engine_;
    LinearProgram lp_;
};

}  // namespace drcr::lp
