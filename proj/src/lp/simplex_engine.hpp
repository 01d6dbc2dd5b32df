#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "basis_factor.hpp"
#include "drcr/lp.hpp"

namespace drcr::lp {

// Simplex method on the inequality form of an LP.
//
// Every row a'x >= b, a'x <= b and every finite bound becomes a one-sided
// constraint a_k'x >= beta_k. A vertex is described by a working set of
// exactly N one-sided constraints held with equality (N = number of columns),
// so the basis matrix is N x N no matter how many rows the LP has. That is
// the right trade for the convex regression LPs, which have O(n^2) rows but
// only O(nd) columns.
//
// Free variables without a defining constraint yet are held in the working
// set by "temporary" constraints x_j = current value; these carry free-sign
// multipliers and are dropped as soon as pricing finds them useful.
//
// Phase 1 uses a single artificial column s (index N-1) that is added to the
// rows violated at the starting point: min s subject to a_k'x + s >= beta_k.
// Once s reaches zero it is locked there and decoupled from the rows.
//
// The working-set matrix is kept as a sparse LU plus an eta file of rank-one
// updates, refactorized periodically.
class SimplexEngine {
public:
    SimplexEngine(const LinearProgram& lp, const SolverOptions& opts, std::span<const double> start);

    LPSolution solve();
    LPSolution append_rows_and_resolve(const LinearProgram& lp);
    std::size_t iterations() const noexcept { return iterations_; }

private:
    enum class Kind : std::uint8_t { temp, row, lower, upper, fixed };
    struct Cid {
        Kind kind;
        std::uint32_t index;  ///< side index for rows, column otherwise
    };
    struct Side {
        std::uint32_t row;
        double sign;
        bool art;
    };
    enum class Outcome { optimal, unbounded, infeasible, limit };

    // setup
    void add_rows_from(const LinearProgram& lp, std::size_t first_row);
    void compute_scaling(const LinearProgram& lp);
    void initial_working_set(std::span<const double> start);

    // constraint algebra
    double beta(Cid c) const;
    double slack(Cid c) const;
    double side_rate(std::size_t k, std::span<const double> ad, std::span<const double> d) const;
    void row_times_inverse(Cid c, std::vector<double>& v) const;
    void inverse_column(std::size_t p, std::vector<double>& d) const;
    std::uint64_t order_key(Cid c) const;
    bool is_unit(Cid c) const { return c.kind != Kind::row; }

    void refactor();
    void recompute_state();
    void pivot(std::size_t p, Cid q);
    void times_matrix(std::span<const double> d, std::vector<double>& ad) const;
    void set_in_ws(Cid c, bool on);
    double max_violation(Cid* worst) const;
    double objective(std::span<const double> c) const;

    Outcome primal(bool phase1);
    Outcome dual();
    Outcome finish();
    void end_phase1();
    void unperturb();

    LPSolution make_solution(Status status) const;
    void note_progress(double value);

    SolverOptions opts_;
    double ftol_, dtol_, ptol_;
    std::size_t max_iter_ = 0;
    std::size_t iterations_ = 0;
    std::size_t since_refactor_ = 0;
    bool bland_ = false;
    std::size_t stall_ = 0;
    double best_progress_ = 0;

    std::size_t n_ = 0;  ///< structural columns
    std::size_t N_ = 0;  ///< n_ + 1 (artificial)
    std::vector<double> colscale_, cost_, phase1_cost_, lo_, hi_;

    // scaled rows, compressed
    std::vector<std::size_t> row_start_{0};
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> val_;
    std::vector<double> rhs_, rowscale_;
    std::vector<Sense> sense_;

    std::vector<Side> sides_;
    std::vector<char> side_in_ws_;
    std::vector<std::int8_t> var_ws_;  ///< -1 none, else static_cast<int>(Kind)

    std::vector<Cid> ws_;
    std::vector<double> temp_val_;
    BasisFactor basis_;
    std::vector<double> x_, lam_, act_;
    bool in_phase1_ = false;
    bool perturbed_ = false;
    std::vector<double> pert_;  ///< per side, in scaled units

    // scratch
    std::vector<double> d_, ad_, v_, w_;
    std::vector<std::uint32_t> nz_;

    // infeasibility witness in scaled one-sided terms, filled on detection
    std::vector<std::pair<Cid, double>> farkas_;
    std::vector<double> ray_;
};

}  // namespace drcr::lp
