#pragma once

// The robust convex regression estimator: an absolute-loss fit over
// max-affine functions with a gradient sup-norm penalty, solved as one LP
// (optionally with lazily generated convexity rows).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "drcr/lp.hpp"
#include "drcr/model.hpp"

namespace drcr {

enum class ScheduleKind { experimental, theoretical, explicit_value };

const char* to_string(ScheduleKind k) noexcept;
/// "experimental" | "theoretical" | "fixed" (alias "explicit").
ScheduleKind parse_schedule(const std::string& s);

struct RadiusSchedule {
    ScheduleKind kind = ScheduleKind::experimental;
    std::optional<double> gamma;  ///< required for theoretical
    double multiplier = 1.0;      ///< leading constant of the theoretical rate
    double value = 0.0;           ///< used by explicit_value
};

/// experimental: n^{-2/d}; theoretical: n^{-2/d} (log n)^{1+3/gamma}.
double default_radius(std::size_t n, std::size_t d, ScheduleKind kind, std::optional<double> gamma = {});
double resolve_radius(std::size_t n, std::size_t d, const RadiusSchedule& s);

struct FitConfig {
    /// Radius; when unset it comes from `schedule`.
    std::optional<double> delta;
    RadiusSchedule schedule;
    /// Bound on every |xi_i^k|; unset means ln n.
    std::optional<double> grad_cap;
    /// Unset means on for n > 120.
    std::optional<bool> row_generation;
    double violation_tol = 1e-8;
    lp::SolverOptions solver;
    /// Receives key=value diagnostics when non-null.
    std::ostream* log = nullptr;

    void validate() const;
    double radius(std::size_t n, std::size_t d) const;
    double cap(std::size_t n) const;
    bool lazy(std::size_t n) const;
};

/// Column layout: g_0..g_{n-1}, xi (row-major n x d), r_0..r_{n-1}, t.
struct DrcrLpIndex {
    std::size_t n = 0;
    std::size_t d = 0;

    std::size_t g(std::size_t i) const noexcept { return i; }
    std::size_t xi(std::size_t i, std::size_t k) const noexcept { return n + i * d + k; }
    std::size_t r(std::size_t i) const noexcept { return n + n * d + i; }
    std::size_t t() const noexcept { return n + n * d + n; }
    std::size_t num_cols() const noexcept { return n * (d + 2) + 1; }

    std::size_t residual_rows() const noexcept { return 2 * n; }
    std::size_t penalty_rows() const noexcept { return 2 * n * d; }
    /// Convexity row for the ordered pair (i, j) lives at
    /// residual_rows() + penalty_rows() + position in `pairs`.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct DrcrLp {
    lp::LinearProgram lp;
    DrcrLpIndex index;
};

/// Full program with all n^2 - n convexity rows (pairs in (i, j) order).
DrcrLp build_drcr_lp(const Dataset& data, const FitConfig& cfg);

/// Same program with only residual, penalty and bound rows.
DrcrLp build_drcr_lp_base(const Dataset& data, const FitConfig& cfg);

/// g_j - g_i - <xi_i, X_j - X_i> >= 0.
void add_convexity_row(DrcrLp& prog, const Dataset& data, std::size_t i, std::size_t j);

/// The constant-at-median point, feasible for every instance.
std::vector<double> median_start(const Dataset& data, const DrcrLpIndex& index);

struct DrcrFit {
    MaxAffineModel model;
    std::vector<double> g;  ///< LP values g_i
    double objective = 0.0;
    double delta = 0.0;
    double grad_cap = 0.0;
    std::size_t convexity_rows = 0;  ///< rows present in the final LP
    std::size_t rounds = 0;          ///< solves (1 without row generation)
    std::size_t lp_iterations = 0;
    double max_violation = 0.0;      ///< over all n^2 - n convexity rows
};

DrcrFit fit_drcr_detailed(const Dataset& data, const FitConfig& cfg = {});
MaxAffineModel fit_drcr(const Dataset& data, const FitConfig& cfg = {});

/// Largest g_i + <xi_i, X_j - X_i> - g_j over ordered pairs.
double max_convexity_violation(const Dataset& data, std::span<const double> g, std::span<const double> xi);

/// Brute-force lower bound on the worst-case expected absolute loss over the
/// l1-Wasserstein ball (covariates move, responses stay). The search grid
/// grows with `resolution`; refining by any integer factor never lowers the
/// result. Limited to n <= 8, d <= 2.
double worst_case_loss_oracle(const MaxAffineModel& model, const Dataset& data, double delta,
                              std::size_t resolution);

}  // namespace drcr
