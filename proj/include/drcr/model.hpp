#pragma once

// Datasets, max-affine models and the empirical loss metrics shared by the
// fitting code, the baselines and the benchmark harness.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace drcr {

/// n paired observations (X_i in R^d, Y_i in R). Immutable after construction.
class Dataset {
public:
    /// `xs` is row-major n*d. Throws InvalidArgument on shape mismatch or
    /// non-finite entries.
    Dataset(std::size_t d, std::vector<double> xs, std::vector<double> ys, std::string tag = {});

    std::size_t n() const noexcept { return ys_.size(); }
    std::size_t d() const noexcept { return d_; }
    std::span<const double> x(std::size_t i) const noexcept { return {xs_.data() + i * d_, d_}; }
    double y(std::size_t i) const noexcept { return ys_[i]; }
    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& ys() const noexcept { return ys_; }
    const std::string& tag() const noexcept { return tag_; }

    /// Rows `idx` (in that order) as a new dataset.
    Dataset subset(std::span<const std::size_t> idx, std::string tag = {}) const;

private:
    std::size_t d_;
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::string tag_;
};

struct AffinePiece {
    double g = 0.0;              ///< value at the anchor
    std::vector<double> xi;      ///< gradient
    std::vector<double> anchor;
};

struct FitMeta {
    double objective = 0.0;
    std::size_t iterations = 0;
    double delta = 0.0;
};

/// f(x) = max_i ( g_i + <xi_i, x - anchor_i> ).
class MaxAffineModel {
public:
    static constexpr double unbounded = std::numeric_limits<double>::infinity();

    MaxAffineModel(std::size_t d, std::vector<AffinePiece> pieces, double grad_cap = unbounded,
                   FitMeta meta = {});

    std::size_t d() const noexcept { return d_; }
    const std::vector<AffinePiece>& pieces() const noexcept { return pieces_; }
    double grad_cap() const noexcept { return grad_cap_; }
    const FitMeta& fit_meta() const noexcept { return meta_; }

private:
    std::size_t d_;
    std::vector<AffinePiece> pieces_;
    double grad_cap_;
    FitMeta meta_;
};

struct LossReport {
    double l1 = 0.0;
    double l2 = 0.0;
    std::size_t n_points = 0;
};

double predict(const MaxAffineModel& model, std::span<const double> x);

/// predict() at every covariate row of `data`.
std::vector<double> predict_all(const MaxAffineModel& model, const Dataset& data);

/// max_i ||xi_i||_inf, i.e. the largest l-infinity norm of any subgradient.
double gradient_sup_norm(const MaxAffineModel& model);

double empirical_l1(std::span<const double> f_vals, std::span<const double> g_vals);
double empirical_l2(std::span<const double> f_vals, std::span<const double> g_vals);
LossReport loss_report(std::span<const double> f_vals, std::span<const double> g_vals);

/// delta * ||grad f||_inf + (1/n) sum |Y_i - f(X_i)|.
///
/// This is the worst-case expected absolute loss over the l1-Wasserstein ball
/// of radius delta around the empirical measure (covariates move, responses
/// do not). The Lipschitz constant of the absolute loss in its second
/// argument is 1, so no extra factor appears in front of the penalty.
double dual_objective(const MaxAffineModel& model, const Dataset& data, double delta);

// Serialization. Numbers are written with 17 significant digits so a
// save/load cycle reproduces every double exactly.
std::string serialize(const MaxAffineModel& model);
MaxAffineModel deserialize(const std::string& text);

}  // namespace drcr
