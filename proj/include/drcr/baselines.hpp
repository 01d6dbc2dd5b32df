#pragma once

// Comparison estimators: gradient-capped least-squares convex regression,
// Nadaraya-Watson with a Gaussian kernel, and linear regression.

#include <span>
#include <vector>

#include "drcr/error.hpp"
#include "drcr/model.hpp"

namespace drcr {

struct LseConfig {
    double c = 10.0;                    ///< cap on every |xi_i^k|
    double tolerance = 1e-6;            ///< relative objective change between checks
    double residual_tolerance = 1e-4;   ///< scaled primal and dual residuals
    std::size_t max_iterations = 50000;

    void validate() const;
};

struct KktReport {
    double primal_residual = 0.0;  ///< max convexity/cap violation of the iterate
    double dual_residual = 0.0;    ///< stationarity residual
    double objective = 0.0;        ///< (1/n) sum (Y_i - g_i)^2 of the iterate
    std::size_t iterations = 0;
};

/// Non-convergence: carries the best iterate's report.
class LseNotConverged : public SolverError {
public:
    LseNotConverged(const std::string& what, KktReport report)
        : SolverError(what), report_(report) {}
    const KktReport& report() const noexcept { return report_; }

private:
    KktReport report_;
};

struct LseFit {
    MaxAffineModel model;
    KktReport kkt;
    double objective = 0.0;  ///< (1/n) sum (Y_i - f(X_i))^2 of the returned model
};

/// argmin (1/n) sum (Y_i - f(X_i))^2 over convex f with ||grad f||_inf <= c.
/// The returned model satisfies the convexity and cap constraints exactly:
/// each piece is re-anchored on the iterate's active piece at its point.
LseFit fit_convex_lse_detailed(const Dataset& data, const LseConfig& cfg = {});
MaxAffineModel fit_convex_lse(const Dataset& data, const LseConfig& cfg = {});

struct KernelModel {
    const Dataset* train = nullptr;
    double h = 1.0;
};

double kernel_predict(const KernelModel& model, std::span<const double> x);

/// sum_i (Y_i - khat^{(-i)}(X_i))^2 at bandwidth h.
double loo_criterion(const Dataset& data, double h);

struct BandwidthChoice {
    double h = 0.0;
    double C = 0.0;
    std::vector<double> criterion;  ///< one value per grid point C = j/100
};

/// h = C n^{-1/(d+4)} with C on {0.01, ..., 1.00}; ties go to the smaller C.
BandwidthChoice select_bandwidth(const Dataset& data);

/// Precomputed pairwise squared distances for repeated LOO evaluation.
class LooEvaluator {
public:
    explicit LooEvaluator(const Dataset& data);
    double criterion(double h) const;

private:
    const Dataset& data_;
    std::vector<double> sq_;  ///< n x n squared distances
    double mean_ = 0.0;
};

enum class LinearLoss { absolute, squared };

/// Affine fit as a one-piece max-affine model (anchor at the origin).
MaxAffineModel fit_linear(const Dataset& data, LinearLoss loss = LinearLoss::absolute);

}  // namespace drcr
