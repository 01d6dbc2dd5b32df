#include "drcr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "drcr/error.hpp"
#include "drcr/lp.hpp"

namespace drcr {

void LseConfig::validate() const {
    detail::require(c > 0 && std::isfinite(c), "lse: c must be > 0");
    detail::require(tolerance > 0 && tolerance < 1, "lse: tolerance must be in (0, 1)");
    detail::require(residual_tolerance > 0 && residual_tolerance < 1, "lse: residual_tolerance must be in (0, 1)");
    detail::require(max_iterations > 0, "lse: max_iterations must be positive");
}

// ---------------------------------------------------------------------------
// Capped least-squares convex regression.
//
// Variables x = (g, xi). OSQP-style ADMM on
//   min 1/2 sum (g_i - Y_i)^2   s.t.  l <= A x <= u
// with one row per ordered pair (normalized to unit length) and one identity
// row per xi entry carrying the cap. The linear system matrix is small and
// dense (n (d+1) columns), so it is factored once per rho with a dense
// Cholesky.

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Qp {
    SpMat A;
    Eigen::VectorXd l, u, q;
    std::size_t n_g = 0;
    std::vector<double> row_norm;  // convexity rows only
    std::size_t conv_rows = 0;
};

Qp build_qp(const Dataset& data, double c) {
    const auto n = data.n(), d = data.d();
    const auto nx = n * (d + 1);
    Qp qp;
    qp.n_g = n;
    qp.conv_rows = n * (n - 1);
    const auto m = qp.conv_rows + n * d;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(qp.conv_rows * (d + 2) + n * d);
    qp.l.resize(static_cast<Eigen::Index>(m));
    qp.u.resize(static_cast<Eigen::Index>(m));
    qp.row_norm.reserve(qp.conv_rows);
    int r = 0;
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto xi = data.x(i), xj = data.x(j);
            double norm2 = 2.0;
            for (std::size_t k = 0; k < d; ++k) {
                diff[k] = xj[k] - xi[k];
                norm2 += diff[k] * diff[k];
            }
            const double s = 1.0 / std::sqrt(norm2);
            qp.row_norm.push_back(s);
            t.emplace_back(r, static_cast<int>(j), s);
            t.emplace_back(r, static_cast<int>(i), -s);
            for (std::size_t k = 0; k < d; ++k)
                if (diff[k] != 0) t.emplace_back(r, static_cast<int>(n + i * d + k), -s * diff[k]);
            qp.l[r] = 0.0;
            qp.u[r] = std::numeric_limits<double>::infinity();
            ++r;
        }
    for (std::size_t k = 0; k < n * d; ++k, ++r) {
        t.emplace_back(r, static_cast<int>(n + k), 1.0);
        qp.l[r] = -c;
        qp.u[r] = c;
    }
    qp.A.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(nx));
    qp.A.setFromTriplets(t.begin(), t.end());
    qp.A.makeCompressed();
    qp.q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx));
    for (std::size_t i = 0; i < n; ++i) qp.q[static_cast<Eigen::Index>(i)] = -data.y(i);
    return qp;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

LseFit fit_convex_lse_detailed(const Dataset& data, const LseConfig& cfg) {
    cfg.validate();
    const auto n = data.n(), d = data.d();
    detail::require(n >= 2, "lse: need at least 2 observations");
    const Qp qp = build_qp(data, cfg.c);
    const auto nx = static_cast<Eigen::Index>(n * (d + 1));
    const auto ng = static_cast<Eigen::Index>(n);

    Eigen::VectorXd pdiag = Eigen::VectorXd::Zero(nx);
    pdiag.head(ng).setOnes();
    const Eigen::MatrixXd AtA = Eigen::MatrixXd(SpMat(qp.A.transpose() * qp.A));

    const double sigma = 1e-6, alpha = 1.6;
    double rho = 0.1;
    Eigen::LLT<Eigen::MatrixXd> llt;
    auto factor = [&] {
        Eigen::MatrixXd K = rho * AtA;
        K.diagonal() += pdiag + Eigen::VectorXd::Constant(nx, sigma);
        llt.compute(K);
        if (llt.info() != Eigen::Success) throw SolverError("lse: KKT matrix factorization failed");
    };
    factor();

    double mean = 0;
    for (double y : data.ys()) mean += y;
    mean /= static_cast<double>(n);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
    x.head(ng).setConstant(mean);
    Eigen::VectorXd z = qp.A * x, y = Eigen::VectorXd::Zero(qp.A.rows());
    Eigen::VectorXd xt, zt, zh, Ax, Aty, Px;

    const double eps = cfg.tolerance;
    KktReport rep;
    double last_obj = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t it = 0;
    // rho updates back off so that rho cannot oscillate
    std::size_t adapt_gap = 100, next_adapt = 100;
    auto objective_of = [&](const Eigen::VectorXd& v) {
        return 0.5 * (v.head(ng) + qp.q.head(ng)).squaredNorm();
    };
    for (it = 1; it <= cfg.max_iterations; ++it) {
        Eigen::VectorXd rhs = sigma * x - qp.q + qp.A.transpose() * (rho * z - y);
        xt = llt.solve(rhs);
        zt = qp.A * xt;
        x = alpha * xt + (1 - alpha) * x;
        zh = alpha * zt + (1 - alpha) * z;
        Eigen::VectorXd znew = (zh + y / rho).cwiseMax(qp.l).cwiseMin(qp.u);
        y += rho * (zh - znew);
        z = std::move(znew);

        if (it % 25 != 0) continue;
        Ax = qp.A * x;
        Aty = qp.A.transpose() * y;
        Px = pdiag.cwiseProduct(x);
        const double rp = inf_norm(Ax - z);
        const double rd = inf_norm(Px + qp.q + Aty);
        const double sp = std::max(inf_norm(Ax), inf_norm(z));
        const double sd = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(qp.q)});
        const double obj = objective_of(x);
        const double er = cfg.residual_tolerance;
        const bool small = rp <= er * (1 + sp) && rd <= er * (1 + sd);
        const bool flat = std::abs(obj - last_obj) <= eps * std::max(1.0, std::abs(obj));
        last_obj = obj;
        rep.dual_residual = rd;
        if (small && flat) {
            converged = true;
            break;
        }
        if (it >= next_adapt) {
            const double ratio = std::sqrt((rp / (1e-12 + sp)) / (rd / (1e-12 + sd) + 1e-30));
            const double proposed = std::clamp(rho * ratio, 1e-6, 1e6);
            if (proposed > 5 * rho || proposed < 0.2 * rho) {
                rho = proposed;
                factor();
                adapt_gap *= 2;
            }
            next_adapt = it + adapt_gap;
        }
    }

    // primal residual against the unnormalized constraints
    std::vector<double> g(x.data(), x.data() + n);
    std::vector<double> xi(x.data() + n, x.data() + n * (d + 1));
    double viol = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double v = g[i] - g[j];
            const auto xa = data.x(i), xb = data.x(j);
            for (std::size_t k = 0; k < d; ++k) v += xi[i * d + k] * (xb[k] - xa[k]);
            viol = std::max(viol, v);
        }
    for (double v : xi) viol = std::max(viol, std::abs(v) - cfg.c);
    rep.primal_residual = viol;
    rep.iterations = std::min(it, cfg.max_iterations);
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) sse += (data.y(i) - g[i]) * (data.y(i) - g[i]);
    rep.objective = sse / static_cast<double>(n);
    if (!converged) {
        std::ostringstream os;
        os << "lse: no convergence after " << cfg.max_iterations << " iterations (primal_residual="
           << rep.primal_residual << " dual_residual=" << rep.dual_residual << ")";
        throw LseNotConverged(os.str(), rep);
    }

    // exact feasibility: re-anchor every piece on the active piece at its point
    for (auto& v : xi) v = std::clamp(v, -cfg.c, cfg.c);
    std::vector<AffinePiece> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = data.x(i);
        raw[i] = {g[i], std::vector<double>(xi.begin() + static_cast<std::ptrdiff_t>(i * d),
                                            xi.begin() + static_cast<std::ptrdiff_t>((i + 1) * d)),
                  std::vector<double>(a.begin(), a.end())};
    }
    std::vector<AffinePiece> pieces(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto xj = data.x(j);
        std::size_t best = j;
        double best_v = raw[j].g;
        for (std::size_t i = 0; i < n; ++i) {
            double v = raw[i].g;
            for (std::size_t k = 0; k < d; ++k) v += raw[i].xi[k] * (xj[k] - raw[i].anchor[k]);
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
        pieces[j] = {best_v, raw[best].xi, raw[j].anchor};
    }
    MaxAffineModel model(d, std::move(pieces), cfg.c, FitMeta{0.0, rep.iterations, 0.0});
    const auto fx = predict_all(model, data);
    double obj = 0;
    for (std::size_t i = 0; i < n; ++i) obj += (data.y(i) - fx[i]) * (data.y(i) - fx[i]);
    obj /= static_cast<double>(n);
    MaxAffineModel out(d, model.pieces(), cfg.c, FitMeta{obj, rep.iterations, 0.0});
    return {std::move(out), rep, obj};
}

MaxAffineModel fit_convex_lse(const Dataset& data, const LseConfig& cfg) {
    return std::move(fit_convex_lse_detailed(data, cfg).model);
}

// ---------------------------------------------------------------------------
// Gaussian kernel regression.
//
// Weights are normalized through log-sum-exp. The normalizing constant
// (2 pi)^{-d/2} cancels in the ratio but decides when the plain formula would
// have divided by an underflowed zero; that case returns the training mean.

namespace {

const double kLogTiny = std::log(std::numeric_limits<double>::denorm_min());

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

}  // namespace

double kernel_predict(const KernelModel& model, std::span<const double> x) {
    detail::require(model.train != nullptr, "kernel: no training data");
    detail::require(model.h > 0 && std::isfinite(model.h), "kernel: bandwidth must be > 0");
    const auto& tr = *model.train;
    detail::require(x.size() == tr.d(), "kernel: dimension mismatch");
    const auto n = tr.n();
    const double inv2h2 = 1.0 / (2.0 * model.h * model.h);
    std::vector<double> q(n);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = -sq_dist(x, tr.x(i)) * inv2h2;
        m = std::max(m, q[i]);
    }
    // averages are taken relative to a reference response so that constant
    // responses come back exactly
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (q[i] > q[top]) top = i;
    const double ref = tr.y(top);
    double sw = 0, swy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(q[i] - m);
        sw += w;
        swy += w * (tr.y(i) - ref);
    }
    const double log_den = -0.5 * static_cast<double>(tr.d()) * std::log(2 * std::numbers::pi) + m + std::log(sw);
    if (log_den < kLogTiny) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += tr.y(i) - tr.y(0);
        return tr.y(0) + s / static_cast<double>(n);
    }
    return ref + swy / sw;
}

LooEvaluator::LooEvaluator(const Dataset& data) : data_(data) {
    const auto n = data.n();
    sq_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sq_[i * n + j] = sq_dist(data.x(i), data.x(j));
}

double LooEvaluator::criterion(double h) const {
    const auto n = data_.n();
    const double inv2h2 = 1.0 / (2.0 * h * h);
    const double log_norm = -0.5 * static_cast<double>(data_.d()) * std::log(2 * std::numbers::pi);
    std::vector<double> q(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        std::size_t top = n, first = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (first == n) first = j;
            q[j] = -sq_[i * n + j] * inv2h2;
            m = std::max(m, q[j]);
            if (top == n || q[j] > q[top]) top = j;
        }
        const double ref = data_.y(top);
        double sw = 0, swy = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = std::exp(q[j] - m);
            sw += w;
            swy += w * (data_.y(j) - ref);
        }
        double pred;
        if (log_norm + m + std::log(sw) < kLogTiny) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += data_.y(j) - data_.y(first);
            pred = data_.y(first) + s / static_cast<double>(n - 1);
        } else {
            pred = ref + swy / sw;
        }
        const double r = data_.y(i) - pred;
        total += r * r;
    }
    return total;
}

double loo_criterion(const Dataset& data, double h) {
    detail::require(data.n() >= 2, "kernel: leave-one-out needs n >= 2");
    detail::require(h > 0 && std::isfinite(h), "kernel: bandwidth must be > 0");
    return LooEvaluator(data).criterion(h);
}

BandwidthChoice select_bandwidth(const Dataset& data) {
    detail::require(data.n() >= 3, "kernel: bandwidth selection needs n >= 3");
    const LooEvaluator eval(data);
    const double base =
        std::pow(static_cast<double>(data.n()), -1.0 / (static_cast<double>(data.d()) + 4.0));
    BandwidthChoice out;
    out.criterion.resize(100);
    std::size_t best = 0;
    for (std::size_t j = 0; j < 100; ++j) {
        const double C = static_cast<double>(j + 1) / 100.0;
        out.criterion[j] = eval.criterion(C * base);
        if (out.criterion[j] < out.criterion[best]) best = j;
    }
    out.C = static_cast<double>(best + 1) / 100.0;
    out.h = out.C * base;
    return out;
}

// ---------------------------------------------------------------------------
// Linear regression.

MaxAffineModel fit_linear(const Dataset& data, LinearLoss loss) {
    const auto n = data.n(), d = data.d();
    detail::require(n >= 2, "linear: need at least 2 observations");
    std::vector<double> beta(d + 1, 0.0);  // intercept first
    double objective = 0;
    if (loss == LinearLoss::squared) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 1));
        Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            X(r, 0) = 1.0;
            for (std::size_t k = 0; k < d; ++k) X(r, static_cast<Eigen::Index>(k + 1)) = data.x(i)[k];
            Y[r] = data.y(i);
        }
        const Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
        for (std::size_t k = 0; k <= d; ++k) beta[k] = b[static_cast<Eigen::Index>(k)];
        objective = (X * b - Y).squaredNorm() / static_cast<double>(n);
    } else {
        // least absolute deviations: min (1/n) sum r_i, r_i >= |Y_i - b0 - b'X_i|
        lp::LinearProgram prog;
        for (std::size_t k = 0; k <= d; ++k) prog.add_variable(-lp::inf, lp::inf, 0.0);
        for (std::size_t i = 0; i < n; ++i) prog.add_variable(0.0, lp::inf, 1.0 / static_cast<double>(n));
        std::vector<lp::Term> terms(d + 2);
        for (std::size_t i = 0; i < n; ++i) {
            for (double s : {1.0, -1.0}) {
                terms[0] = {d + 1 + i, 1.0};
                terms[1] = {0, s};
                for (std::size_t k = 0; k < d; ++k) terms[k + 2] = {k + 1, s * data.x(i)[k]};
                prog.add_row(terms, lp::Sense::greater_equal, s * data.y(i));
            }
        }
        auto ys = data.ys();
        std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(n / 2), ys.end());
        std::vector<double> start(prog.num_cols(), 0.0);
        start[0] = ys[n / 2];
        for (std::size_t i = 0; i < n; ++i) start[d + 1 + i] = std::abs(data.y(i) - start[0]);
        const auto sol = lp::solve_lp(prog, {}, start);
        if (sol.status != lp::Status::optimal)
            throw SolverError(std::string("linear: LP ended with status=") + lp::to_string(sol.status));
        for (std::size_t k = 0; k <= d; ++k) beta[k] = sol.primal[k];
        objective = sol.objective_value;
    }
    AffinePiece piece{beta[0], std::vector<double>(beta.begin() + 1, beta.end()), std::vector<double>(d, 0.0)};
    return MaxAffineModel(d, {piece}, MaxAffineModel::unbounded, FitMeta{objective, 0, 0.0});
}

}  // namespace drcr
