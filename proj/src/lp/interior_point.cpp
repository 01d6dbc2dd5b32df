// Dense primal-dual interior point (Mehrotra predictor-corrector) for small
// programs. Used to cross-check the simplex path; not tuned for size.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "drcr/lp.hpp"

namespace drcr::lp {

namespace {

struct OneSided {
    std::size_t source;  // row index, or column for bounds
    enum { row, lower, upper } kind;
    double sign;
};

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

}  // namespace

LPSolution solve_interior_point(const LinearProgram& lp, const SolverOptions& opts) {
    const auto n = static_cast<Eigen::Index>(lp.num_cols());
    const auto a = CsrMatrix::from_triplets(lp.num_rows(), lp.num_cols(), lp.entries);

    // min c'x  s.t.  G x >= h
    std::vector<OneSided> cons;
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
        if (lp.senses[r] != Sense::less_equal) cons.push_back({r, OneSided::row, 1.0});
        if (lp.senses[r] != Sense::greater_equal) cons.push_back({r, OneSided::row, -1.0});
    }
    for (std::size_t j = 0; j < lp.num_cols(); ++j) {
        if (std::isfinite(lp.lower[j])) cons.push_back({j, OneSided::lower, 1.0});
        if (std::isfinite(lp.upper[j])) cons.push_back({j, OneSided::upper, -1.0});
    }
    const auto m = static_cast<Eigen::Index>(cons.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd h(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& c = cons[static_cast<std::size_t>(k)];
        if (c.kind == OneSided::row) {
            for (std::size_t e = a.row_start[c.source]; e < a.row_start[c.source + 1]; ++e)
                g(k, static_cast<Eigen::Index>(a.col_index[e])) = c.sign * a.values[e];
            h[k] = c.sign * lp.rhs[c.source];
        } else {
            g(k, static_cast<Eigen::Index>(c.source)) = c.sign;
            h[k] = c.kind == OneSided::lower ? lp.lower[c.source] : -lp.upper[c.source];
        }
    }
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(lp.objective.data(), n);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd s = (g * x - h).cwiseMax(1.0);
    Eigen::VectorXd z = Eigen::VectorXd::Ones(m);

    LPSolution sol;
    const std::size_t max_iter = opts.max_iterations ? std::min<std::size_t>(opts.max_iterations, 500) : 200;
    const double hnorm = 1.0 + h.cwiseAbs().maxCoeff();
    const double cnorm = 1.0 + c.cwiseAbs().maxCoeff();
    bool converged = false;
    std::size_t it = 0;
    for (; it < max_iter && m > 0; ++it) {
        const Eigen::VectorXd rp = g * x - s - h;
        const Eigen::VectorXd rd = c - g.transpose() * z;
        const double mu = s.dot(z) / static_cast<double>(m);
        const double pobj = c.dot(x), dobj = h.dot(z);
        if (rp.cwiseAbs().maxCoeff() / hnorm <= opts.feas_tol * 1e-2 &&
            rd.cwiseAbs().maxCoeff() / cnorm <= opts.feas_tol * 1e-2 &&
            std::abs(pobj - dobj) / (1.0 + std::abs(pobj)) <= opts.gap_tol * 1e-2) {
            converged = true;
            break;
        }
        const Eigen::VectorXd dvec = z.cwiseQuotient(s);
        Eigen::MatrixXd k = g.transpose() * dvec.asDiagonal() * g;
        k.diagonal().array() += 1e-12;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(k);

        auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                             Eigen::VectorXd& dz) {
            const Eigen::VectorXd rhs = g.transpose() * (rc.cwiseQuotient(s) - dvec.cwiseProduct(rp)) - rd;
            dx = ldlt.solve(rhs);
            ds = g * dx + rp;
            dz = (rc - z.cwiseProduct(ds)).cwiseQuotient(s);
        };
        Eigen::VectorXd dx, ds, dz;
        direction(-s.cwiseProduct(z), dx, ds, dz);
        const double ap = max_step(s, ds), ad = max_step(z, dz);
        const double mu_aff = (s + ap * ds).dot(z + ad * dz) / static_cast<double>(m);
        const double sigma = std::pow(mu_aff / mu, 3);
        Eigen::VectorXd rc = -s.cwiseProduct(z) - ds.cwiseProduct(dz);
        rc.array() += sigma * mu;
        direction(rc, dx, ds, dz);
        const double tp = std::min(1.0, 0.99 * max_step(s, ds));
        const double td = std::min(1.0, 0.99 * max_step(z, dz));
        x += tp * dx;
        s += tp * ds;
        z += td * dz;
    }
    if (m == 0) converged = c.cwiseAbs().maxCoeff() == 0;

    sol.iterations = it;
    sol.status = converged ? Status::optimal : Status::iteration_limit;
    sol.primal.assign(x.data(), x.data() + n);
    sol.dual.assign(lp.num_rows(), 0.0);
    sol.reduced_costs = lp.objective;
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& cn = cons[static_cast<std::size_t>(k)];
        if (cn.kind == OneSided::row) sol.dual[cn.source] += cn.sign * z[k];
    }
    for (const auto& t : lp.entries) sol.reduced_costs[t.col] -= t.value * sol.dual[t.row];
    sol.objective_value = c.dot(x);
    return sol;
}

}  // namespace drcr::lp
