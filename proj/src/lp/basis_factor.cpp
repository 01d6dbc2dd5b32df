#include "basis_factor.hpp"

#include <cmath>

#include "drcr/error.hpp"

namespace drcr::lp {

void BasisFactor::factor(std::size_t n, const std::vector<Eigen::Triplet<double>>& triplets) {
    n_ = n;
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::SparseMatrix<double> a(nn, nn);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    lu_.analyzePattern(a);
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) throw SolverError("simplex: ill-conditioned basis");
    etas_.clear();
    idx_.clear();
    val_.clear();
}

void BasisFactor::ftran(std::vector<double>& y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = 0;
        for (auto e = it->start; e < it->end; ++e) s += val_[e] * y[idx_[e]];
        y[it->p] -= s;
    }
    Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n_));
    scratch_ = lu_.solve(ym);
    ym = scratch_;
}

void BasisFactor::btran(std::vector<double>& v) const {
    Eigen::Map<Eigen::VectorXd> vm(v.data(), static_cast<Eigen::Index>(n_));
    scratch_ = lu_.transpose().solve(vm);
    vm = scratch_;
    for (const auto& eta : etas_) {
        const double f = v[eta.p];
        if (f == 0.0) continue;
        for (auto e = eta.start; e < eta.end; ++e) v[idx_[e]] -= f * val_[e];
    }
}

void BasisFactor::update(std::size_t p, const std::vector<std::uint32_t>& nz, const std::vector<double>& w) {
    Eta eta{static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(idx_.size()), 0};
    for (auto i : nz) {
        idx_.push_back(i);
        val_.push_back(w[i]);
    }
    eta.end = static_cast<std::uint32_t>(idx_.size());
    etas_.push_back(eta);
}

}  // namespace drcr::lp
