#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace drcr::lp {

// Inverse of the working-set matrix A (one constraint per row) as a sparse LU
// of the last refactorized A0 followed by an eta file:
//   B = A0^{-1} (I - e_p1 w_1') ... (I - e_pk w_k')
// which is what replacing row p_j of A by a new constraint does to A^{-1}.
class BasisFactor {
public:
    void factor(std::size_t n, const std::vector<Eigen::Triplet<double>>& triplets);

    /// y <- B y
    void ftran(std::vector<double>& y) const;
    /// v' <- v' B
    void btran(std::vector<double>& v) const;

    void update(std::size_t p, const std::vector<std::uint32_t>& nz, const std::vector<double>& w);
    std::size_t etas() const noexcept { return etas_.size(); }

private:
    struct Eta {
        std::uint32_t p;
        std::uint32_t start;  // into idx_/val_
        std::uint32_t end;
    };
    std::size_t n_ = 0;
    // transpose() is not const in Eigen
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
    std::vector<std::uint32_t> idx_;
    std::vector<double> val_;
    mutable Eigen::VectorXd scratch_;
};

}  // namespace drcr::lp
