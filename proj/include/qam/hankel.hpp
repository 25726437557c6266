#ifndef QAM_HANKEL_HPP
#define QAM_HANKEL_HPP

#include <algorithm>

#include <Eigen/SVD>

#include "qam/types.hpp"

namespace qam
{

/// Square Hankel matrix [H]_{ij} = v_{i+j} (0-based) of a length-(2N+1) vector.
inline CMatrix hankel(const CVector& v)
{
    if (v.size() == 0 || v.size() % 2 == 0)
        throw ConfigError("hankel: vector length must be odd (2N+1)");
    const Index n = (v.size() + 1) / 2;
    CMatrix H(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) H(i, j) = v(i + j);
    return H;
}

/// Averages the anti-diagonals of a matrix; the adjoint-normalized inverse of
/// hankel(), i.e. the Frobenius-nearest Hankel generator.
inline CVector antidiag_avg(const CMatrix& H)
{
    const Index rows = H.rows();
    const Index cols = H.cols();
    CVector v = CVector::Zero(rows + cols - 1);
    RVector count = RVector::Zero(rows + cols - 1);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            v(i + j) += H(i, j);
            count(i + j) += 1.0;
        }
    }
    return v.cwiseQuotient(count.cast<Complex>());
}

/// Anti-diagonal multiplicities mu_n of an (N+1)x(N+1) Hankel matrix.
inline RVector antidiag_multiplicity(Index n)
{
    RVector mu(2 * n - 1);
    for (Index k = 0; k < 2 * n - 1; ++k) mu(k) = static_cast<double>(std::min(k, 2 * n - 2 - k) + 1);
    return mu;
}

/// Sums of each anti-diagonal (unnormalized adjoint of hankel()).
inline CVector antidiag_sum(const CMatrix& H)
{
    CVector v = CVector::Zero(H.rows() + H.cols() - 1);
    for (Index j = 0; j < H.cols(); ++j)
        for (Index i = 0; i < H.rows(); ++i) v(i + j) += H(i, j);
    return v;
}

struct RankProjection
{
    CMatrix matrix;
    RVector singular_values; ///< of the input, descending
    bool degenerate = false; ///< sigma_P == sigma_{P+1}: subspace not unique
};

/// Eckart-Young projection onto matrices of rank <= P.
inline RankProjection truncate_rank(const CMatrix& A, Index rank)
{
    Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    const Index r = std::min<Index>(rank, s.size());
    RankProjection out;
    out.singular_values = s;
    out.matrix = svd.matrixU().leftCols(r) * s.head(r).asDiagonal() * svd.matrixV().leftCols(r).adjoint();
    if (r < s.size() && s(r) > 0.0 && s(r - 1) == s(r)) out.degenerate = true;
    return out;
}

inline RVector singular_values(const CMatrix& A)
{
    return Eigen::JacobiSVD<CMatrix>(A).singularValues();
}

} // namespace qam

#endif // QAM_HANKEL_HPP
