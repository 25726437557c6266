#ifndef QAM_HANKEL_ADMM_HPP
#define QAM_HANKEL_ADMM_HPP

#include <utility>

#include "qam/hankel.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/types.hpp"

namespace qam
{

struct AdmmConfig
{
    double rho     = 0.025; ///< augmented-Lagrangian penalty
    int iterations = 200;   ///< fixed iteration count, no early stopping
    RVector weights;        ///< per-bin data weights; empty means all ones

    void validate(Index length, Index order) const
    {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("AdmmConfig: rho must be positive");
        if (iterations < 1) throw ConfigError("AdmmConfig: iterations must be >= 1");
        if (weights.size() == 0) return;
        if (weights.size() != length) throw ConfigError("AdmmConfig: weight vector length mismatch");
        Index positive = 0;
        for (Index i = 0; i < weights.size(); ++i) {
            if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
                throw ConfigError("AdmmConfig: weights must be finite and non-negative");
            if (weights(i) > 0.0) ++positive;
        }
        if (positive < order + 1) throw ConfigError("AdmmConfig: need at least P+1 positive weights");
    }
};

struct HankelSolution
{
    CVector x_approx;          ///< anti-diagonal average of the final H
    CMatrix h_hat;             ///< final rank-P iterate
    CVector g_hat;             ///< final data-side iterate
    double residual = 0.0;     ///< ||H_hat - H(g_hat)||_F
    int degenerate_steps = 0;  ///< H-updates with sigma_P == sigma_{P+1}
};

/// State handed to an observer after the H- and g-updates of iteration q,
/// before the multiplier update.
struct AdmmIterate
{
    int q;
    const CMatrix& h;            ///< H^{q+1}
    const CVector& g;            ///< g^{q+1}
    const CMatrix& lambda;       ///< Lambda^q
    const RVector& h_input_sv;   ///< singular values of H(g^q) - Lambda^q / rho
};

struct NoObserver
{
    void operator()(const AdmmIterate&) const noexcept {}
};

/// Weighted rank-constrained Hankel approximation
///
///   min_{H,g} 1/2 ||x - g||_W^2 + R_P(H)   s.t.  H = H(g)
///
/// by ADMM with g^0 = x and Lambda^0 = 0. Each iteration:
///   H <- rank-P truncated SVD of H(g) - Lambda / rho
///   g_n <- (w_n x_n + sum_{i+j=n} (Lambda_ij + rho H_ij)) / (w_n + rho mu_n)
///   Lambda <- Lambda + rho (H - H(g))
template <typename Observer = NoObserver>
HankelSolution admm_solve(const CVector& x, Index order, const AdmmConfig& cfg, Observer&& observer = {})
{
    if (x.size() % 2 == 0) throw ConfigError("admm_solve: data length must be odd (2N+1)");
    const Index n = (x.size() + 1) / 2;
    if (order < 1 || order >= n) throw ConfigError("admm_solve: order must satisfy 1 <= P < N+1");
    cfg.validate(x.size(), order);
    if (!x.allFinite()) throw SolverError("admm_solve: non-finite input", 0);

    const RVector w  = cfg.weights.size() ? cfg.weights : RVector::Ones(x.size());
    const RVector mu = antidiag_multiplicity(n);
    const double rho = cfg.rho;
    const RVector denom = w + rho * mu;
    const CVector wx = w.cast<Complex>().cwiseProduct(x);

    CVector g = x;
    CMatrix lambda = CMatrix::Zero(n, n);
    CMatrix H;
    HankelSolution sol;

    for (int q = 0; q < cfg.iterations; ++q) {
        RankProjection proj = truncate_rank(hankel(g) - lambda / rho, order);
        H = std::move(proj.matrix);
        if (proj.degenerate) ++sol.degenerate_steps;
        if (!H.allFinite()) throw SolverError("admm_solve: non-finite H iterate", q);

        const CVector num = wx + antidiag_sum(lambda + rho * H);
        g = num.cwiseQuotient(denom.cast<Complex>());
        if (!g.allFinite()) throw SolverError("admm_solve: non-finite g iterate", q);

        observer(AdmmIterate{q, H, g, lambda, proj.singular_values});
        lambda += rho * (H - hankel(g));
    }

    sol.h_hat    = H;
    sol.g_hat    = g;
    sol.x_approx = antidiag_avg(H);
    sol.residual = (H - hankel(g)).norm();
    return sol;
}

inline HankelSolution admm_solve(const NormalizedSpectrum& x, Index order, const AdmmConfig& cfg)
{
    return admm_solve(x.values, order, cfg);
}

/// Gradient of the augmented Lagrangian in g (as 2 dL/d conj(g)); zero at the
/// exact g-update.
inline CVector admm_g_gradient(const CVector& x, const RVector& w, double rho, const CMatrix& h,
                               const CMatrix& lambda, const CVector& g)
{
    const RVector mu = antidiag_multiplicity(h.rows());
    return w.cast<Complex>().cwiseProduct(g - x) - antidiag_sum(lambda) +
           rho * (mu.cast<Complex>().cwiseProduct(g) - antidiag_sum(h));
}

} // namespace qam

#endif // QAM_HANKEL_ADMM_HPP
