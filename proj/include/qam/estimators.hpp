#ifndef QAM_ESTIMATORS_HPP
#define QAM_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qam/fft.hpp"
#include "qam/hankel.hpp"
#include "qam/hankel_admm.hpp"
#include "qam/signal_forward.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/types.hpp"

namespace qam
{

enum class Method
{
    hk,     ///< Hankel ADMM, uniform weights
    rhk,    ///< Hankel ADMM with Tukey reweighting
    ar,     ///< least-squares Prony
    esprit, ///< shift invariance on the data Hankel matrix
};

inline std::string_view to_string(Method m)
{
    switch (m) {
    case Method::hk: return "hk";
    case Method::rhk: return "rhk";
    case Method::ar: return "ar";
    case Method::esprit: return "esprit";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s)
{
    if (s == "hk") return Method::hk;
    if (s == "rhk") return Method::rhk;
    if (s == "ar") return Method::ar;
    if (s == "esprit") return Method::esprit;
    return std::nullopt;
}

inline constexpr double kPinvConditionLimit   = 1e12;
inline constexpr double kVandermondeCondLimit = 1e12;
inline constexpr double kDistinctPoleGap      = 1e-10;
inline constexpr double kExactFitTolerance    = 1e-10;

/// Per-bin poles z_p and amplitudes a_p of x_k = sum_p a_p z_p^k, k absolute.
struct SpectralEstimate
{
    std::vector<Complex> z;
    std::vector<Complex> a;
    Method method = Method::hk;
    Index k_min = 0;
    Index k_max = -1;
    Index fft_length = 0;
    double fs = 0.0;
    Failure failure = Failure::none;
    bool reweight_fallback = false; ///< RHK fell back to an earlier round
    int reweight_rounds = 0;        ///< RHK solves actually performed
    RVector weights;                ///< final RHK weights (empty otherwise)
    std::vector<Index> discarded;   ///< components dropped by rank_pulses

    Index order() const noexcept { return static_cast<Index>(z.size()); }
    bool ok() const noexcept { return failure == Failure::none; }

    /// gamma_p = L/(2 pi) ln|z_p|
    double gamma(Index p) const { return static_cast<double>(fft_length) / kTwoPi * std::log(std::abs(z[static_cast<std::size_t>(p)])); }
    /// nu_p = L/(2 pi) arg z_p
    double nu(Index p) const { return static_cast<double>(fft_length) / kTwoPi * std::arg(z[static_cast<std::size_t>(p)]); }

    Complex evaluate(Index k) const
    {
        Complex s{0.0, 0.0};
        for (std::size_t p = 0; p < z.size(); ++p) s += a[p] * std::pow(z[p], static_cast<double>(k));
        return s;
    }
};

struct ReweightConfig
{
    double tukey_c   = 4.685;
    int outer_iters  = 3;
    double mad_scale = 1.4826;

    void validate() const
    {
        if (!(tukey_c > 0.0)) throw ConfigError("ReweightConfig: tukey_c must be positive");
        if (outer_iters < 1) throw ConfigError("ReweightConfig: outer_iters must be >= 1");
        if (!(mad_scale > 0.0)) throw ConfigError("ReweightConfig: mad_scale must be positive");
    }
};

struct PoleResult
{
    std::vector<Complex> z;
    Failure failure = Failure::none;
};

struct AmplitudeResult
{
    std::vector<Complex> a;
    Failure failure = Failure::none;
};

/// Poles from the dominant left singular subspace of H(x): eigenvalues of
/// (U^l)^+ U^f, where U^f / U^l drop the first / last row of U.
inline PoleResult extract_frequencies(const CVector& x, Index order)
{
    PoleResult out;
    if (order < 1 || x.size() < 2 * order + 1 || x.size() % 2 == 0)
        throw ConfigError("extract_frequencies: need odd length >= 2P+1");
    if (!x.allFinite()) {
        out.failure = Failure::non_finite;
        return out;
    }
    if (x.squaredNorm() == 0.0) {
        out.failure = Failure::empty_signal;
        return out;
    }

    const CMatrix H = hankel(x);
    Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeThinU);
    const CMatrix U  = svd.matrixU().leftCols(order);
    const Index rows = U.rows();
    const CMatrix Ul = U.topRows(rows - 1);
    const CMatrix Uf = U.bottomRows(rows - 1);

    Eigen::JacobiSVD<CMatrix> ul_svd(Ul, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = ul_svd.singularValues();
    if (!(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) > kPinvConditionLimit) {
        out.failure = Failure::rank_deficient;
        return out;
    }
    const CMatrix Phi = ul_svd.solve(Uf);
    Eigen::ComplexEigenSolver<CMatrix> eig(Phi, false);
    if (eig.info() != Eigen::Success) {
        out.failure = Failure::rank_deficient;
        return out;
    }
    out.z.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + order);
    if (!all_finite(out.z)) out.failure = Failure::non_finite;
    return out;
}

/// Vandermonde-like matrix [E]_{np} = z_p^{k_n} over absolute bins k_n.
inline CMatrix vandermonde(const std::vector<Complex>& z, Index k_min, Index length)
{
    CMatrix E(length, static_cast<Index>(z.size()));
    for (Index p = 0; p < E.cols(); ++p) {
        const Complex lz = std::log(z[static_cast<std::size_t>(p)]);
        for (Index n = 0; n < length; ++n) E(n, p) = std::exp(lz * static_cast<double>(k_min + n));
    }
    return E;
}

/// a = argmin ||x - E a||_2.
inline AmplitudeResult ls_amplitudes(const NormalizedSpectrum& x, const std::vector<Complex>& z)
{
    AmplitudeResult out;
    if (z.empty()) throw ConfigError("ls_amplitudes: no poles");
    for (const auto& zp : z) {
        if (!std::isfinite(zp.real()) || !std::isfinite(zp.imag())) {
            out.failure = Failure::non_finite;
            return out;
        }
        if (zp == Complex{0.0, 0.0}) {
            out.failure = Failure::rank_deficient;
            return out;
        }
    }
    for (std::size_t p = 0; p < z.size(); ++p)
        for (std::size_t q = p + 1; q < z.size(); ++q)
            if (std::abs(z[p] - z[q]) <= kDistinctPoleGap * std::max(std::abs(z[p]), std::abs(z[q]))) {
                out.failure = Failure::coincident_poles;
                return out;
            }

    const CMatrix E = vandermonde(z, x.k_min, x.size());
    if (!E.allFinite()) {
        out.failure = Failure::non_finite;
        return out;
    }
    Eigen::JacobiSVD<CMatrix> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    if (!(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) > kVandermondeCondLimit) {
        out.failure = Failure::ill_conditioned;
        return out;
    }
    const CVector a = svd.solve(x.values);
    out.a.assign(a.data(), a.data() + a.size());
    if (!all_finite(out.a)) out.failure = Failure::non_finite;
    return out;
}

namespace detail
{
inline void check_same_band(const NormalizedSpectrum& a, const NormalizedSpectrum& b)
{
    if (a.k_min != b.k_min || a.k_max != b.k_max || a.size() != b.size())
        throw ConfigError("estimate: denoised and raw spectra cover different bands");
}

inline SpectralEstimate make_estimate(const NormalizedSpectrum& x, Method m)
{
    SpectralEstimate e;
    e.method     = m;
    e.k_min      = x.k_min;
    e.k_max      = x.k_max;
    e.fft_length = x.fft_length;
    e.fs         = x.fs;
    return e;
}

inline void fill_from_poles(SpectralEstimate& e, const NormalizedSpectrum& x, PoleResult poles)
{
    if (poles.failure != Failure::none) {
        e.failure = poles.failure;
        return;
    }
    auto amps = ls_amplitudes(x, poles.z);
    e.z = std::move(poles.z);
    if (amps.failure != Failure::none) {
        e.failure = amps.failure;
        return;
    }
    e.a = std::move(amps.a);
}

inline SpectralEstimate hankel_estimate(const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order,
                                        const AdmmConfig& cfg, Method tag)
{
    SpectralEstimate e = make_estimate(x, tag);
    if (!x.values.allFinite()) {
        e.failure = Failure::non_finite;
        return e;
    }
    if (x.values.squaredNorm() == 0.0) {
        e.failure = Failure::empty_signal;
        return e;
    }
    HankelSolution sol;
    try {
        sol = admm_solve(x.values, order, cfg);
    } catch (const SolverError&) {
        e.failure = Failure::solver_error;
        return e;
    }
    fill_from_poles(e, fit, extract_frequencies(sol.x_approx, order));
    return e;
}

inline double median(std::vector<double> v)
{
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}
} // namespace detail

/// Residuals e_k = x_k - sum_p a_p z_p^k.
inline CVector residuals(const NormalizedSpectrum& x, const SpectralEstimate& est)
{
    const CMatrix E = vandermonde(est.z, x.k_min, x.size());
    const Eigen::Map<const CVector> a(est.a.data(), static_cast<Index>(est.a.size()));
    return x.values - E * a;
}

/// delta = mad_scale * median |e - med(e)|, with the complex median taken
/// component-wise.
inline double mad_scale_estimate(const CVector& e, double mad_scale = 1.4826)
{
    std::vector<double> re(static_cast<std::size_t>(e.size())), im(re.size());
    for (Index i = 0; i < e.size(); ++i) {
        re[static_cast<std::size_t>(i)] = e(i).real();
        im[static_cast<std::size_t>(i)] = e(i).imag();
    }
    const Complex med{detail::median(re), detail::median(im)};
    std::vector<double> dev(re.size());
    for (Index i = 0; i < e.size(); ++i) dev[static_cast<std::size_t>(i)] = std::abs(e(i) - med);
    return mad_scale * detail::median(std::move(dev));
}

/// Tukey bisquare weight (1 - (|e|/(c delta))^2)^2 inside the cutoff, 0 beyond.
inline double tukey_weight(double residual, double delta, double c)
{
    const double cutoff = c * delta;
    const double r = std::abs(residual);
    if (!(r <= cutoff) || cutoff <= 0.0) return r == 0.0 ? 1.0 : 0.0;
    const double u = r / cutoff;
    const double t = 1.0 - u * u;
    return t * t;
}

/// Non-weighted Hankel estimate (w = 1). Poles come from `x` (typically the
/// Cadzow output), amplitudes are fitted to `fit` (the raw spectrum).
inline SpectralEstimate estimate_hk(const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order,
                                    AdmmConfig cfg = {})
{
    detail::check_same_band(x, fit);
    cfg.weights = RVector();
    auto e = detail::hankel_estimate(x, fit, order, cfg, Method::hk);
    e.reweight_rounds = 1;
    return e;
}

inline SpectralEstimate estimate_hk(const NormalizedSpectrum& x, Index order, AdmmConfig cfg = {})
{
    return estimate_hk(x, x, order, std::move(cfg));
}

/// Iteratively reweighted Hankel estimate: weighted solve, residuals, MAD
/// scale, Tukey weights, repeat `outer_iters` times.
inline SpectralEstimate estimate_rhk(const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order,
                                     AdmmConfig cfg = {}, const ReweightConfig& rw = {})
{
    rw.validate();
    detail::check_same_band(x, fit);
    cfg.weights = RVector();
    std::optional<SpectralEstimate> previous;

    for (int round = 0; round < rw.outer_iters; ++round) {
        SpectralEstimate est = detail::hankel_estimate(x, fit, order, cfg, Method::rhk);
        est.reweight_rounds = round + 1;
        est.weights = cfg.weights;

        if (!est.ok()) {
            if (previous) {
                previous->reweight_fallback = true;
                return *previous;
            }
            return est;
        }
        if (round + 1 == rw.outer_iters) return est;

        const CVector e = residuals(fit, est);
        const double delta = mad_scale_estimate(e, rw.mad_scale);
        // Residuals at round-off level: the fit is exact, reweighting is moot.
        const double scale = fit.values.norm() / std::sqrt(static_cast<double>(fit.size()));
        if (!(delta > kExactFitTolerance * scale)) return est;

        RVector w(e.size());
        Index positive = 0;
        for (Index k = 0; k < e.size(); ++k) {
            w(k) = tukey_weight(std::abs(e(k)), delta, rw.tukey_c);
            if (w(k) > 0.0) ++positive;
        }
        if (positive < order + 1) {
            est.reweight_fallback = true;
            return est;
        }
        cfg.weights = std::move(w);
        previous = std::move(est);
    }
    return *previous; // unreachable: the loop returns on its last round
}

inline SpectralEstimate estimate_rhk(const NormalizedSpectrum& x, Index order, AdmmConfig cfg = {},
                                     const ReweightConfig& rw = {})
{
    return estimate_rhk(x, x, order, std::move(cfg), rw);
}

/// Least-squares Prony: fit x_k = -sum_{m=1..P} c_m x_{k-m}, roots of
/// z^P + c_1 z^{P-1} + ... + c_P are the poles.
inline SpectralEstimate estimate_ar(const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order)
{
    detail::check_same_band(x, fit);
    SpectralEstimate e = detail::make_estimate(x, Method::ar);
    const Index len = x.size();
    if (order < 1 || len < 2 * order) throw ConfigError("estimate_ar: need at least 2P samples");
    if (!x.values.allFinite()) {
        e.failure = Failure::non_finite;
        return e;
    }
    if (x.values.squaredNorm() == 0.0) {
        e.failure = Failure::empty_signal;
        return e;
    }

    const Index rows = len - order;
    CMatrix A(rows, order);
    CVector b(rows);
    for (Index r = 0; r < rows; ++r) {
        const Index k = r + order;
        for (Index m = 1; m <= order; ++m) A(r, m - 1) = x.values(k - m);
        b(r) = -x.values(k);
    }
    Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    if (!(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) > kPinvConditionLimit) {
        e.failure = Failure::rank_deficient;
        return e;
    }
    const CVector c = svd.solve(b);

    CMatrix companion = CMatrix::Zero(order, order);
    for (Index m = 0; m < order; ++m) companion(0, m) = -c(m);
    for (Index i = 1; i < order; ++i) companion(i, i - 1) = Complex{1.0, 0.0};
    Eigen::ComplexEigenSolver<CMatrix> eig(companion, false);
    PoleResult poles;
    if (eig.info() != Eigen::Success) {
        e.failure = Failure::rank_deficient;
        return e;
    }
    poles.z.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + order);
    if (!all_finite(poles.z)) poles.failure = Failure::non_finite;
    detail::fill_from_poles(e, fit, std::move(poles));
    return e;
}

inline SpectralEstimate estimate_ar(const NormalizedSpectrum& x, Index order) { return estimate_ar(x, x, order); }

/// ESPRIT on the data Hankel matrix, no ADMM.
inline SpectralEstimate estimate_esprit(const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order)
{
    detail::check_same_band(x, fit);
    SpectralEstimate e = detail::make_estimate(x, Method::esprit);
    detail::fill_from_poles(e, fit, extract_frequencies(x.values, order));
    return e;
}

inline SpectralEstimate estimate_esprit(const NormalizedSpectrum& x, Index order)
{
    return estimate_esprit(x, x, order);
}

/// Runs method `m`: poles from `x`, amplitudes (and RHK residuals) against `fit`.
inline SpectralEstimate estimate(Method m, const NormalizedSpectrum& x, const NormalizedSpectrum& fit, Index order,
                                 const AdmmConfig& admm = {}, const ReweightConfig& rw = {})
{
    switch (m) {
    case Method::hk: return estimate_hk(x, fit, order, admm);
    case Method::rhk: return estimate_rhk(x, fit, order, admm, rw);
    case Method::ar: return estimate_ar(x, fit, order);
    case Method::esprit: return estimate_esprit(x, fit, order);
    }
    throw ConfigError("estimate: unknown method");
}

inline SpectralEstimate estimate(Method m, const NormalizedSpectrum& x, Index order, const AdmmConfig& admm = {},
                                 const ReweightConfig& rw = {})
{
    return estimate(m, x, x, order, admm, rw);
}

/// Hilbert-envelope peak of each component's time-domain pulse
/// a_p z_p^k F_h0(k) (band only). Non-usable components get -1.
inline std::vector<double> pulse_envelope_peaks(const SpectralEstimate& est, std::span<const Complex> ref_spectrum)
{
    const Index L = static_cast<Index>(ref_spectrum.size());
    std::vector<double> peaks(est.z.size(), -1.0);
    if (est.a.size() != est.z.size()) return peaks;
    std::vector<Complex> S(static_cast<std::size_t>(L));
    for (std::size_t p = 0; p < est.z.size(); ++p) {
        const Complex zp = est.z[p], ap = est.a[p];
        if (!std::isfinite(zp.real()) || !std::isfinite(zp.imag()) || !std::isfinite(ap.real()) ||
            !std::isfinite(ap.imag()) || zp == Complex{0.0, 0.0})
            continue;
        std::fill(S.begin(), S.end(), Complex{0.0, 0.0});
        const Complex lz = std::log(zp);
        for (Index k = est.k_min; k <= est.k_max && k < L; ++k)
            S[static_cast<std::size_t>(k)] = ap * std::exp(lz * static_cast<double>(k)) * ref_spectrum[static_cast<std::size_t>(k)];
        const auto t = fft::analytic_from_spectrum(S);
        double m = 0.0;
        for (const auto& v : t) m = std::max(m, std::abs(v));
        if (std::isfinite(m) && m > 0.0) peaks[p] = m;
    }
    return peaks;
}

/// Keeps the two pulses with the largest envelope peaks and orders them by
/// time of flight: component 0 is the earlier echo (larger nu). Envelope ties
/// go to the earlier echo.
inline SpectralEstimate rank_pulses(const SpectralEstimate& est, std::span<const Complex> ref_spectrum)
{
    SpectralEstimate out = est;
    if (!est.ok()) return out;
    if (est.order() < 2) {
        out.failure = Failure::too_few_components;
        return out;
    }

    const auto peaks = pulse_envelope_peaks(est, ref_spectrum);
    std::vector<std::size_t> idx;
    for (std::size_t p = 0; p < peaks.size(); ++p)
        if (peaks[p] > 0.0) idx.push_back(p);
    if (idx.size() < 2) {
        out.failure = Failure::too_few_components;
        return out;
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        if (peaks[i] != peaks[j]) return peaks[i] > peaks[j];
        return est.nu(static_cast<Index>(i)) > est.nu(static_cast<Index>(j));
    });
    std::size_t first = idx[0], second = idx[1];
    if (est.nu(static_cast<Index>(second)) > est.nu(static_cast<Index>(first))) std::swap(first, second);

    out.z = {est.z[first], est.z[second]};
    out.a = {est.a[first], est.a[second]};
    out.discarded.clear();
    for (std::size_t p = 0; p < est.z.size(); ++p)
        if (p != first && p != second) out.discarded.push_back(static_cast<Index>(p));
    return out;
}

inline SpectralEstimate rank_pulses(const SpectralEstimate& est, const RFTrace& h0)
{
    const auto F0 = fft::forward(h0.samples);
    return rank_pulses(est, F0);
}

} // namespace qam

#endif // QAM_ESTIMATORS_HPP
