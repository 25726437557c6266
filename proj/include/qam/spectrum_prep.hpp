#ifndef QAM_SPECTRUM_PREP_HPP
#define QAM_SPECTRUM_PREP_HPP

#include <algorithm>
#include <cmath>

#include "qam/fft.hpp"
#include "qam/hankel.hpp"
#include "qam/signal_forward.hpp"
#include "qam/types.hpp"

namespace qam
{

/// Resolved analysis band [k_min, k_max] of DFT bin indices.
struct Band
{
    Index k_min = 0;
    Index k_max = -1;

    Index size() const noexcept { return k_max - k_min + 1; }
    bool contains(Index k) const noexcept { return k >= k_min && k <= k_max; }
    friend bool operator==(const Band&, const Band&) = default;
};

/// Ratio F_h / F_h0 restricted to a band of 2N+1 bins.
struct NormalizedSpectrum
{
    CVector values;
    Index k_min       = 1;
    Index k_max       = 0;
    Index fft_length  = 0; ///< DFT length; bin spacing fs / fft_length
    double fs         = 0.0;

    Index size() const noexcept { return values.size(); }
    /// N such that size() == 2N+1.
    Index half_order() const noexcept { return (values.size() - 1) / 2; }
    Band band() const noexcept { return {k_min, k_max}; }

    /// Absolute DFT index of entry n.
    double bin(Index n) const noexcept { return static_cast<double>(k_min + n); }
};

/// Largest contiguous interval around the peak of |F_h0| where the magnitude
/// stays within `threshold_db` of the peak, trimmed at the top to odd length.
inline Band resolve_band(const RFTrace& h0, double threshold_db)
{
    h0.validate();
    if (!(threshold_db >= -30.0 && threshold_db < 0.0))
        throw ConfigError("resolve_band: threshold must lie in [-30, 0) dB");

    const auto F0 = fft::forward(h0.samples);
    const Index L = h0.size();
    const Index k_hi = (L - 1) / 2; // strictly below Nyquist
    if (k_hi < 1) throw ConfigError("resolve_band: trace too short for a band");

    Index peak = 1;
    for (Index k = 1; k <= k_hi; ++k)
        if (std::abs(F0[static_cast<std::size_t>(k)]) > std::abs(F0[static_cast<std::size_t>(peak)])) peak = k;

    const double peak_mag = std::abs(F0[static_cast<std::size_t>(peak)]);
    if (!(peak_mag > 0.0)) throw ConfigError("resolve_band: reference spectrum is zero");
    const double floor = peak_mag * std::pow(10.0, threshold_db / 20.0);

    Band b{peak, peak};
    while (b.k_min - 1 >= 1 && std::abs(F0[static_cast<std::size_t>(b.k_min - 1)]) >= floor) --b.k_min;
    while (b.k_max + 1 <= k_hi && std::abs(F0[static_cast<std::size_t>(b.k_max + 1)]) >= floor) ++b.k_max;
    if ((b.k_max - b.k_min) % 2 != 0) --b.k_max;
    return b;
}

/// x_k = F_h(k) / F_h0(k) for k in the band.
inline NormalizedSpectrum normalized_spectrum(const RFTrace& h, const RFTrace& h0, const Band& band)
{
    h.validate();
    h0.validate();
    if (h.size() != h0.size() || h.fs != h0.fs)
        throw ConfigError("normalized_spectrum: trace and reference differ in length or fs");
    if (band.k_min < 1 || band.size() < 1 || band.k_max >= h0.size() / 2 + 1)
        throw ConfigError("normalized_spectrum: empty or out-of-range band");
    if ((band.k_max - band.k_min) % 2 != 0)
        throw ConfigError("normalized_spectrum: band must hold an odd number of bins");

    const auto F  = fft::forward(h.samples);
    const auto F0 = fft::forward(h0.samples);

    NormalizedSpectrum x;
    x.k_min      = band.k_min;
    x.k_max      = band.k_max;
    x.fft_length = h.size();
    x.fs         = h.fs;
    x.values.resize(band.size());
    for (Index k = band.k_min; k <= band.k_max; ++k) {
        const Complex den = F0[static_cast<std::size_t>(k)];
        if (std::abs(den) == 0.0) throw ConfigError("normalized_spectrum: reference vanishes inside band");
        x.values(k - band.k_min) = F[static_cast<std::size_t>(k)] / den;
    }
    return x;
}

inline NormalizedSpectrum normalized_spectrum(const RFTrace& h, const RFTrace& h0, double threshold_db)
{
    return normalized_spectrum(h, h0, resolve_band(h0, threshold_db));
}

/// Cadzow denoising: alternate rank-P truncation of H(x) and anti-diagonal
/// averaging, `iters` times.
inline NormalizedSpectrum cadzow(const NormalizedSpectrum& x, Index order, int iters = 5)
{
    if (order < 1) throw ConfigError("cadzow: order must be >= 1");
    if (iters < 0) throw ConfigError("cadzow: iteration count must be >= 0");
    if (order >= x.half_order() + 1)
        throw ConfigError("cadzow: order must be below the Hankel dimension N+1");

    NormalizedSpectrum out = x;
    for (int it = 0; it < iters; ++it)
        out.values = antidiag_avg(truncate_rank(hankel(out.values), order).matrix);
    return out;
}

/// Residual ||H(x) - P_rank(H(x))||_F, the distance of H(x) to rank-P matrices.
inline double rank_residual(const CVector& x, Index order)
{
    const RVector s = singular_values(hankel(x));
    return order < s.size() ? s.tail(s.size() - order).norm() : 0.0;
}

/// Model order from the Frobenius energy share of the Hankel singular values.
inline Index select_model_order(const NormalizedSpectrum& x, Index p_min = 2, double energy_frac = 0.10)
{
    if (!(energy_frac > 0.0 && energy_frac < 1.0))
        throw ConfigError("select_model_order: energy fraction must lie in (0, 1)");
    if (p_min < 2) throw ConfigError("select_model_order: minimum order must be >= 2");

    const RVector s = singular_values(hankel(x.values));
    const double total = s.squaredNorm();
    Index count = 0;
    if (total > 0.0)
        for (Index i = 0; i < s.size(); ++i)
            if (s(i) * s(i) / total > energy_frac) ++count;
    return std::max(p_min, count);
}

} // namespace qam

#endif // QAM_SPECTRUM_PREP_HPP
