#ifndef QAM_FFT_HPP
#define QAM_FFT_HPP

#include <algorithm>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qam/types.hpp"

namespace qam::fft
{

namespace detail
{
// Eigen::FFT caches twiddles per length; one engine per thread keeps the
// transforms reentrant.
inline Eigen::FFT<double>& engine()
{
    thread_local Eigen::FFT<double> e;
    return e;
}
} // namespace detail

/// Full-length DFT of a real sequence (all L bins, no zero-padding).
inline std::vector<Complex> forward(std::span<const double> x)
{
    std::vector<double> in(x.begin(), x.end());
    std::vector<Complex> out;
    auto& e = detail::engine();
    e.ClearFlag(Eigen::FFT<double>::HalfSpectrum);
    e.fwd(out, in);
    return out;
}

inline std::vector<Complex> forward(std::span<const Complex> x)
{
    std::vector<Complex> in(x.begin(), x.end());
    std::vector<Complex> out;
    detail::engine().fwd(out, in);
    return out;
}

/// Inverse DFT, normalized by 1/L.
inline std::vector<Complex> inverse(std::span<const Complex> X)
{
    std::vector<Complex> in(X.begin(), X.end());
    std::vector<Complex> out;
    detail::engine().inv(out, in);
    return out;
}

/// Analytic signal from a one-sided spectrum: bins 1..L/2-1 doubled, DC and
/// Nyquist kept, negative frequencies zeroed.
inline std::vector<Complex> analytic_from_spectrum(std::span<const Complex> X)
{
    const std::size_t L = X.size();
    std::vector<Complex> Y(L, Complex{0.0, 0.0});
    if (L == 0) return Y;
    Y[0] = X[0];
    const std::size_t half = L / 2;
    for (std::size_t k = 1; k < (L + 1) / 2; ++k) Y[k] = 2.0 * X[k];
    if (L % 2 == 0) Y[half] = X[half];
    return inverse(Y);
}

/// Magnitude of the Hilbert-transform analytic signal of a real trace.
inline std::vector<double> envelope(std::span<const double> x)
{
    const auto X = forward(x);
    const auto z = analytic_from_spectrum(X);
    std::vector<double> env(z.size());
    std::transform(z.begin(), z.end(), env.begin(), [](Complex c) { return std::abs(c); });
    return env;
}

/// Maximum of the Hilbert envelope, xi(h) in the noise calibration.
inline double envelope_max(std::span<const double> x)
{
    const auto env = envelope(x);
    return env.empty() ? 0.0 : *std::max_element(env.begin(), env.end());
}

} // namespace qam::fft

#endif // QAM_FFT_HPP
