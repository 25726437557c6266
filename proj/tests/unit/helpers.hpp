#ifndef QAM_TEST_HELPERS_HPP
#define QAM_TEST_HELPERS_HPP

#include <qam/qam.hpp>

#include <random>
#include <vector>

namespace qam::test
{

inline NormalizedSpectrum exponential_sum(const std::vector<Complex>& z, const std::vector<Complex>& a, Index k_min,
                                          Index length, Index fft_length = 300)
{
    NormalizedSpectrum x;
    x.k_min = k_min;
    x.k_max = k_min + length - 1;
    x.fft_length = fft_length;
    x.fs = 10e9;
    x.values = CVector::Zero(length);
    for (Index n = 0; n < length; ++n)
        for (std::size_t p = 0; p < z.size(); ++p) x.values(n) += a[p] * std::pow(z[p], static_cast<double>(k_min + n));
    return x;
}

inline CVector complex_noise(Index n, double sigma, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, sigma / std::sqrt(2.0));
    CVector e(n);
    for (Index i = 0; i < n; ++i) e(i) = Complex{nd(rng), nd(rng)};
    return e;
}

inline double rel_err(double est, double truth) { return std::abs(est - truth) / std::abs(truth); }

inline ExperimentManifest small_manifest()
{
    ExperimentManifest m;
    m.parameter = SweepParameter::snr;
    m.grid = {30.0, 10.0, 50.0};
    m.n_realizations = 6;
    m.crb_signals = 20;
    return m;
}

} // namespace qam::test

#endif
