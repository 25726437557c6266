#ifndef QAM_SIGNAL_FORWARD_HPP
#define QAM_SIGNAL_FORWARD_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qam/fft.hpp"
#include "qam/types.hpp"

namespace qam
{

enum class TraceKind
{
    reference,
    measurement
};

/// Sampled real RF signal.
struct RFTrace
{
    std::vector<double> samples;
    double fs = 0.0; ///< sampling rate, Hz
    TraceKind kind = TraceKind::measurement;

    Index size() const noexcept { return static_cast<Index>(samples.size()); }

    void validate() const
    {
        if (samples.size() < 2) throw ConfigError("RFTrace: need at least 2 samples");
        if (!(fs > 0.0) || !std::isfinite(fs)) throw ConfigError("RFTrace: fs must be positive");
        if (!all_finite(samples)) throw ConfigError("RFTrace: non-finite sample");
    }
};

/// Acoustic parameters of a single tissue layer, in I/O units.
struct GroundTruth
{
    double c     = 1600.0; ///< speed of sound, m/s
    double z     = 1.63;   ///< impedance, MRayl
    double alpha = 10.0;   ///< attenuation, dB/MHz/cm
    double d     = 4.0;    ///< thickness, um

    void validate() const
    {
        for (double v : {c, z, alpha, d})
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError("GroundTruth: parameters must be positive and finite");
    }
};

struct MediumConstants
{
    double c_w  = 1480.0; ///< water speed of sound, m/s
    double z_w  = 1.5;    ///< water impedance, MRayl
    double r_wg = 0.80;   ///< water-glass pressure reflection coefficient

    void validate() const
    {
        if (!(c_w > 0.0) || !(z_w > 0.0))
            throw ConfigError("MediumConstants: c_w and Z_w must be positive");
        if (!(r_wg > 0.0 && r_wg < 1.0))
            throw ConfigError("MediumConstants: R_wg must lie in (0, 1)");
    }
};

namespace units
{
/// dB/MHz/cm -> attenuation slope in s/m as it enters gamma_2 = -slope c_w nu_1.
/// The spectral model decays as exp(-2 pi f beta), so the slope carries a 1/(2 pi)
/// relative to the physical Np/(Hz m) coefficient.
inline double alpha_to_si(double alpha_db_mhz_cm)
{
    return alpha_db_mhz_cm / kNeperToDb * 1e-6 * 1e2 / kTwoPi;
}
inline double alpha_from_si(double alpha_s_per_m)
{
    return alpha_s_per_m * kTwoPi * kNeperToDb * 1e6 * 1e-2;
}
inline double um_to_m(double um) { return um * 1e-6; }
inline double m_to_um(double m) { return m * 1e6; }
} // namespace units

/// One damped complex exponential a * lambda^kappa with
/// a = A e^{ib}, lambda = exp(2 pi (gamma + i nu)).
struct ExponentialComponent
{
    double amplitude = 0.0; ///< A >= 0
    double phase     = 0.0; ///< b, rad
    double gamma     = 0.0; ///< damping, = -beta fs
    double nu        = 0.0; ///< frequency, = -dt fs

    Complex complex_amplitude() const { return std::polar(amplitude, phase); }

    /// Per-bin ratio z = lambda^{1/L} for an L-point DFT.
    Complex ratio(Index fft_length) const
    {
        return std::exp(Complex{gamma, nu} * (kTwoPi / static_cast<double>(fft_length)));
    }

    /// a * lambda^{k/L}, evaluated without forming powers of z.
    Complex evaluate(double k, Index fft_length) const
    {
        const double kappa = k / static_cast<double>(fft_length);
        return complex_amplitude() * std::exp(Complex{gamma, nu} * (kTwoPi * kappa));
    }
};

struct ExponentialModel
{
    std::vector<ExponentialComponent> components;
    double sigma2 = 0.0;

    Index order() const noexcept { return static_cast<Index>(components.size()); }

    Complex evaluate(double k, Index fft_length) const
    {
        Complex s{0.0, 0.0};
        for (const auto& c : components) s += c.evaluate(k, fft_length);
        return s;
    }

    void validate() const
    {
        if (components.empty()) throw ConfigError("ExponentialModel: order must be >= 1");
        if (!(sigma2 >= 0.0)) throw ConfigError("ExponentialModel: sigma2 must be >= 0");
        for (const auto& c : components)
            if (!std::isfinite(c.amplitude) || !std::isfinite(c.phase) ||
                !std::isfinite(c.gamma) || !std::isfinite(c.nu))
                throw ConfigError("ExponentialModel: non-finite component");
    }

    /// |nu_p| must stay below half the DFT length so that arg(z_p) is unwrapped.
    void validate_for_length(Index fft_length) const
    {
        validate();
        for (const auto& c : components)
            if (!(std::abs(c.nu) < 0.5 * static_cast<double>(fft_length)))
                throw ConfigError("ExponentialModel: |nu| = " + std::to_string(std::abs(c.nu)) +
                                  " aliases for DFT length " + std::to_string(fft_length));
    }
};

/// Gaussian-modulated cosine burst. `frac_bw` is the -6 dB fractional
/// bandwidth of the spectral magnitude.
inline RFTrace synth_reference(double fc, double frac_bw, double fs, Index m_total, double t_center)
{
    if (!(fs > 0.0)) throw ConfigError("synth_reference: fs must be positive");
    if (!(fc > 0.0 && fc < 0.5 * fs))
        throw ConfigError("synth_reference: centre frequency must lie in (0, fs/2)");
    if (!(frac_bw > 0.0 && frac_bw < 2.0))
        throw ConfigError("synth_reference: fractional bandwidth must lie in (0, 2)");
    if (m_total < 2) throw ConfigError("synth_reference: need at least 2 samples");

    const double ref = std::pow(10.0, -6.0 / 20.0);
    const double a   = -(kPi * fc * frac_bw) * (kPi * fc * frac_bw) / (4.0 * std::log(ref));

    RFTrace h0;
    h0.fs   = fs;
    h0.kind = TraceKind::reference;
    h0.samples.resize(static_cast<std::size_t>(m_total));
    for (Index n = 0; n < m_total; ++n) {
        const double t = static_cast<double>(n) / fs - t_center;
        h0.samples[static_cast<std::size_t>(n)] = std::exp(-a * t * t) * std::cos(kTwoPi * fc * t);
    }
    return h0;
}

/// Reflection coefficient between media of impedance z_from and z_to.
inline double reflection(double z_from, double z_to)
{
    return (z_to - z_from) / (z_to + z_from);
}

/// Two-component spectral model (b_p = 0, sigma2 = 0) of a single layer.
/// Component 1 is the water-tissue echo, component 2 the tissue-glass echo.
inline ExponentialModel acoustic_to_spectral(const GroundTruth& gt, const MediumConstants& mc, double fs)
{
    gt.validate();
    mc.validate();
    if (!(fs > 0.0)) throw ConfigError("acoustic_to_spectral: fs must be positive");

    const double d_m  = units::um_to_m(gt.d);
    const double nu1  = 2.0 * d_m * fs / mc.c_w;
    const double nu2  = nu1 * (1.0 - mc.c_w / gt.c);
    const double g2   = -units::alpha_to_si(gt.alpha) * mc.c_w * nu1;
    const double r1   = reflection(mc.z_w, gt.z);
    const double a1   = mc.r_wg * r1;
    const double z_g  = mc.z_w * (1.0 + mc.r_wg) / (1.0 - mc.r_wg);
    const double r2   = reflection(gt.z, z_g);
    const double a2   = (1.0 - r1 * r1) * r2 / mc.r_wg;

    // Negative contrast is carried in the phase so that A_p stays >= 0.
    auto component = [](double signed_amp, double gamma, double nu) {
        ExponentialComponent c;
        c.amplitude = std::abs(signed_amp);
        c.phase     = signed_amp < 0.0 ? kPi : 0.0;
        c.gamma     = gamma;
        c.nu        = nu;
        return c;
    };

    ExponentialModel m;
    m.components = {component(a1, 0.0, nu1), component(a2, g2, nu2)};
    return m;
}

/// Noise standard deviation for a time-domain SNR relative to the envelope
/// peak of the reference. Zero for an infinite SNR.
inline double noise_sigma(const RFTrace& h0, double snr_db)
{
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("noise_sigma: SNR must be finite or +inf");
    if (std::isinf(snr_db)) return 0.0;
    const double xi = fft::envelope_max(h0.samples);
    return std::pow(10.0, (20.0 * std::log10(xi) - snr_db) / 20.0);
}

/// Spectrum of the noiseless measurement: F_h(k) = F_h0(k) * sum_p a_p z_p^k on
/// the non-negative bins, mirrored by conjugate symmetry.
inline std::vector<Complex> forward_spectrum(const ExponentialModel& model, const RFTrace& h0)
{
    h0.validate();
    const Index L = h0.size();
    model.validate_for_length(L);

    const auto F0 = fft::forward(h0.samples);
    std::vector<Complex> F(static_cast<std::size_t>(L));
    const Index half = L / 2;
    for (Index k = 0; k <= half; ++k)
        F[static_cast<std::size_t>(k)] = F0[static_cast<std::size_t>(k)] * model.evaluate(static_cast<double>(k), L);
    F[0] = Complex{F[0].real(), 0.0};
    if (L % 2 == 0) F[static_cast<std::size_t>(half)] = Complex{F[static_cast<std::size_t>(half)].real(), 0.0};
    for (Index k = 1; k < (L + 1) / 2; ++k)
        F[static_cast<std::size_t>(L - k)] = std::conj(F[static_cast<std::size_t>(k)]);
    return F;
}

/// Deterministic (noise-free) measurement trace.
inline RFTrace forward_trace(const ExponentialModel& model, const RFTrace& h0)
{
    const auto F = forward_spectrum(model, h0);
    const auto t = fft::inverse(F);
    RFTrace h;
    h.fs   = h0.fs;
    h.kind = TraceKind::measurement;
    h.samples.resize(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) h.samples[n] = t[n].real();
    return h;
}

/// Adds i.i.d. N(0, sigma^2) noise drawn from a seeded Mersenne twister.
inline void add_white_noise(RFTrace& h, double sigma, std::uint64_t seed)
{
    if (sigma == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (auto& s : h.samples) s += sigma * n01(rng);
}

/// Noisy measurement trace. `snr_db = +inf` yields the deterministic signal.
inline RFTrace simulate_trace(const ExponentialModel& model, const RFTrace& h0, double snr_db,
                              std::uint64_t seed)
{
    const double sigma = noise_sigma(h0, snr_db);
    RFTrace h = forward_trace(model, h0);
    add_white_noise(h, sigma, seed);
    return h;
}

} // namespace qam

#endif // QAM_SIGNAL_FORWARD_HPP
