#ifndef QAM_ACOUSTICS_HPP
#define QAM_ACOUSTICS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "qam/estimators.hpp"
#include "qam/signal_forward.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/types.hpp"

namespace qam
{

/// Admissible tissue ranges; values outside mark the pixel as an outlier.
struct AdmissibleRanges
{
    double c_min = 1500.0;
    double c_max = 2200.0;
    double z_min = 1.48;
    double z_max = 2.2;
};

/// Acoustic parameters of one pixel, in I/O units.
struct AcousticEstimate
{
    double c     = std::nan(""); ///< m/s
    double z     = std::nan(""); ///< MRayl
    double alpha = std::nan(""); ///< dB/MHz/cm
    double d     = std::nan(""); ///< um
    bool outlier = true;
    Failure failure = Failure::none;
};

/// True when (c, Z) falls outside the closed admissible intervals or is not
/// finite. alpha and d never decide.
inline bool classify_outlier(const AcousticEstimate& ae, const AdmissibleRanges& r = {})
{
    if (!std::isfinite(ae.c) || !std::isfinite(ae.z)) return true;
    return ae.c < r.c_min || ae.c > r.c_max || ae.z < r.z_min || ae.z > r.z_max;
}

/// Closed-form acoustic maps from the interface parameters:
///   c = c_w nu1 / (nu1 - nu2),  d = c_w nu1 / (2 fs),
///   alpha = -gamma2 / (c_w nu1),  Z = Z_w (1 + A1/R_wg) / (1 - A1/R_wg).
inline AcousticEstimate acoustic_from_parameters(double a1, double gamma2, double nu1, double nu2,
                                                 const MediumConstants& mc, double fs,
                                                 const AdmissibleRanges& ranges = {})
{
    AcousticEstimate ae;
    if (!std::isfinite(a1) || !std::isfinite(gamma2) || !std::isfinite(nu1) || !std::isfinite(nu2)) {
        ae.failure = Failure::non_finite;
        return ae;
    }
    if (nu1 == nu2 || nu1 == 0.0) {
        ae.failure = Failure::out_of_range;
        return ae;
    }
    const double u = a1 / mc.r_wg;
    ae.c     = mc.c_w * nu1 / (nu1 - nu2);
    ae.d     = units::m_to_um(0.5 * mc.c_w * nu1 / fs);
    ae.alpha = units::alpha_from_si(-gamma2 / (mc.c_w * nu1));
    ae.z     = mc.z_w * (1.0 + u) / (1.0 - u);

    if (!std::isfinite(ae.c) || !std::isfinite(ae.z) || !std::isfinite(ae.alpha) || !std::isfinite(ae.d)) {
        ae.failure = Failure::non_finite;
        ae.outlier = true;
        return ae;
    }
    ae.outlier = classify_outlier(ae, ranges);
    if (ae.outlier) ae.failure = Failure::out_of_range;
    return ae;
}

/// Acoustic parameters of a two-component model in interface order.
inline AcousticEstimate acoustic_from_model(const ExponentialModel& m, const MediumConstants& mc, double fs,
                                            const AdmissibleRanges& ranges = {})
{
    if (m.order() < 2) throw ConfigError("acoustic_from_model: need two components");
    const auto& c1 = m.components[0];
    const auto& c2 = m.components[1];
    return acoustic_from_parameters(c1.amplitude * std::cos(c1.phase), c2.gamma, c1.nu, c2.nu, mc, fs, ranges);
}

/// Maps a ranked estimate (component 0 = water-tissue echo) to acoustic
/// parameters. A1 is the signed real part of a_1. Never throws for finite
/// input; failures are encoded in the result.
inline AcousticEstimate spectral_to_acoustic(const SpectralEstimate& est, const MediumConstants& mc,
                                             const AdmissibleRanges& ranges = {})
{
    AcousticEstimate ae;
    if (!est.ok()) {
        ae.failure = est.failure;
        return ae;
    }
    if (est.order() < 2 || est.a.size() < 2) {
        ae.failure = Failure::too_few_components;
        return ae;
    }
    return acoustic_from_parameters(est.a[0].real(), est.gamma(1), est.nu(0), est.nu(1), mc, est.fs, ranges);
}

struct OrderSelection
{
    bool automatic     = false;
    Index fixed        = 2;
    Index p_min        = 2;
    double energy_frac = 0.10;
};

/// Per-pixel processing chain configuration.
struct PipelineConfig
{
    double band_db   = -12.0;
    int cadzow_iters = 5;
    OrderSelection order;
    Method method = Method::rhk;
    AdmmConfig admm;
    ReweightConfig reweight;
    MediumConstants medium;
    AdmissibleRanges ranges;
};

/// Reference-derived quantities shared by every pixel.
struct PreparedReference
{
    RFTrace h0;
    Band band;
    std::vector<Complex> spectrum;

    PreparedReference(RFTrace ref, double band_db)
        : h0(std::move(ref)), band(resolve_band(h0, band_db)), spectrum(fft::forward(h0.samples))
    {
    }
    PreparedReference(RFTrace ref, const Band& b)
        : h0(std::move(ref)), band(b), spectrum(fft::forward(h0.samples))
    {
    }
};

/// Output of the spectral stage, before the acoustic conversion.
struct PixelSpectral
{
    SpectralEstimate ranked;
    Index order = 0;
};

inline PixelSpectral process_spectral(const RFTrace& h, const PreparedReference& ref, const PipelineConfig& cfg)
{
    const NormalizedSpectrum x = normalized_spectrum(h, ref.h0, ref.band);
    const Index n_max = x.half_order();
    Index order = cfg.order.automatic ? select_model_order(x, cfg.order.p_min, cfg.order.energy_frac)
                                      : cfg.order.fixed;
    order = std::min(order, n_max);

    PixelSpectral out;
    out.order = order;
    if (order < 2) {
        out.ranked.failure = Failure::too_few_components;
        return out;
    }
    const NormalizedSpectrum xd = cadzow(x, order, cfg.cadzow_iters);
    const SpectralEstimate est = estimate(cfg.method, xd, x, order, cfg.admm, cfg.reweight);
    out.ranked = rank_pulses(est, ref.spectrum);
    return out;
}

/// normalize -> (order) -> cadzow -> estimate -> rank -> acoustic.
inline AcousticEstimate process_trace(const RFTrace& h, const PreparedReference& ref, const PipelineConfig& cfg)
{
    const PixelSpectral s = process_spectral(h, ref, cfg);
    if (!s.ranked.ok()) {
        AcousticEstimate ae;
        ae.failure = s.ranked.failure;
        return ae;
    }
    return spectral_to_acoustic(s.ranked, cfg.medium, cfg.ranges);
}

struct AcousticMap
{
    Index rows = 0;
    Index cols = 0;
    double step_um = 1.0;
    std::vector<AcousticEstimate> cells; ///< row-major

    const AcousticEstimate& at(Index r, Index c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }

    double outlier_pct() const
    {
        if (cells.empty()) return 0.0;
        const auto n = std::count_if(cells.begin(), cells.end(), [](const auto& e) { return e.outlier; });
        return 100.0 * static_cast<double>(n) / static_cast<double>(cells.size());
    }
};

/// Runs `task(i)` for i in [0, count) on up to `threads` workers.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
}

/// Applies the pixel chain to every trace of a row-major grid. A pixel that
/// fails for any reason is stored as an outlier; other pixels are unaffected.
inline AcousticMap build_map(const std::vector<RFTrace>& traces, Index rows, Index cols, const RFTrace& h0,
                             const PipelineConfig& cfg, double step_um = 1.0, unsigned threads = 1)
{
    if (rows < 1 || cols < 1) throw ConfigError("build_map: grid dimensions must be positive");
    if (static_cast<Index>(traces.size()) != rows * cols)
        throw ConfigError("build_map: trace count does not match grid dimensions");

    const PreparedReference ref(h0, cfg.band_db);
    AcousticMap map;
    map.rows = rows;
    map.cols = cols;
    map.step_um = step_um;
    map.cells.resize(traces.size());
    parallel_for(traces.size(), threads, [&](std::size_t i) {
        AcousticEstimate ae;
        try {
            ae = process_trace(traces[i], ref, cfg);
        } catch (const Error&) {
            ae = AcousticEstimate{};
            ae.failure = Failure::solver_error;
        }
        if (ae.failure != Failure::none && ae.failure != Failure::out_of_range) ae.outlier = true;
        map.cells[i] = ae;
    });
    return map;
}

} // namespace qam

#endif // QAM_ACOUSTICS_HPP
