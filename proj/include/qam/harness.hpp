#ifndef QAM_HARNESS_HPP
#define QAM_HARNESS_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qam/acoustics.hpp"
#include "qam/crb.hpp"
#include "qam/estimators.hpp"
#include "qam/signal_forward.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/types.hpp"

namespace qam
{

inline constexpr const char* kVersion = "1.0.0";

enum class SweepParameter
{
    snr,
    z,
    alpha,
    d,
    bandwidth
};

inline std::string_view to_string(SweepParameter p)
{
    switch (p) {
    case SweepParameter::snr: return "snr";
    case SweepParameter::z: return "Z";
    case SweepParameter::alpha: return "alpha";
    case SweepParameter::d: return "d";
    case SweepParameter::bandwidth: return "bandwidth";
    }
    return "unknown";
}

inline std::optional<SweepParameter> parse_sweep_parameter(std::string_view s)
{
    if (s == "snr" || s == "SNR") return SweepParameter::snr;
    if (s == "z" || s == "Z") return SweepParameter::z;
    if (s == "alpha") return SweepParameter::alpha;
    if (s == "d") return SweepParameter::d;
    if (s == "bandwidth" || s == "band") return SweepParameter::bandwidth;
    return std::nullopt;
}

/// Inclusive arithmetic grid lower, lower+step, ... up to upper.
struct Grid
{
    double lower = 0.0;
    double step  = 1.0;
    double upper = 0.0;

    std::vector<double> values() const
    {
        if (step == 0.0 || !std::isfinite(step)) throw ConfigError("Grid: step must be non-zero");
        const double span = (upper - lower) / step;
        if (span < -1e-9) throw ConfigError("Grid: step does not move from lower towards upper");
        const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) {
            // Round to 12 significant digits so 0.1-style steps print cleanly.
            const double raw = lower + static_cast<double>(i) * step;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", raw);
            v[i] = std::stod(buf);
        }
        return v;
    }
};

/// Synthetic reference pulse settings.
struct PulseConfig
{
    double fc       = 500e6;
    double frac_bw  = 0.8;
    double fs       = 10e9;
    Index samples   = 300;
    double t_center = 15e-9;

    RFTrace make() const { return synth_reference(fc, frac_bw, fs, samples, t_center); }
};

struct ExperimentManifest
{
    SweepParameter parameter = SweepParameter::snr;
    Grid grid{20.0, 5.0, 100.0};
    int n_realizations = 50;
    int realization_offset = 0; ///< first realization index, for split runs
    GroundTruth defaults;
    double snr_db  = 50.0;
    double band_db = -12.0;
    std::vector<Method> methods{Method::rhk, Method::hk, Method::ar, Method::esprit};
    std::uint64_t seed = 1;

    PulseConfig pulse;
    MediumConstants medium;
    AdmissibleRanges ranges;
    int cadzow_iters = 5;
    Index order = 2;
    AdmmConfig admm;
    ReweightConfig reweight;
    int crb_signals = 500; ///< 0 disables the CRB columns

    void validate() const
    {
        if (n_realizations < 1) throw ConfigError("manifest: n_realizations must be >= 1");
        if (realization_offset < 0) throw ConfigError("manifest: realization_offset must be >= 0");
        if (methods.empty()) throw ConfigError("manifest: at least one method required");
        if (crb_signals < 0) throw ConfigError("manifest: crb_signals must be >= 0");
        defaults.validate();
        medium.validate();
        reweight.validate();
        (void)grid.values();
        if (order < 2) throw ConfigError("manifest: order must be >= 2");
    }
};

/// Ground truth, SNR and band threshold at one sweep value.
struct SweepSetting
{
    GroundTruth truth;
    double snr_db;
    double band_db;
};

inline SweepSetting setting_at(const ExperimentManifest& m, double value)
{
    SweepSetting s{m.defaults, m.snr_db, m.band_db};
    switch (m.parameter) {
    case SweepParameter::snr: s.snr_db = value; break;
    case SweepParameter::z: s.truth.z = value; break;
    case SweepParameter::alpha: s.truth.alpha = value; break;
    case SweepParameter::d: s.truth.d = value; break;
    case SweepParameter::bandwidth: s.band_db = value; break;
    }
    return s;
}

/// Running sums for outlier-filtered RMSE; pooling two accumulators equals
/// accumulating both sample sets.
struct ErrorAccumulator
{
    double sse_c = 0.0, sse_z = 0.0, sse_alpha = 0.0, sse_d = 0.0;
    int n_valid = 0;
    int n_total = 0;

    void add(const AcousticEstimate& e, const GroundTruth& t)
    {
        ++n_total;
        if (e.outlier) return;
        ++n_valid;
        sse_c += (e.c - t.c) * (e.c - t.c);
        sse_z += (e.z - t.z) * (e.z - t.z);
        sse_alpha += (e.alpha - t.alpha) * (e.alpha - t.alpha);
        sse_d += (e.d - t.d) * (e.d - t.d);
    }

    ErrorAccumulator& operator+=(const ErrorAccumulator& o)
    {
        sse_c += o.sse_c;
        sse_z += o.sse_z;
        sse_alpha += o.sse_alpha;
        sse_d += o.sse_d;
        n_valid += o.n_valid;
        n_total += o.n_total;
        return *this;
    }
};

struct MethodStats
{
    Method method = Method::rhk;
    std::optional<double> rmse_c, rmse_z, rmse_alpha, rmse_d; ///< absent when n_valid == 0
    double outlier_pct = 0.0;
    int n_valid = 0;
    int n_total = 0;
    ErrorAccumulator acc;

    static MethodStats from(Method m, const ErrorAccumulator& a)
    {
        MethodStats s;
        s.method = m;
        s.acc = a;
        s.n_valid = a.n_valid;
        s.n_total = a.n_total;
        s.outlier_pct = a.n_total ? 100.0 * (a.n_total - a.n_valid) / a.n_total : 0.0;
        if (a.n_valid > 0) {
            const double n = a.n_valid;
            s.rmse_c = std::sqrt(a.sse_c / n);
            s.rmse_z = std::sqrt(a.sse_z / n);
            s.rmse_alpha = std::sqrt(a.sse_alpha / n);
            s.rmse_d = std::sqrt(a.sse_d / n);
        }
        return s;
    }
};

struct SqrtCrb
{
    double c = 0.0, z = 0.0, alpha = 0.0, d = 0.0;
};

struct SweepPoint
{
    double value = 0.0;
    std::vector<MethodStats> methods;
    std::optional<SqrtCrb> sqrt_crb;
    double sigma2 = 0.0;
};

struct SweepResult
{
    SweepParameter parameter = SweepParameter::snr;
    std::vector<SweepPoint> points;

    const MethodStats* find(std::size_t point, Method m) const
    {
        for (const auto& s : points.at(point).methods)
            if (s.method == m) return &s;
        return nullptr;
    }
};

/// Root mean square of (values - truth) over unmasked entries; absent when
/// every entry is masked.
inline std::optional<double> rmse(std::span<const double> values, double truth, std::span<const bool> outlier_mask)
{
    if (values.size() != outlier_mask.size()) throw ConfigError("rmse: mask length mismatch");
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (outlier_mask[i]) continue;
        sse += (values[i] - truth) * (values[i] - truth);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return std::sqrt(sse / static_cast<double>(n));
}

struct CrbPoint
{
    double value = 0.0;
    double sigma2 = 0.0;
    std::optional<SqrtCrb> sqrt_crb;
    double fim_condition = 0.0;
};

/// sigma^2 calibration and acoustic CRBs for one sweep setting. The CRB always
/// uses the manifest's default band, so it is independent of a swept band; a
/// bandwidth sweep also reuses one noise stream for every point.
inline CrbPoint crb_point(const ExperimentManifest& m, const RFTrace& h0, double value, std::size_t point_index,
                          unsigned threads = 1)
{
    const SweepSetting s = setting_at(m, value);
    const ExponentialModel model = acoustic_to_spectral(s.truth, m.medium, m.pulse.fs);
    const Band crb_band = resolve_band(h0, m.band_db);
    CrbPoint out;
    out.value = value;
    if (m.crb_signals == 0) return out;
    out.sigma2 = approx_sigma2(model, h0, s.snr_db, crb_band, m.crb_signals,
                               mix_seed(m.seed ^ 0xC0FFEEULL, m.parameter == SweepParameter::bandwidth ? 0 : point_index),
                               threads);
    if (out.sigma2 == 0.0) {
        out.sqrt_crb = SqrtCrb{};
        return out;
    }
    try {
        const SpectralTheta th = make_theta(model, crb_band, h0.size(), out.sigma2);
        const CrbReport r = crb_acoustic(th, m.medium, m.pulse.fs);
        out.sqrt_crb = SqrtCrb{std::sqrt(r.crb_c), std::sqrt(r.crb_z), std::sqrt(r.crb_alpha), std::sqrt(r.crb_d)};
        out.fim_condition = r.fim_condition;
    } catch (const Error&) {
        out.sqrt_crb.reset();
    }
    return out;
}

/// Seed of realization r at sweep point i; shared by every method (paired design).
inline std::uint64_t realization_seed(std::uint64_t seed, std::size_t point, std::size_t r)
{
    return mix_seed(mix_seed(seed, point), r);
}

/// Monte-Carlo sweep: for each grid value simulate the realizations, run
/// every method on identical traces, aggregate outlier-filtered RMSE and
/// outlier rate, attach sqrt-CRBs.
inline SweepResult run_sweep(const ExperimentManifest& m, unsigned threads = 1)
{
    m.validate();
    const RFTrace h0 = m.pulse.make();
    const std::vector<double> grid = m.grid.values();
    const std::size_t n_methods = m.methods.size();

    SweepResult result;
    result.parameter = m.parameter;
    result.points.resize(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SweepSetting s = setting_at(m, grid[i]);
        const ExponentialModel model = acoustic_to_spectral(s.truth, m.medium, m.pulse.fs);
        const PreparedReference ref(h0, s.band_db);
        const RFTrace clean = forward_trace(model, h0);
        const double sigma = noise_sigma(h0, s.snr_db);

        PipelineConfig base;
        base.band_db = s.band_db;
        base.cadzow_iters = m.cadzow_iters;
        base.order.fixed = m.order;
        base.admm = m.admm;
        base.reweight = m.reweight;
        base.medium = m.medium;
        base.ranges = m.ranges;

        const auto n = static_cast<std::size_t>(m.n_realizations);
        std::vector<AcousticEstimate> est(n * n_methods);
        parallel_for(n, threads, [&](std::size_t r) {
            RFTrace h = clean;
            add_white_noise(h, sigma, realization_seed(m.seed, i, static_cast<std::size_t>(m.realization_offset) + r));
            const NormalizedSpectrum x = normalized_spectrum(h, ref.h0, ref.band);
            const Index order = std::min(m.order, x.half_order());
            std::optional<NormalizedSpectrum> xd;
            if (order >= 2) xd = cadzow(x, order, m.cadzow_iters);
            for (std::size_t k = 0; k < n_methods; ++k) {
                AcousticEstimate ae;
                if (xd) {
                    try {
                        const auto e = estimate(m.methods[k], *xd, x, order, base.admm, base.reweight);
                        ae = spectral_to_acoustic(rank_pulses(e, ref.spectrum), base.medium, base.ranges);
                    } catch (const Error&) {
                        ae = AcousticEstimate{};
                        ae.failure = Failure::solver_error;
                    }
                }
                if (ae.failure != Failure::none) ae.outlier = true;
                est[r * n_methods + k] = ae;
            }
        });

        SweepPoint& pt = result.points[i];
        pt.value = grid[i];
        for (std::size_t k = 0; k < n_methods; ++k) {
            ErrorAccumulator acc;
            for (std::size_t r = 0; r < n; ++r) acc.add(est[r * n_methods + k], s.truth);
            pt.methods.push_back(MethodStats::from(m.methods[k], acc));
        }
        const CrbPoint cp = crb_point(m, h0, grid[i], i, threads);
        pt.sqrt_crb = cp.sqrt_crb;
        pt.sigma2 = cp.sigma2;
    }
    return result;
}

/// Combines two sweeps over the same grid and methods (e.g. disjoint
/// realization ranges).
inline SweepResult pool(const SweepResult& a, const SweepResult& b)
{
    if (a.points.size() != b.points.size()) throw ConfigError("pool: grids differ");
    SweepResult out = a;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        auto& pa = out.points[i];
        const auto& pb = b.points[i];
        if (pa.methods.size() != pb.methods.size() || pa.value != pb.value) throw ConfigError("pool: grids differ");
        for (std::size_t k = 0; k < pa.methods.size(); ++k) {
            ErrorAccumulator acc = pa.methods[k].acc;
            acc += pb.methods[k].acc;
            pa.methods[k] = MethodStats::from(pa.methods[k].method, acc);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tables

namespace detail
{
inline std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
inline std::string fmt_opt(const std::optional<double>& v)
{
    return v ? fmt_double(*v) : std::string();
}
} // namespace detail

inline const std::vector<std::string>& sweep_csv_columns()
{
    static const std::vector<std::string> cols{"sweep_value", "method",         "rmse_c",     "rmse_Z",
                                               "rmse_alpha",  "rmse_d",         "outlier_pct", "sqrt_crb_c",
                                               "sqrt_crb_Z",  "sqrt_crb_alpha", "sqrt_crb_d",  "n_valid",
                                               "n_total"};
    return cols;
}

/// RFC-4180 CSV, LF line endings, one row per (sweep value, method).
inline std::string sweep_csv(const SweepResult& r)
{
    std::ostringstream os;
    const auto& cols = sweep_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& pt : r.points) {
        for (const auto& s : pt.methods) {
            std::optional<double> cc, cz, ca, cd;
            if (pt.sqrt_crb) {
                cc = pt.sqrt_crb->c;
                cz = pt.sqrt_crb->z;
                ca = pt.sqrt_crb->alpha;
                cd = pt.sqrt_crb->d;
            }
            os << detail::fmt_double(pt.value) << ',' << to_string(s.method) << ',' << detail::fmt_opt(s.rmse_c) << ','
               << detail::fmt_opt(s.rmse_z) << ',' << detail::fmt_opt(s.rmse_alpha) << ','
               << detail::fmt_opt(s.rmse_d) << ',' << detail::fmt_double(s.outlier_pct) << ',' << detail::fmt_opt(cc)
               << ',' << detail::fmt_opt(cz) << ',' << detail::fmt_opt(ca) << ',' << detail::fmt_opt(cd) << ','
               << s.n_valid << ',' << s.n_total << '\n';
        }
    }
    return os.str();
}

/// One parsed CSV row; empty fields become std::nullopt.
struct SweepRow
{
    double sweep_value = 0.0;
    std::string method;
    std::optional<double> rmse_c, rmse_z, rmse_alpha, rmse_d;
    double outlier_pct = 0.0;
    std::optional<double> sqrt_crb_c, sqrt_crb_z, sqrt_crb_alpha, sqrt_crb_d;
    int n_valid = 0;
    int n_total = 0;
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::vector<SweepRow> parse_sweep_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw IoError("sweep CSV: missing header");
    if (split_csv_line(line) != sweep_csv_columns()) throw IoError("sweep CSV: unexpected header");
    auto opt = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        return std::stod(s);
    };
    std::vector<SweepRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != sweep_csv_columns().size()) throw IoError("sweep CSV: wrong field count");
        SweepRow r;
        r.sweep_value = std::stod(f[0]);
        r.method = f[1];
        r.rmse_c = opt(f[2]);
        r.rmse_z = opt(f[3]);
        r.rmse_alpha = opt(f[4]);
        r.rmse_d = opt(f[5]);
        r.outlier_pct = std::stod(f[6]);
        r.sqrt_crb_c = opt(f[7]);
        r.sqrt_crb_z = opt(f[8]);
        r.sqrt_crb_alpha = opt(f[9]);
        r.sqrt_crb_d = opt(f[10]);
        r.n_valid = std::stoi(f[11]);
        r.n_total = std::stoi(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Manifest JSON

inline nlohmann::json to_json(const ExperimentManifest& m)
{
    nlohmann::json methods = nlohmann::json::array();
    for (auto k : m.methods) methods.push_back(std::string(to_string(k)));
    return {
        {"sweep_parameter", std::string(to_string(m.parameter))},
        {"grid", {{"lower", m.grid.lower}, {"step", m.grid.step}, {"upper", m.grid.upper}}},
        {"n_realizations", m.n_realizations},
        {"realization_offset", m.realization_offset},
        {"seed", m.seed},
        {"defaults",
         {{"c", m.defaults.c},
          {"Z", m.defaults.z},
          {"alpha", m.defaults.alpha},
          {"d", m.defaults.d},
          {"snr_db", m.snr_db},
          {"band_db", m.band_db}}},
        {"methods", methods},
        {"pulse",
         {{"fc_hz", m.pulse.fc},
          {"frac_bw", m.pulse.frac_bw},
          {"fs_hz", m.pulse.fs},
          {"samples", m.pulse.samples},
          {"t_center_s", m.pulse.t_center}}},
        {"medium", {{"c_w", m.medium.c_w}, {"Z_w", m.medium.z_w}, {"R_wg", m.medium.r_wg}}},
        {"cadzow_iters", m.cadzow_iters},
        {"order", m.order},
        {"admm", {{"rho", m.admm.rho}, {"iterations", m.admm.iterations}}},
        {"reweight",
         {{"tukey_c", m.reweight.tukey_c}, {"outer_iters", m.reweight.outer_iters}, {"mad_scale", m.reweight.mad_scale}}},
        {"crb_signals", m.crb_signals},
    };
}

inline ExperimentManifest manifest_from_json(const nlohmann::json& j)
{
    ExperimentManifest m;
    try {
        if (j.contains("sweep_parameter")) {
            const auto p = parse_sweep_parameter(j.at("sweep_parameter").get<std::string>());
            if (!p) throw ConfigError("manifest: unknown sweep_parameter");
            m.parameter = *p;
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            m.grid = {g.at("lower").get<double>(), g.at("step").get<double>(), g.at("upper").get<double>()};
        }
        m.n_realizations = j.value("n_realizations", m.n_realizations);
        m.realization_offset = j.value("realization_offset", m.realization_offset);
        m.seed = j.value("seed", m.seed);
        if (j.contains("defaults")) {
            const auto& d = j.at("defaults");
            m.defaults.c = d.value("c", m.defaults.c);
            m.defaults.z = d.value("Z", m.defaults.z);
            m.defaults.alpha = d.value("alpha", m.defaults.alpha);
            m.defaults.d = d.value("d", m.defaults.d);
            m.snr_db = d.value("snr_db", m.snr_db);
            m.band_db = d.value("band_db", m.band_db);
        }
        if (j.contains("methods")) {
            m.methods.clear();
            for (const auto& s : j.at("methods")) {
                const auto k = parse_method(s.get<std::string>());
                if (!k) throw ConfigError("manifest: unknown method " + s.get<std::string>());
                m.methods.push_back(*k);
            }
        }
        if (j.contains("pulse")) {
            const auto& p = j.at("pulse");
            m.pulse.fc = p.value("fc_hz", m.pulse.fc);
            m.pulse.frac_bw = p.value("frac_bw", m.pulse.frac_bw);
            m.pulse.fs = p.value("fs_hz", m.pulse.fs);
            m.pulse.samples = p.value("samples", m.pulse.samples);
            m.pulse.t_center = p.value("t_center_s", m.pulse.t_center);
        }
        if (j.contains("medium")) {
            const auto& md = j.at("medium");
            m.medium.c_w = md.value("c_w", m.medium.c_w);
            m.medium.z_w = md.value("Z_w", m.medium.z_w);
            m.medium.r_wg = md.value("R_wg", m.medium.r_wg);
        }
        m.cadzow_iters = j.value("cadzow_iters", m.cadzow_iters);
        m.order = j.value("order", m.order);
        if (j.contains("admm")) {
            m.admm.rho = j.at("admm").value("rho", m.admm.rho);
            m.admm.iterations = j.at("admm").value("iterations", m.admm.iterations);
        }
        if (j.contains("reweight")) {
            const auto& r = j.at("reweight");
            m.reweight.tukey_c = r.value("tukey_c", m.reweight.tukey_c);
            m.reweight.outer_iters = r.value("outer_iters", m.reweight.outer_iters);
            m.reweight.mad_scale = r.value("mad_scale", m.reweight.mad_scale);
        }
        m.crb_signals = j.value("crb_signals", m.crb_signals);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

inline ExperimentManifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

/// Writes sweep.csv and run.json into `out_dir`.
inline void emit_tables(const SweepResult& r, const ExperimentManifest& m, const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "sweep.csv", sweep_csv(r));
    nlohmann::json meta{{"manifest", to_json(m)},
                        {"seed", m.seed},
                        {"versions", {{"qam", kVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                                   std::to_string(EIGEN_MINOR_VERSION)}}},
                        {"points", r.points.size()}};
    write_text(out_dir / "run.json", meta.dump(2) + "\n");
}

inline std::string crb_csv(const std::vector<CrbPoint>& pts)
{
    std::ostringstream os;
    os << "sweep_value,sigma2,sqrt_crb_c,sqrt_crb_Z,sqrt_crb_alpha,sqrt_crb_d,fim_condition\n";
    for (const auto& p : pts) {
        std::optional<double> c, z, a, d;
        if (p.sqrt_crb) {
            c = p.sqrt_crb->c;
            z = p.sqrt_crb->z;
            a = p.sqrt_crb->alpha;
            d = p.sqrt_crb->d;
        }
        os << detail::fmt_double(p.value) << ',' << detail::fmt_double(p.sigma2) << ',' << detail::fmt_opt(c) << ','
           << detail::fmt_opt(z) << ',' << detail::fmt_opt(a) << ',' << detail::fmt_opt(d) << ','
           << detail::fmt_double(p.fim_condition) << '\n';
    }
    return os.str();
}

} // namespace qam

#endif // QAM_HARNESS_HPP
