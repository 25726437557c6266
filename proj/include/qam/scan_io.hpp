#ifndef QAM_SCAN_IO_HPP
#define QAM_SCAN_IO_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qam/acoustics.hpp"
#include "qam/signal_forward.hpp"
#include "qam/types.hpp"

namespace qam
{

/// Scan description. Binary payloads are raw little-endian float32,
/// row-major [row][col][sample]; the reference holds [sample].
struct ScanManifest
{
    Index rows = 0;
    Index cols = 0;
    Index samples = 0;
    double fs_hz = 0.0;
    double step_um = 1.0;
    std::string data_file;
    std::string reference_file;
    std::string dtype = "f32le";

    void validate() const
    {
        if (rows < 1 || cols < 1 || samples < 2) throw IoError("scan manifest: rows, cols >= 1 and samples >= 2 required");
        if (!(fs_hz > 0.0)) throw IoError("scan manifest: fs_hz must be positive");
        if (dtype != "f32le") throw IoError("scan manifest: unsupported dtype '" + dtype + "'");
        if (data_file.empty() || reference_file.empty()) throw IoError("scan manifest: data_file and reference_file required");
    }
};

struct ScanData
{
    ScanManifest manifest;
    std::vector<RFTrace> traces; ///< row-major
    RFTrace reference;
};

inline nlohmann::json to_json(const ScanManifest& m)
{
    return {{"rows", m.rows},           {"cols", m.cols},
            {"samples", m.samples},     {"fs_hz", m.fs_hz},
            {"step_um", m.step_um},     {"data_file", m.data_file},
            {"reference_file", m.reference_file}, {"dtype", m.dtype}};
}

inline ScanManifest scan_manifest_from_json(const nlohmann::json& j)
{
    ScanManifest m;
    try {
        m.rows = j.at("rows").get<Index>();
        m.cols = j.at("cols").get<Index>();
        m.samples = j.at("samples").get<Index>();
        m.fs_hz = j.at("fs_hz").get<double>();
        m.step_um = j.value("step_um", 1.0);
        m.data_file = j.at("data_file").get<std::string>();
        m.reference_file = j.at("reference_file").get<std::string>();
        m.dtype = j.value("dtype", std::string("f32le"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("scan manifest: ") + e.what());
    }
    m.validate();
    return m;
}

namespace detail
{
inline std::vector<float> read_f32le(const std::filesystem::path& path, std::uintmax_t expected_count)
{
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string());
    const std::uintmax_t expected = expected_count * 4;
    if (bytes != expected)
        throw IoError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " + std::to_string(bytes));

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<float> v(static_cast<std::size_t>(expected_count));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(expected));
    if (!in) throw IoError("short read on " + path.string());
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& f : v) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = __builtin_bswap32(u);
            std::memcpy(&f, &u, 4);
        }
    }
    return v;
}

inline void write_f32le(const std::filesystem::path& path, const std::vector<float>& v)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    if constexpr (std::endian::native == std::endian::big) {
        for (float f : v) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = __builtin_bswap32(u);
            out.write(reinterpret_cast<const char*>(&u), 4);
        }
    } else {
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
    }
}
} // namespace detail

/// Reads a scan manifest and its binary payloads. Relative payload paths are
/// resolved against the manifest's directory.
inline ScanData ingest_scan(const std::filesystem::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open scan manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("scan manifest " + manifest_path.string() + ": " + e.what());
    }
    ScanData scan;
    scan.manifest = scan_manifest_from_json(j);
    const auto& m = scan.manifest;
    const auto base = manifest_path.parent_path();

    const auto S = static_cast<std::size_t>(m.samples);
    const auto data = detail::read_f32le(base / m.data_file, static_cast<std::uintmax_t>(m.rows * m.cols) * S);
    const auto ref = detail::read_f32le(base / m.reference_file, S);

    scan.traces.resize(static_cast<std::size_t>(m.rows * m.cols));
    for (std::size_t i = 0; i < scan.traces.size(); ++i) {
        auto& t = scan.traces[i];
        t.fs = m.fs_hz;
        t.kind = TraceKind::measurement;
        t.samples.assign(data.begin() + static_cast<std::ptrdiff_t>(i * S), data.begin() + static_cast<std::ptrdiff_t>((i + 1) * S));
    }
    scan.reference.fs = m.fs_hz;
    scan.reference.kind = TraceKind::reference;
    scan.reference.samples.assign(ref.begin(), ref.end());
    return scan;
}

/// Writes `<stem>.json`, `<stem>.f32` and `<stem>_ref.f32` into `dir`.
inline std::filesystem::path export_scan(const std::filesystem::path& dir, const std::string& stem, const ScanData& scan)
{
    ScanManifest m = scan.manifest;
    m.data_file = stem + ".f32";
    m.reference_file = stem + "_ref.f32";
    m.validate();
    const auto S = static_cast<std::size_t>(m.samples);
    if (scan.traces.size() != static_cast<std::size_t>(m.rows * m.cols)) throw IoError("export_scan: trace count mismatch");
    if (scan.reference.samples.size() != S) throw IoError("export_scan: reference length mismatch");

    std::vector<float> data;
    data.reserve(scan.traces.size() * S);
    for (const auto& t : scan.traces) {
        if (t.samples.size() != S) throw IoError("export_scan: trace length mismatch");
        for (double v : t.samples) data.push_back(static_cast<float>(v));
    }
    std::vector<float> ref(scan.reference.samples.begin(), scan.reference.samples.end());

    std::filesystem::create_directories(dir);
    detail::write_f32le(dir / m.data_file, data);
    detail::write_f32le(dir / m.reference_file, ref);
    const auto path = dir / (stem + ".json");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(m).dump(2) << '\n';
    return path;
}

/// CSV with one row per pixel: row, col, c, Z, alpha, d, outlier.
inline std::string map_csv(const AcousticMap& map)
{
    std::ostringstream os;
    os << "row,col,c,Z,alpha,d,outlier\n";
    char buf[40];
    auto num = [&](double v) -> std::string {
        if (!std::isfinite(v)) return "";
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (Index r = 0; r < map.rows; ++r)
        for (Index c = 0; c < map.cols; ++c) {
            const auto& e = map.at(r, c);
            os << r << ',' << c << ',' << num(e.c) << ',' << num(e.z) << ',' << num(e.alpha) << ',' << num(e.d) << ','
               << (e.outlier ? 1 : 0) << '\n';
        }
    return os.str();
}

/// Linear-interpolated percentile of a sorted sample.
inline double percentile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) return std::nan("");
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Summary of the admissible pixels: percentiles per parameter and the
/// outlier percentage.
inline nlohmann::json map_summary(const AcousticMap& map)
{
    std::vector<double> c, z, a, d;
    for (const auto& e : map.cells) {
        if (e.outlier) continue;
        c.push_back(e.c);
        z.push_back(e.z);
        a.push_back(e.alpha);
        d.push_back(e.d);
    }
    auto stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        nlohmann::json j = nlohmann::json::object();
        for (double q : {5.0, 25.0, 50.0, 75.0, 95.0}) {
            const double p = percentile(v, q);
            j["p" + std::to_string(static_cast<int>(q))] = std::isfinite(p) ? nlohmann::json(p) : nlohmann::json();
        }
        return j;
    };
    return {{"rows", map.rows},
            {"cols", map.cols},
            {"step_um", map.step_um},
            {"pixels", map.cells.size()},
            {"outlier_pct", map.outlier_pct()},
            {"c", stats(c)},
            {"Z", stats(z)},
            {"alpha", stats(a)},
            {"d", stats(d)}};
}

} // namespace qam

#endif // QAM_SCAN_IO_HPP
