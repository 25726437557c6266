// Command-line front end: simulate, sweep, crb, map, ingest-check.
#include <qam/qam.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace qam;

namespace
{

struct GlobalOptions
{
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string config;
    unsigned threads = 0;
};

// Pipeline overrides shared by several subcommands; unset values keep the
// manifest (or built-in) defaults.
struct PipelineOptions
{
    std::vector<std::string> methods;
    std::optional<double> tukey_c;
    std::optional<int> reweight_iters;
    std::optional<double> rho;
    std::optional<int> admm_iters;
    std::optional<double> band_db;
    std::optional<int> cadzow_iters;
    std::string order;
    std::optional<int> realizations;
};

void add_pipeline_flags(CLI::App* app, PipelineOptions& p)
{
    app->add_option("--method", p.methods, "Estimator(s): hk, rhk, ar, esprit")
        ->check(CLI::IsMember({"hk", "rhk", "ar", "esprit"}));
    app->add_option("--tukey-c", p.tukey_c, "Tukey bisquare cutoff constant");
    app->add_option("--reweight-iters", p.reweight_iters, "RHK outer reweighting rounds");
    app->add_option("--rho", p.rho, "ADMM penalty");
    app->add_option("--admm-iters", p.admm_iters, "ADMM iterations");
    app->add_option("--band-db", p.band_db, "Band threshold below the reference peak, dB");
    app->add_option("--cadzow-iters", p.cadzow_iters, "Cadzow iterations");
    app->add_option("--order", p.order, "Model order: fixed:N or auto");
    app->add_option("--realizations", p.realizations, "Monte-Carlo realizations per grid point");
}

OrderSelection parse_order(const std::string& s)
{
    OrderSelection o;
    if (s.empty()) return o;
    if (s == "auto") {
        o.automatic = true;
        return o;
    }
    if (s.rfind("fixed:", 0) == 0) {
        try {
            o.fixed = std::stoi(s.substr(6));
        } catch (const std::exception&) {
            throw ConfigError("--order: cannot parse '" + s + "'");
        }
        if (o.fixed < 2) throw ConfigError("--order: fixed order must be >= 2");
        return o;
    }
    throw ConfigError("--order: expected fixed:N or auto, got '" + s + "'");
}

ExperimentManifest base_manifest(const GlobalOptions& g, const PipelineOptions& p, CLI::App* app)
{
    ExperimentManifest m = g.config.empty() ? ExperimentManifest{} : load_manifest(g.config);
    if (app->get_parent()->count("--seed") || g.config.empty()) m.seed = g.seed;
    if (!p.methods.empty()) {
        m.methods.clear();
        for (const auto& s : p.methods) m.methods.push_back(*parse_method(s));
    }
    if (p.tukey_c) m.reweight.tukey_c = *p.tukey_c;
    if (p.reweight_iters) m.reweight.outer_iters = *p.reweight_iters;
    if (p.rho) m.admm.rho = *p.rho;
    if (p.admm_iters) m.admm.iterations = *p.admm_iters;
    if (p.band_db) m.band_db = *p.band_db;
    if (p.cadzow_iters) m.cadzow_iters = *p.cadzow_iters;
    if (p.realizations) m.n_realizations = *p.realizations;
    const OrderSelection o = parse_order(p.order);
    if (o.automatic) throw ConfigError("--order auto is only available for map");
    m.order = o.fixed;
    m.validate();
    return m;
}

PipelineConfig pipeline_from(const ExperimentManifest& m, const PipelineOptions& p)
{
    PipelineConfig cfg;
    cfg.band_db = m.band_db;
    cfg.cadzow_iters = m.cadzow_iters;
    cfg.order = parse_order(p.order);
    cfg.method = m.methods.front();
    cfg.admm = m.admm;
    cfg.reweight = m.reweight;
    cfg.medium = m.medium;
    cfg.ranges = m.ranges;
    return cfg;
}

unsigned thread_count(const GlobalOptions& g)
{
    return g.threads ? g.threads : std::max(1u, std::thread::hardware_concurrency());
}

Grid parse_grid(const std::string& s)
{
    double lo, step, hi;
    char tail;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &lo, &step, &hi, &tail) != 3)
        throw ConfigError("--grid: expected lower:step:upper, got '" + s + "'");
    return {lo, step, hi};
}

void print_estimate(const char* label, const AcousticEstimate& e)
{
    std::printf("%-8s c=%.6g m/s  Z=%.6g MRayl  alpha=%.6g dB/MHz/cm  d=%.6g um  %s\n", label, e.c, e.z, e.alpha, e.d,
                e.outlier ? ("outlier (" + std::string(to_string(e.failure)) + ")").c_str() : "ok");
}

// ---------------------------------------------------------------------------

struct SimulateOptions
{
    Index rows = 1, cols = 1;
    double snr = 50.0;
    std::optional<double> c, z, alpha, d;
    double step_um = 1.0;
};

int run_simulate(const GlobalOptions& g, const PipelineOptions& p, const SimulateOptions& s, CLI::App* app)
{
    ExperimentManifest m = base_manifest(g, p, app);
    GroundTruth truth = m.defaults;
    if (s.c) truth.c = *s.c;
    if (s.z) truth.z = *s.z;
    if (s.alpha) truth.alpha = *s.alpha;
    if (s.d) truth.d = *s.d;
    truth.validate();

    const RFTrace h0 = m.pulse.make();
    const ExponentialModel model = acoustic_to_spectral(truth, m.medium, m.pulse.fs);
    ScanData scan;
    scan.manifest.rows = s.rows;
    scan.manifest.cols = s.cols;
    scan.manifest.samples = h0.size();
    scan.manifest.fs_hz = h0.fs;
    scan.manifest.step_um = s.step_um;
    scan.reference = h0;
    for (Index i = 0; i < s.rows * s.cols; ++i)
        scan.traces.push_back(simulate_trace(model, h0, s.snr, mix_seed(m.seed, static_cast<std::uint64_t>(i))));

    const auto path = export_scan(g.out, "scan", scan);
    std::printf("wrote %s (%ldx%ld traces, SNR %g dB)\n", path.string().c_str(), static_cast<long>(s.rows),
                static_cast<long>(s.cols), s.snr);

    const PipelineConfig cfg = pipeline_from(m, p);
    const PreparedReference ref(h0, cfg.band_db);
    print_estimate("truth", acoustic_from_model(model, m.medium, m.pulse.fs));
    print_estimate(std::string(to_string(cfg.method)).c_str(), process_trace(scan.traces.front(), ref, cfg));
    return 0;
}

int run_sweep_cmd(const GlobalOptions& g, const PipelineOptions& p, const std::string& param,
                  const std::string& grid, CLI::App* app)
{
    ExperimentManifest m = base_manifest(g, p, app);
    if (!param.empty()) {
        const auto sp = parse_sweep_parameter(param);
        if (!sp) throw ConfigError("--param: unknown sweep parameter '" + param + "'");
        m.parameter = *sp;
    }
    if (!grid.empty()) m.grid = parse_grid(grid);
    m.validate();
    const SweepResult r = run_sweep(m, thread_count(g));
    emit_tables(r, m, g.out);
    std::cout << sweep_csv(r);
    std::fprintf(stderr, "wrote %s and %s\n", (fs::path(g.out) / "sweep.csv").string().c_str(),
                 (fs::path(g.out) / "run.json").string().c_str());
    return 0;
}

int run_crb_cmd(const GlobalOptions& g, const PipelineOptions& p, const std::string& param, const std::string& grid,
                CLI::App* app)
{
    ExperimentManifest m = base_manifest(g, p, app);
    if (!param.empty()) {
        const auto sp = parse_sweep_parameter(param);
        if (!sp) throw ConfigError("--param: unknown sweep parameter '" + param + "'");
        m.parameter = *sp;
    }
    if (!grid.empty()) m.grid = parse_grid(grid);
    if (m.crb_signals == 0) m.crb_signals = 500;
    m.validate();
    const RFTrace h0 = m.pulse.make();
    const auto values = m.grid.values();
    std::vector<CrbPoint> pts;
    for (std::size_t i = 0; i < values.size(); ++i) pts.push_back(crb_point(m, h0, values[i], i, thread_count(g)));
    fs::create_directories(g.out);
    const std::string text = crb_csv(pts);
    write_text(fs::path(g.out) / "crb.csv", text);
    std::cout << text;
    return 0;
}

int run_map_cmd(const GlobalOptions& g, const PipelineOptions& p, const std::string& scan_path, CLI::App* app)
{
    const ExperimentManifest m = [&] {
        PipelineOptions q = p;
        q.order.clear(); // map handles auto itself
        return base_manifest(g, q, app);
    }();
    const ScanData scan = ingest_scan(scan_path);
    const PipelineConfig cfg = pipeline_from(m, p);
    const AcousticMap map = build_map(scan.traces, scan.manifest.rows, scan.manifest.cols, scan.reference, cfg,
                                      scan.manifest.step_um, thread_count(g));
    fs::create_directories(g.out);
    write_text(fs::path(g.out) / "map.csv", map_csv(map));
    const auto summary = map_summary(map);
    write_text(fs::path(g.out) / "map_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int run_ingest_check(const std::string& scan_path)
{
    const ScanData scan = ingest_scan(scan_path);
    const auto& m = scan.manifest;
    double peak = 0.0;
    for (const auto& t : scan.traces)
        for (double v : t.samples) peak = std::max(peak, std::abs(v));
    const Band band = resolve_band(scan.reference, -12.0);
    std::printf("ok: %ldx%ld traces, %ld samples, fs %.6g Hz, step %g um\n", static_cast<long>(m.rows),
                static_cast<long>(m.cols), static_cast<long>(m.samples), m.fs_hz, m.step_um);
    std::printf("peak |h| %.6g, reference envelope max %.6g, -12 dB band k=%ld..%ld\n", peak,
                fft::envelope_max(scan.reference.samples), static_cast<long>(band.k_min), static_cast<long>(band.k_max));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantitative acoustic microscopy parameter estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--config", g.config, "Experiment manifest (JSON)")->check(CLI::ExistingFile);
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");

    PipelineOptions p;
    SimulateOptions sim;
    std::string param, grid, scan_path;

    auto* simulate = app.add_subcommand("simulate", "Simulate a scan and export it as a scan manifest");
    add_pipeline_flags(simulate, p);
    simulate->add_option("--rows", sim.rows, "Scan rows")->check(CLI::PositiveNumber);
    simulate->add_option("--cols", sim.cols, "Scan columns")->check(CLI::PositiveNumber);
    simulate->add_option("--snr", sim.snr, "SNR in dB (inf for noiseless)");
    simulate->add_option("--c", sim.c, "Speed of sound, m/s");
    simulate->add_option("--z", sim.z, "Impedance, MRayl");
    simulate->add_option("--alpha", sim.alpha, "Attenuation, dB/MHz/cm");
    simulate->add_option("--d", sim.d, "Thickness, um");
    simulate->add_option("--step-um", sim.step_um, "Lateral step, um");

    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep; writes sweep.csv and run.json");
    add_pipeline_flags(sweep, p);
    sweep->add_option("--param", param, "snr, Z, alpha, d or bandwidth");
    sweep->add_option("--grid", grid, "lower:step:upper");

    auto* crb = app.add_subcommand("crb", "Cramer-Rao bounds over a grid; writes crb.csv");
    add_pipeline_flags(crb, p);
    crb->add_option("--param", param, "snr, Z, alpha, d or bandwidth");
    crb->add_option("--grid", grid, "lower:step:upper");

    auto* map = app.add_subcommand("map", "Estimate parameter maps for a scan");
    add_pipeline_flags(map, p);
    map->add_option("--scan", scan_path, "Scan manifest (JSON)")->required()->check(CLI::ExistingFile);

    auto* ingest = app.add_subcommand("ingest-check", "Validate a scan manifest and its payloads");
    ingest->add_option("--scan", scan_path, "Scan manifest (JSON)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(g, p, sim, simulate);
        if (*sweep) return run_sweep_cmd(g, p, param, grid, sweep);
        if (*crb) return run_crb_cmd(g, p, param, grid, crb);
        if (*map) return run_map_cmd(g, p, scan_path, map);
        if (*ingest) return run_ingest_check(scan_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
