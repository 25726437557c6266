// Acceptance runner. Prints one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance 3 5        run a subset
#include <qam/qam.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qam;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;
};

unsigned worker_count()
{
    if (const char* env = std::getenv("QAM_THREADS")) return static_cast<unsigned>(std::max(1, std::atoi(env)));
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentManifest sweep_manifest(SweepParameter p, Grid g, int realizations, int crb_signals = 0)
{
    ExperimentManifest m;
    m.parameter = p;
    m.grid = g;
    m.n_realizations = realizations;
    m.crb_signals = crb_signals;
    return m;
}

std::string outlier_row(const SweepResult& r, std::size_t i)
{
    std::string s = fmt("%g:", r.points[i].value);
    for (const auto& ms : r.points[i].methods) s += fmt(" %s=%.1f%%", std::string(to_string(ms.method)).c_str(), ms.outlier_pct);
    return s;
}

double pct(const SweepResult& r, std::size_t i, Method m) { return r.find(i, m)->outlier_pct; }

const std::vector<Method> kMethods{Method::rhk, Method::hk, Method::ar, Method::esprit};

// ---------------------------------------------------------------------------

Outcome noiseless_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    const ExperimentManifest m;
    const RFTrace h0 = m.pulse.make();
    const auto model = acoustic_to_spectral(m.defaults, m.medium, m.pulse.fs);
    const RFTrace h = forward_trace(model, h0);
    PipelineConfig cfg;
    double worst = 0.0;
    for (Method meth : kMethods) {
        cfg.method = meth;
        const PreparedReference ref(h0, cfg.band_db);
        const auto ae = process_trace(h, ref, cfg);
        const GroundTruth& t = m.defaults;
        const double e = std::max({std::abs(ae.c - t.c) / t.c, std::abs(ae.z - t.z) / t.z,
                                   std::abs(ae.alpha - t.alpha) / t.alpha, std::abs(ae.d - t.d) / t.d});
        if (!(e < 1e-4)) {
            o.pass = false;
            o.detail += fmt(" %s rel.err %.3g;", std::string(to_string(meth)).c_str(), e);
        }
        worst = std::max(worst, std::isfinite(e) ? e : 1e300);
    }
    const double secs = seconds_since(t0);
    if (secs >= 5.0) o.pass = false;
    o.detail += fmt(" max rel.err %.2e, %.2f s", worst, secs);
    return o;
}

Outcome crb_attainment()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    const auto r = run_sweep(sweep_manifest(SweepParameter::snr, {80, 1, 80}, 50, 500), worker_count());
    const auto& pt = r.points[0];
    if (!pt.sqrt_crb) return {false, " CRB unavailable"};
    const SqrtCrb& b = *pt.sqrt_crb;
    double worst = 0.0;
    for (const auto& ms : pt.methods) {
        if (!ms.rmse_c) {
            o.pass = false;
            o.detail += fmt(" %s has no valid estimate;", std::string(to_string(ms.method)).c_str());
            continue;
        }
        const double ratios[4] = {*ms.rmse_c / b.c, *ms.rmse_z / b.z, *ms.rmse_alpha / b.alpha, *ms.rmse_d / b.d};
        const char* names[4] = {"c", "Z", "alpha", "d"};
        for (int i = 0; i < 4; ++i) {
            worst = std::max(worst, ratios[i]);
            if (!(ratios[i] <= 2.0)) {
                o.pass = false;
                o.detail += fmt(" %s %s rmse/sqrtCRB=%.3f;", std::string(to_string(ms.method)).c_str(), names[i], ratios[i]);
            }
        }
    }
    const double secs = seconds_since(t0);
    if (secs >= 600.0) o.pass = false;
    o.detail += fmt(" max rmse/sqrtCRB %.3f, %.1f s", worst, secs);
    return o;
}

Outcome low_snr_ordering()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_sweep(sweep_manifest(SweepParameter::snr, {30, 1, 30}, 200), worker_count());
    const double rhk = pct(r, 0, Method::rhk), hk = pct(r, 0, Method::hk);
    const double ar = pct(r, 0, Method::ar), es = pct(r, 0, Method::esprit);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = rhk <= hk && hk <= std::min(ar, es) && rhk >= 37.0 && rhk <= 57.0 && secs < 1200.0;
    o.detail = " " + outlier_row(r, 0) + fmt(", %.1f s", secs);
    return o;
}

Outcome impedance_contrast()
{
    const auto r = run_sweep(sweep_manifest(SweepParameter::z, {1.51, 0.02, 1.53}, 200), worker_count());
    Outcome o;
    const bool lo = pct(r, 0, Method::ar) >= 1.5 * pct(r, 0, Method::rhk);
    bool hi = true;
    for (Method m : kMethods) hi = hi && pct(r, 1, m) <= 25.0;
    o.pass = lo && hi;
    o.detail = " " + outlier_row(r, 0) + " | " + outlier_row(r, 1);
    return o;
}

Outcome attenuation_clean()
{
    const auto r = run_sweep(sweep_manifest(SweepParameter::alpha, {8, 1, 20}, 200), worker_count());
    Outcome o;
    double worst = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        bool dirty = false;
        for (const auto& ms : r.points[i].methods) {
            worst = std::max(worst, ms.outlier_pct);
            dirty = dirty || ms.outlier_pct > 0.0;
        }
        if (dirty) {
            o.pass = false;
            o.detail += " " + outlier_row(r, i) + ";";
        }
    }
    o.detail += fmt(" max outlier %.1f%% over %zu points", worst, r.points.size());
    return o;
}

Outcome thickness_trend()
{
    const auto r = run_sweep(sweep_manifest(SweepParameter::d, {1, 0.5, 8}, 200), worker_count());
    Outcome o;
    // grid points 0..3 are d = 1, 1.5, 2, 2.5
    for (Method m : kMethods)
        for (std::size_t i = 0; i < 3; ++i)
            if (!(pct(r, i + 1, m) < pct(r, i, m))) {
                o.pass = false;
                o.detail += fmt(" %s not decreasing at d=%g;", std::string(to_string(m)).c_str(), r.points[i + 1].value);
            }
    if (pct(r, 3, Method::hk) != 0.0 || pct(r, 3, Method::rhk) != 0.0) o.pass = false;
    if (pct(r, 3, Method::ar) > 15.0) o.pass = false;
    for (std::size_t i = 0; i < 4; ++i) o.detail += " " + outlier_row(r, i) + ";";
    return o;
}

Outcome bandwidth_trend()
{
    const auto r = run_sweep(sweep_manifest(SweepParameter::bandwidth, {-4, -2, -20}, 200, 500), worker_count());
    Outcome o;
    const auto& ref = r.points[0].sqrt_crb;
    if (!ref) return {false, " CRB unavailable"};
    for (const auto& pt : r.points) {
        if (!pt.sqrt_crb || pt.sqrt_crb->c != ref->c || pt.sqrt_crb->z != ref->z || pt.sqrt_crb->alpha != ref->alpha ||
            pt.sqrt_crb->d != ref->d) {
            o.pass = false;
            o.detail += fmt(" CRB changes at %g dB;", pt.value);
        }
    }
    std::size_t i12 = r.points.size();
    for (std::size_t i = 0; i < r.points.size(); ++i)
        if (r.points[i].value == -12.0) i12 = i;
    if (i12 == r.points.size()) return {false, " -12 dB point missing"};
    const char* names[4] = {"c", "Z", "alpha", "d"};
    auto gaps = [&](const MethodStats& ms) {
        std::array<double, 4> g{};
        const double b[4] = {ref->c, ref->z, ref->alpha, ref->d};
        const std::optional<double> e[4] = {ms.rmse_c, ms.rmse_z, ms.rmse_alpha, ms.rmse_d};
        for (int k = 0; k < 4; ++k) g[k] = e[k] ? *e[k] - b[k] : std::numeric_limits<double>::infinity();
        return g;
    };
    for (Method m : kMethods) {
        const auto g4 = gaps(*r.find(0, m));
        const auto g12 = gaps(*r.find(i12, m));
        for (int k = 0; k < 4; ++k)
            if (!(g4[k] > g12[k])) {
                o.pass = false;
                o.detail += fmt(" %s %s gap(-4)=%.4g <= gap(-12)=%.4g;", std::string(to_string(m)).c_str(), names[k],
                                g4[k], g12[k]);
            }
    }
    o.detail += " " + outlier_row(r, 0) + " | " + outlier_row(r, i12);
    return o;
}

// ---------------------------------------------------------------------------
// Property suite

SpectralTheta random_theta(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> amp(0.2, 1.5), ph(-3.0, 3.0), gam(-12.0, 2.0);
    SpectralTheta th;
    th.k_min = 7;
    th.k_max = 23;
    th.fft_length = 300;
    th.sigma2 = 1e-3;
    std::uniform_real_distribution<double> nu1(30.0, 90.0), nu2(-20.0, 20.0);
    th.components = {{amp(rng), ph(rng), gam(rng), nu1(rng)}, {amp(rng), ph(rng), gam(rng), nu2(rng)}};
    return th;
}

// Real residual vector [Re g; Im g] for central differences.
RVector stacked(const CVector& g)
{
    RVector v(2 * g.size());
    v << g.real(), g.imag();
    return v;
}

Outcome property_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) {
            o.pass = false;
            o.detail += " " + what + ";";
        }
    };
    std::mt19937_64 rng(20240611);

    // FIM by finite differences of the model.
    double fim_err = 0.0, fact_err = 0.0;
    for (int t = 0; t < 20; ++t) {
        const SpectralTheta th = random_theta(rng);
        const RVector v = th.to_vector();
        RMatrix J(2 * th.samples(), v.size());
        for (Index j = 0; j < v.size(); ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(v(j)));
            RVector vp = v, vm = v;
            vp(j) += h;
            vm(j) -= h;
            J.col(j) = (stacked(model_values(SpectralTheta::from_vector(vp, th))) -
                        stacked(model_values(SpectralTheta::from_vector(vm, th)))) / (2.0 * h);
        }
        const RMatrix F_fd = (2.0 / th.sigma2) * J.transpose() * J;
        const RMatrix F = fim(th);
        fim_err = std::max(fim_err, (F - F_fd).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff());
        const RMatrix Finv = inverse_fim(th).inverse;
        const RMatrix Ffac = inverse_fim_factored(th);
        fact_err = std::max(fact_err, (Finv - Ffac).cwiseAbs().maxCoeff() / Finv.cwiseAbs().maxCoeff());
    }
    check(fim_err < 1e-5, fmt("FIM finite-difference error %.2e", fim_err));
    check(fact_err < 1e-9, fmt("factored FIM identity error %.2e", fact_err));

    // CRB scales with sigma^2.
    {
        const ExperimentManifest m;
        const RFTrace h0 = m.pulse.make();
        const auto model = acoustic_to_spectral(m.defaults, m.medium, m.pulse.fs);
        const Band band = resolve_band(h0, m.band_db);
        const auto a = crb_acoustic(make_theta(model, band, h0.size(), 1e-4), m.medium, m.pulse.fs);
        const auto b = crb_acoustic(make_theta(model, band, h0.size(), 3.7e-4), m.medium, m.pulse.fs);
        double e = 0.0;
        for (auto [x, y] : {std::pair{a.crb_c, b.crb_c}, {a.crb_z, b.crb_z}, {a.crb_alpha, b.crb_alpha}, {a.crb_d, b.crb_d}})
            e = std::max(e, std::abs(y / x / 3.7 - 1.0));
        check(e < 1e-12, fmt("CRB sigma^2 scaling error %.2e", e));

        // Acoustic Jacobian against finite differences of the closed-form maps.
        const SpectralTheta th = make_theta(model, band, h0.size(), 1e-4);
        const RMatrix D = acoustic_jacobian(th, m.medium, m.pulse.fs);
        const RVector v = th.to_vector();
        double jac_err = 0.0;
        for (Index j = 0; j < v.size(); ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(v(j)));
            RVector vp = v, vm = v;
            vp(j) += h;
            vm(j) -= h;
            const Eigen::Vector4d fd = (acoustic_phi(SpectralTheta::from_vector(vp, th), m.medium, m.pulse.fs) -
                                        acoustic_phi(SpectralTheta::from_vector(vm, th), m.medium, m.pulse.fs)) / (2.0 * h);
            for (int i = 0; i < 4; ++i) {
                const double scale = std::max(D.col(i).cwiseAbs().maxCoeff(), 1e-300);
                jac_err = std::max(jac_err, std::abs(fd(i) - D(j, i)) / scale);
            }
        }
        check(jac_err < 1e-5, fmt("acoustic Jacobian error %.2e", jac_err));
    }

    // Hankel helpers and Cadzow.
    {
        const Index N = 8, len = 2 * N + 1;
        const Complex z1 = std::polar(0.97, 0.8), z2 = std::polar(0.9, -0.4);
        NormalizedSpectrum x;
        x.k_min = 5;
        x.k_max = 5 + len - 1;
        x.fft_length = 300;
        x.fs = 10e9;
        x.values.resize(len);
        for (Index k = 0; k < len; ++k)
            x.values(k) = Complex{1.2, 0.3} * std::pow(z1, double(k)) + Complex{-0.4, 0.9} * std::pow(z2, double(k));
        const double pair_err = (antidiag_avg(hankel(x.values)) - x.values).norm() / x.values.norm();
        check(pair_err < 1e-15, fmt("hankel/antidiag pair error %.2e", pair_err));
        const double cad_err = (cadzow(x, 2, 5).values - x.values).norm() / x.values.norm();
        check(cad_err < 1e-10, fmt("Cadzow idempotence error %.2e", cad_err));

        // ADMM iterates on noisy data.
        std::normal_distribution<double> nd(0.0, 0.05);
        CVector xn = x.values;
        for (Index k = 0; k < len; ++k) xn(k) += Complex{nd(rng), nd(rng)};
        AdmmConfig cfg;
        cfg.iterations = 60;
        double rank_ratio = 0.0, stat = 0.0;
        const RVector w = RVector::Ones(len);
        admm_solve(xn, 2, cfg, [&](const AdmmIterate& it) {
            const RVector s = singular_values(it.h);
            rank_ratio = std::max(rank_ratio, s(2) / s(0));
            const CVector grad = admm_g_gradient(xn, w, cfg.rho, it.h, it.lambda, it.g);
            stat = std::max(stat, grad.norm() / std::max(1.0, xn.norm()));
        });
        check(rank_ratio < 1e-12, fmt("ADMM rank ratio %.2e", rank_ratio));
        check(stat < 1e-10, fmt("ADMM g-stationarity %.2e", stat));

        // RHK with one outer round is HK.
        ReweightConfig rw;
        rw.outer_iters = 1;
        NormalizedSpectrum noisy = x;
        noisy.values = xn;
        const auto a = estimate_hk(noisy, 2);
        const auto b = estimate_rhk(noisy, 2, {}, rw);
        bool same = a.z.size() == b.z.size();
        for (std::size_t p = 0; same && p < a.z.size(); ++p) same = a.z[p] == b.z[p] && a.a[p] == b.a[p];
        check(same, "rhk(outer=1) differs from hk");
    }

    // ESPRIT and Prony exactness on random noiseless draws.
    {
        std::uniform_real_distribution<double> r(0.85, 1.05), ang(-3.0, 3.0), amp(0.3, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            Complex z1, z2;
            do {
                z1 = std::polar(r(rng), ang(rng));
                z2 = std::polar(r(rng), ang(rng));
            } while (std::abs(z1 - z2) < 0.2);
            const Complex a1 = std::polar(amp(rng), ang(rng)), a2 = std::polar(amp(rng), ang(rng));
            NormalizedSpectrum x;
            x.k_min = 7;
            x.k_max = 23;
            x.fft_length = 300;
            x.fs = 10e9;
            x.values.resize(17);
            for (Index n = 0; n < 17; ++n) {
                const double k = double(7 + n);
                x.values(n) = a1 * std::pow(z1, k) + a2 * std::pow(z2, k);
            }
            for (Method m : {Method::esprit, Method::ar}) {
                const auto e = estimate(m, x, 2);
                if (!e.ok()) {
                    worst = 1.0;
                    continue;
                }
                const std::size_t i1 = std::abs(e.z[0] - z1) < std::abs(e.z[1] - z1) ? 0 : 1;
                worst = std::max({worst, std::abs(e.z[i1] - z1), std::abs(e.z[1 - i1] - z2),
                                  std::abs(e.a[i1] - a1) / std::abs(a1), std::abs(e.a[1 - i1] - a2) / std::abs(a2)});
            }
        }
        check(worst < 1e-8, fmt("ESPRIT/Prony exactness error %.2e", worst));
    }

    // Tukey weights.
    {
        const double d = 0.7, c = 4.685;
        check(tukey_weight(0.0, d, c) == 1.0, "tukey w(0) != 1");
        check(tukey_weight(c * d, d, c) == 0.0, "tukey w(c delta) != 0");
        check(std::abs(tukey_weight(c * d / std::sqrt(2.0), d, c) - 0.25) < 1e-12, "tukey w(c delta/sqrt2) != 0.25");
    }

    // Determinism of a seeded sweep.
    {
        auto m = sweep_manifest(SweepParameter::snr, {30, 10, 40}, 5, 20);
        const std::string a = sweep_csv(run_sweep(m, 1));
        const std::string b = sweep_csv(run_sweep(m, worker_count()));
        check(a == b, "seeded sweep CSV not byte-identical");
    }

    const double secs = seconds_since(t0);
    check(secs < 120.0, fmt("runtime %.1f s", secs));
    o.detail += fmt(" FIM fd %.1e, factored %.1e, %.1f s", fim_err, fact_err, secs);
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"noiseless end-to-end exactness", noiseless_exactness},
        {"high-SNR CRB attainment", crb_attainment},
        {"low-SNR outlier ordering", low_snr_ordering},
        {"impedance-contrast robustness", impedance_contrast},
        {"attenuation sweep cleanliness", attenuation_clean},
        {"thickness trend", thickness_trend},
        {"bandwidth trend", bandwidth_trend},
        {"property suite", property_suite},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

    int failures = 0;
    for (int id : selected) {
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        const auto& [name, run] = criteria[static_cast<std::size_t>(id - 1)];
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string(" exception: ") + e.what()};
        }
        std::printf("criterion %d (%s): %s -%s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
