// Simulates one pixel at the default tissue parameters and estimates it with
// every method, next to the Cramer-Rao bound.
#include <qam/qam.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv)
{
    using namespace qam;
    const double snr_db = argc > 1 ? std::atof(argv[1]) : 50.0;

    const PulseConfig pulse;
    const RFTrace h0 = pulse.make();
    const GroundTruth truth;
    const MediumConstants medium;
    const ExponentialModel model = acoustic_to_spectral(truth, medium, pulse.fs);
    const RFTrace h = simulate_trace(model, h0, snr_db, 7);

    PipelineConfig cfg;
    const PreparedReference ref(h0, cfg.band_db);
    std::printf("band k=%ld..%ld, SNR %.1f dB\n", static_cast<long>(ref.band.k_min), static_cast<long>(ref.band.k_max),
                snr_db);
    std::printf("%-7s %10s %8s %10s %8s\n", "", "c", "Z", "alpha", "d");
    std::printf("%-7s %10.2f %8.4f %10.3f %8.4f\n", "truth", truth.c, truth.z, truth.alpha, truth.d);
    for (Method m : {Method::hk, Method::rhk, Method::ar, Method::esprit}) {
        cfg.method = m;
        const AcousticEstimate e = process_trace(h, ref, cfg);
        std::printf("%-7s %10.2f %8.4f %10.3f %8.4f%s\n", std::string(to_string(m)).c_str(), e.c, e.z, e.alpha, e.d,
                    e.outlier ? "  outlier" : "");
    }

    const double sigma2 = approx_sigma2(model, h0, snr_db, ref.band, 200, 11);
    if (sigma2 > 0.0) {
        const CrbReport crb = crb_acoustic(make_theta(model, ref.band, h0.size(), sigma2), medium, pulse.fs);
        std::printf("%-7s %10.2f %8.4f %10.3f %8.4f\n", "sqrtCRB", std::sqrt(crb.crb_c), std::sqrt(crb.crb_z),
                    std::sqrt(crb.crb_alpha), std::sqrt(crb.crb_d));
    }
    return 0;
}
