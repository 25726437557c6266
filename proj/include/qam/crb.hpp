#ifndef QAM_CRB_HPP
#define QAM_CRB_HPP

#include <array>
#include <limits>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qam/acoustics.hpp"
#include "qam/signal_forward.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/types.hpp"

namespace qam
{

inline constexpr double kFimConditionLimit = 1e14;

/// Raised when the Fisher information is numerically singular.
class SingularFimError : public Error
{
public:
    explicit SingularFimError(double condition)
        : Error("Fisher information matrix is singular (condition " + std::to_string(condition) + ")"),
          condition_(condition)
    {
    }
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Spectral parameters theta = (A_1..A_P, b_1..b_P, gamma_1..gamma_P,
/// nu_1..nu_P) on the band grid kappa_n = k_n / L, plus the noise level.
struct SpectralTheta
{
    std::vector<ExponentialComponent> components;
    Index k_min = 0;
    Index k_max = -1;
    Index fft_length = 0;
    double sigma2 = 0.0;

    Index order() const noexcept { return static_cast<Index>(components.size()); }
    Index samples() const noexcept { return k_max - k_min + 1; }
    double kappa(Index n) const noexcept
    {
        return static_cast<double>(k_min + n) / static_cast<double>(fft_length);
    }

    RVector to_vector() const
    {
        const Index P = order();
        RVector t(4 * P);
        for (Index p = 0; p < P; ++p) {
            const auto& c = components[static_cast<std::size_t>(p)];
            t(p) = c.amplitude;
            t(P + p) = c.phase;
            t(2 * P + p) = c.gamma;
            t(3 * P + p) = c.nu;
        }
        return t;
    }

    static SpectralTheta from_vector(const RVector& t, const SpectralTheta& grid)
    {
        SpectralTheta out = grid;
        const Index P = t.size() / 4;
        out.components.assign(static_cast<std::size_t>(P), {});
        for (Index p = 0; p < P; ++p) {
            auto& c = out.components[static_cast<std::size_t>(p)];
            c.amplitude = t(p);
            c.phase = t(P + p);
            c.gamma = t(2 * P + p);
            c.nu = t(3 * P + p);
        }
        return out;
    }

    void validate() const
    {
        if (order() < 1) throw ConfigError("SpectralTheta: order must be >= 1");
        if (fft_length < 1 || k_min < 0 || samples() < 1) throw ConfigError("SpectralTheta: invalid band grid");
        if (samples() < 4 * order()) throw ConfigError("SpectralTheta: band too short to identify 4P parameters");
        for (const auto& c : components)
            if (!(c.amplitude > 0.0)) throw ConfigError("SpectralTheta: amplitudes must be positive");
    }
};

inline SpectralTheta make_theta(const ExponentialModel& m, const Band& band, Index fft_length, double sigma2)
{
    SpectralTheta t;
    t.components = m.components;
    t.k_min = band.k_min;
    t.k_max = band.k_max;
    t.fft_length = fft_length;
    t.sigma2 = sigma2;
    return t;
}

/// Noise-free model g_n = sum_p a_p exp(2 pi (gamma_p + i nu_p) kappa_n).
inline CVector model_values(const SpectralTheta& th)
{
    CVector g = CVector::Zero(th.samples());
    for (Index n = 0; n < g.size(); ++n)
        for (const auto& c : th.components) g(n) += c.complex_amplitude() * std::exp(Complex{c.gamma, c.nu} * (kTwoPi * th.kappa(n)));
    return g;
}

/// dg/dtheta, one column per parameter in (A, b, gamma, nu) block order:
///   dg/dA_p = e^{ib_p} lambda_p^kappa,     dg/db_p  = i a_p lambda_p^kappa,
///   dg/dgamma_p = 2 pi kappa a_p lambda_p^kappa, dg/dnu_p = i 2 pi kappa a_p lambda_p^kappa.
inline CMatrix model_jacobian(const SpectralTheta& th)
{
    const Index P = th.order();
    const Index n_rows = th.samples();
    CMatrix J(n_rows, 4 * P);
    const Complex I{0.0, 1.0};
    for (Index p = 0; p < P; ++p) {
        const auto& c = th.components[static_cast<std::size_t>(p)];
        const Complex a = c.complex_amplitude();
        const Complex e_ib = std::polar(1.0, c.phase);
        for (Index n = 0; n < n_rows; ++n) {
            const double kappa = th.kappa(n);
            const Complex lam = std::exp(Complex{c.gamma, c.nu} * (kTwoPi * kappa));
            J(n, p) = e_ib * lam;
            J(n, P + p) = I * a * lam;
            J(n, 2 * P + p) = kTwoPi * kappa * a * lam;
            J(n, 3 * P + p) = I * kTwoPi * kappa * a * lam;
        }
    }
    return J;
}

/// Slepian-Bang Fisher information F = (2 / sigma^2) Re(J^H J).
inline RMatrix fim(const SpectralTheta& th)
{
    th.validate();
    if (!(th.sigma2 > 0.0)) throw ConfigError("fim: sigma2 must be positive");
    const CMatrix J = model_jacobian(th);
    return (2.0 / th.sigma2) * (J.adjoint() * J).real();
}

/// Q = [E B, i E B, 2 pi Etilde B, i 2 pi Etilde B] with J = Q P,
/// P = diag[I, A, A, A].
inline CMatrix factored_q(const SpectralTheta& th)
{
    const Index P = th.order();
    const Index n_rows = th.samples();
    CMatrix Q(n_rows, 4 * P);
    const Complex I{0.0, 1.0};
    for (Index p = 0; p < P; ++p) {
        const auto& c = th.components[static_cast<std::size_t>(p)];
        const Complex b = std::polar(1.0, c.phase);
        for (Index n = 0; n < n_rows; ++n) {
            const double kappa = th.kappa(n);
            const Complex eb = std::exp(Complex{c.gamma, c.nu} * (kTwoPi * kappa)) * b;
            Q(n, p) = eb;
            Q(n, P + p) = I * eb;
            Q(n, 2 * P + p) = kTwoPi * kappa * eb;
            Q(n, 3 * P + p) = I * kTwoPi * kappa * eb;
        }
    }
    return Q;
}

struct SymmetricInverse
{
    RMatrix inverse;
    double condition = 0.0;
};

inline SymmetricInverse invert_spd(const RMatrix& F)
{
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(F);
    const RVector& ev = eig.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.cwiseAbs().maxCoeff();
    SymmetricInverse out;
    out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(out.condition <= kFimConditionLimit)) throw SingularFimError(out.condition);
    out.inverse = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return out;
}

/// F^{-1} = (sigma^2 / 2) P^{-1} Re(Q^H Q)^{-1} P^{-1}.
inline RMatrix inverse_fim_factored(const SpectralTheta& th)
{
    th.validate();
    if (!(th.sigma2 > 0.0)) throw ConfigError("inverse_fim_factored: sigma2 must be positive");
    const CMatrix Q = factored_q(th);
    const RMatrix G = (Q.adjoint() * Q).real();
    const Index P = th.order();
    RVector pinv(4 * P);
    for (Index p = 0; p < P; ++p) {
        const double A = th.components[static_cast<std::size_t>(p)].amplitude;
        pinv(p) = 1.0;
        pinv(P + p) = pinv(2 * P + p) = pinv(3 * P + p) = 1.0 / A;
    }
    const RMatrix Ginv = invert_spd(G).inverse;
    return 0.5 * th.sigma2 * pinv.asDiagonal() * Ginv * pinv.asDiagonal();
}

inline SymmetricInverse inverse_fim(const SpectralTheta& th)
{
    return invert_spd(fim(th));
}

/// CRB(theta_i) = [F^{-1}]_ii.
inline RVector crb_spectral(const SpectralTheta& th)
{
    return inverse_fim(th).inverse.diagonal();
}

/// phi = (c [m/s], d [um], alpha [dB/MHz/cm], Z [MRayl]) of theta, components
/// 0 and 1 in interface order.
inline Eigen::Vector4d acoustic_phi(const SpectralTheta& th, const MediumConstants& mc, double fs)
{
    if (th.order() < 2) throw ConfigError("acoustic_phi: need two components");
    const auto& c1 = th.components[0];
    const auto& c2 = th.components[1];
    const auto ae = acoustic_from_parameters(c1.amplitude * std::cos(c1.phase), c2.gamma, c1.nu, c2.nu, mc, fs);
    return {ae.c, ae.d, ae.alpha, ae.z};
}

/// Jacobian of phi with respect to theta, 4P x 4 (one column per phi_i).
inline RMatrix acoustic_jacobian(const SpectralTheta& th, const MediumConstants& mc, double fs)
{
    const Index P = th.order();
    if (P < 2) throw ConfigError("acoustic_jacobian: need two components");
    const auto& c1 = th.components[0];
    const auto& c2 = th.components[1];
    const double nu1 = c1.nu, nu2 = c2.nu, g2 = c2.gamma;
    if (nu1 == nu2 || nu1 == 0.0) throw ConfigError("acoustic_jacobian: singular transformation (nu1 == nu2 or nu1 == 0)");
    const double u = c1.amplitude * std::cos(c1.phase) / mc.r_wg;
    if (u >= 1.0) throw ConfigError("acoustic_jacobian: A1 >= R_wg (impedance pole)");

    const double dnu  = nu1 - nu2;
    const double k_um = 1e6;
    const double k_a  = units::alpha_from_si(1.0);
    const double dz_du = 2.0 * mc.z_w / ((1.0 - u) * (1.0 - u));

    const Index iA1 = 0, ib1 = P, ig2 = 2 * P + 1, in1 = 3 * P, in2 = 3 * P + 1;
    RMatrix D = RMatrix::Zero(4 * P, 4);
    // c
    D(in1, 0) = -mc.c_w * nu2 / (dnu * dnu);
    D(in2, 0) = mc.c_w * nu1 / (dnu * dnu);
    // d
    D(in1, 1) = k_um * mc.c_w / (2.0 * fs);
    // alpha
    D(ig2, 2) = -k_a / (mc.c_w * nu1);
    D(in1, 2) = k_a * g2 / (mc.c_w * nu1 * nu1);
    // Z through Re(a_1) = A_1 cos b_1
    D(iA1, 3) = dz_du * std::cos(c1.phase) / mc.r_wg;
    D(ib1, 3) = -dz_du * c1.amplitude * std::sin(c1.phase) / mc.r_wg;
    return D;
}

struct CrbReport
{
    RVector crb_theta;      ///< diagonal of F^{-1}
    double crb_c     = 0.0; ///< (m/s)^2
    double crb_d     = 0.0; ///< um^2
    double crb_alpha = 0.0; ///< (dB/MHz/cm)^2
    double crb_z     = 0.0; ///< MRayl^2
    double fim_condition = 0.0;
};

/// Acoustic CRBs by functional invariance: diag(D^T F^{-1} D).
inline CrbReport crb_acoustic(const SpectralTheta& th, const MediumConstants& mc, double fs)
{
    if (th.order() < 2) throw ConfigError("crb_acoustic: need at least two components");
    const RMatrix D = acoustic_jacobian(th, mc, fs);
    const SymmetricInverse inv = inverse_fim(th);
    const RMatrix Fphi = D.transpose() * inv.inverse * D;
    CrbReport r;
    r.crb_theta = inv.inverse.diagonal();
    r.crb_c = Fphi(0, 0);
    r.crb_d = Fphi(1, 1);
    r.crb_alpha = Fphi(2, 2);
    r.crb_z = Fphi(3, 3);
    r.fim_condition = inv.condition;
    return r;
}

/// Equivalent white-noise variance of the normalized spectrum: mean over
/// `n_signals` simulations of the sample variance of (x_noisy - x_clean) on
/// the band.
inline double approx_sigma2(const ExponentialModel& model, const RFTrace& h0, double snr_db, const Band& band,
                            int n_signals, std::uint64_t seed, unsigned threads = 1)
{
    if (n_signals < 1) throw ConfigError("approx_sigma2: need at least one signal");
    const double sigma = noise_sigma(h0, snr_db);
    if (sigma == 0.0) return 0.0;

    const RFTrace clean = forward_trace(model, h0);
    const NormalizedSpectrum x0 = normalized_spectrum(clean, h0, band);
    std::vector<double> var(static_cast<std::size_t>(n_signals));
    parallel_for(var.size(), threads, [&](std::size_t i) {
        RFTrace h = clean;
        add_white_noise(h, sigma, mix_seed(seed, i));
        const CVector r = normalized_spectrum(h, h0, band).values - x0.values;
        const Complex mean = r.mean();
        var[i] = (r.array() - mean).abs2().mean();
    });
    double s = 0.0;
    for (double v : var) s += v;
    return s / static_cast<double>(n_signals);
}

} // namespace qam

#endif // QAM_CRB_HPP
