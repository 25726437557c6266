#ifndef QAM_TYPES_HPP
#define QAM_TYPES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qam
{

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index   = Eigen::Index;

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Nepers to decibels.
inline constexpr double kNeperToDb = 8.6859;

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (precondition violation).
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Numerical failure inside an iterative solver.
class SolverError : public Error
{
public:
    SolverError(const std::string& what, int iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration)
    {
    }

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Malformed or inconsistent scan/manifest files.
class IoError : public Error
{
public:
    using Error::Error;
};

/// Reasons an estimate can be unusable. Estimation failures are reported in
/// the result, never thrown, so that map and sweep jobs keep going.
enum class Failure
{
    none,
    empty_signal,
    rank_deficient,     // (U^l)^+ ill-conditioned
    coincident_poles,   // z_p not distinct
    ill_conditioned,    // Vandermonde LS system
    too_few_components, // fewer than two usable pulses
    non_finite,
    solver_error,
    out_of_range,       // (c, Z) outside the admissible intervals
};

inline std::string_view to_string(Failure f)
{
    switch (f) {
    case Failure::none: return "none";
    case Failure::empty_signal: return "empty_signal";
    case Failure::rank_deficient: return "rank_deficient";
    case Failure::coincident_poles: return "coincident_poles";
    case Failure::ill_conditioned: return "ill_conditioned";
    case Failure::too_few_components: return "too_few_components";
    case Failure::non_finite: return "non_finite";
    case Failure::solver_error: return "solver_error";
    case Failure::out_of_range: return "out_of_range";
    }
    return "unknown";
}

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline bool all_finite(const CVector& v)
{
    return v.allFinite();
}

template <typename T>
inline bool all_finite(const std::vector<T>& v)
{
    for (const auto& e : v) {
        if constexpr (std::is_same_v<T, Complex>) {
            if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
        } else {
            if (!std::isfinite(e)) return false;
        }
    }
    return true;
}

} // namespace qam

#endif // QAM_TYPES_HPP
