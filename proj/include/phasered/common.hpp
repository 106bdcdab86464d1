#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasered {

using State = std::vector<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Thrown when a numerical routine fails to converge or produces
/// nonfinite values (integration blow-up, Newton stagnation, ...).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed configuration / input files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a validation threshold is not met.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a brute-force oracle cannot be evaluated in the given
/// regime (e.g. Floquet multiplier underflow); distinct from SolverError
/// so callers can tell "unavailable" apart from "broken".
struct OracleUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double sup_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return t;
}

}  // namespace phasered
