#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "shellscatter/errors.hpp"

namespace shellscatter {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

/// Shell geometry, barrier height and unit constants.
///
/// The potential is V(r) = V0 on (a, b) and zero elsewhere. The default unit
/// convention is hbar = 1, 2m = 1, so that c2 = 2m/hbar^2 = 1 and
/// energies equal squared wave numbers.
struct PotentialConfig {
    double a = 1.0;
    double b = 2.0;
    double V0 = 4.0;
    double hbar = 1.0;
    double mass = 0.5;

    double c2() const { return 2.0 * mass / (hbar * hbar); }

    /// Potential value; at r == a or r == b the mean of both sides is returned
    /// (used by finite-difference operators that put nodes on the jumps).
    double potential(double r) const {
        if (r == a || r == b) return 0.5 * V0;
        return (r > a && r < b) ? V0 : 0.0;
    }

    /// Index of the constant piece containing r: 0 on [0,a), 1 on [a,b), 2 on [b,inf).
    int piece_index(double r) const { return r < a ? 0 : (r < b ? 1 : 2); }

    double piece_potential(int piece) const { return piece == 1 ? V0 : 0.0; }

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!(finite(a) && finite(b) && finite(V0) && finite(hbar) && finite(mass)))
            throw ConfigError("potential parameters must be finite");
        if (!(a > 0.0)) throw ConfigError("shell inner radius a must be > 0");
        if (!(b > a)) throw ConfigError("shell outer radius b must exceed a");
        if (!(V0 >= 0.0)) throw ConfigError("V0 must be >= 0");
        if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
        if (!(mass > 0.0)) throw ConfigError("mass must be > 0");
        const double c = c2();
        if (!(std::isfinite(c) && c > 0.0)) throw ConfigError("2m/hbar^2 must be finite and positive");
    }

    bool operator==(const PotentialConfig&) const = default;
};

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Stable 64-bit FNV-1a hash of the configuration's round-trip decimal text.
inline std::uint64_t config_hash(const PotentialConfig& cfg) {
    const std::string text = format_double(cfg.a) + "," + format_double(cfg.b) + "," +
                             format_double(cfg.V0) + "," + format_double(cfg.hbar) + "," +
                             format_double(cfg.mass);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string config_hash_hex(const PotentialConfig& cfg) {
    char buf[17];
    auto h = config_hash(cfg);
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

/// Complex energy with arg in (-pi, pi]; a negative real value (with either
/// sign of zero imaginary part) is on the upper lip of the cut.
struct ComplexEnergy {
    cplx value;

    ComplexEnergy(double e) : value(e, 0.0) {}
    ComplexEnergy(cplx e) : value(e) {}

    double real() const { return value.real(); }
    double imag() const { return value.imag(); }
    bool is_real() const { return value.imag() == 0.0; }

    double arg() const {
        if (value.imag() == 0.0) return value.real() < 0.0 ? pi : 0.0;
        return std::arg(value);
    }
};

/// Square root with the cut on the negative real axis, half-open so that
/// arg(z) = pi maps to arg = pi/2. Negative reals with a negative zero
/// imaginary part are treated as arg = pi as well.
inline cplx branch_sqrt(cplx z) {
    if (z.imag() == 0.0) {
        if (z.real() >= 0.0) return {std::sqrt(z.real()), 0.0};
        return {0.0, std::sqrt(-z.real())};
    }
    return std::sqrt(z);
}

/// k = sqrt(2m E / hbar^2).
inline cplx wave_number(ComplexEnergy E, const PotentialConfig& cfg) {
    return branch_sqrt(cfg.c2() * E.value);
}

/// kappa = sqrt(2m (E - V0) / hbar^2), the wave number inside the shell.
inline cplx kappa(ComplexEnergy E, const PotentialConfig& cfg) {
    return branch_sqrt(cfg.c2() * (E.value - cfg.V0));
}

} // namespace shellscatter
