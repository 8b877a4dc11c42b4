#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "shellscatter/errors.hpp"
#include "shellscatter/piece.hpp"
#include "shellscatter/units.hpp"

namespace shellscatter {

struct CoefficientOptions {
    /// |E| or |E - V0| below this raises DegenerateEnergy.
    double degenerate_threshold = 1e-12;
    /// Inside |E - V0| < limit_window the shell piece is propagated with the
    /// kappa -> 0 regular form (cos, sin/kappa) instead of k/kappa amplitudes.
    double limit_window = 1e-8;
    /// When |Im kappa| (b - a) exceeds this, all piece amplitudes are stored
    /// multiplied by exp(-log_scale) to keep them finite.
    double overflow_guard = 300.0;
};

/// Matching coefficients of the regular solution (J), the irregular solutions
/// f+ and f- (Aplus, Aminus) and the cosine-like solution (C) at one energy,
/// with the Jost functions and W = J4 C3 - J3 C4.
///
/// The named coefficients refer to exponentials centred at the origin, as in
///   chi(r) = J3 e^{ikr} + J4 e^{-ikr}  for r > b.
/// The four `*_pieces` arrays hold the same solutions with each segment
/// referenced to a local radius; these are what the wave evaluators use. They
/// are scaled by exp(-log_scale), which is zero except for very opaque shells.
struct CoefficientSet {
    cplx J1{}, J2{}, J3{}, J4{};
    cplx Aplus1{}, Aplus2{}, Aplus3{}, Aplus4{};
    cplx Aminus1{}, Aminus2{}, Aminus3{}, Aminus4{};
    cplx C1{}, C2{}, C3{}, C4{};
    cplx jost_plus{}, jost_minus{};
    cplx W{};
    ComplexEnergy at_energy{0.0};

    cplx k{};
    cplx kappa{};
    bool limit_rule = false;
    bool free = false;
    double log_scale = 0.0;

    std::array<WavePiece, 3> regular_pieces{};
    std::array<WavePiece, 3> sigma2_pieces{};
    std::array<WavePiece, 3> fplus_pieces{};
    std::array<WavePiece, 3> fminus_pieces{};

    /// J3, J4 multiplied by exp(-log_scale); their ratio gives S and chi+-.
    cplx J3_scaled{}, J4_scaled{};

    cplx jost_plus_scaled() const { return -2.0 * I * J4_scaled; }
    cplx jost_minus_scaled() const { return 2.0 * I * J3_scaled; }

    /// S = J- / J+ = -J3 / J4.
    cplx s_matrix() const { return jost_minus_scaled() / jost_plus_scaled(); }
};

namespace detail {

inline WavePiece middle_piece(cplx q, double r_ref, CauchyData d, bool limit_rule) {
    return limit_rule ? WavePiece::cauchy(q, r_ref, d) : WavePiece::split(q, r_ref, d);
}

/// Regular-at-origin family (chi with sin, sigma2 with cos): start at r = a.
inline std::array<WavePiece, 3> outward_family(const PotentialConfig& cfg, cplx k, cplx kap,
                                               CauchyData origin, CauchyData at_a,
                                               bool limit_rule, cplx scale) {
    at_a.value *= scale;
    at_a.slope *= scale;
    std::array<WavePiece, 3> p;
    p[0] = WavePiece::cauchy(k, 0.0, {origin.value * scale, origin.slope * scale});
    p[1] = middle_piece(kap, cfg.a, at_a, limit_rule);
    const CauchyData at_b = p[1].cauchy_at(cfg.b);
    p[2] = WavePiece::split(k, cfg.b, at_b);
    return p;
}

/// Irregular family f+- = e^{+-ikr} beyond b, continued inward.
inline std::array<WavePiece, 3> inward_family(const PotentialConfig& cfg, cplx k, cplx kap,
                                              int sign, bool limit_rule, cplx scale) {
    const cplx eb = std::exp(static_cast<double>(sign) * I * k * cfg.b) * scale;
    std::array<WavePiece, 3> p;
    p[2] = sign > 0 ? WavePiece::exponential(k, cfg.b, eb, 0.0)
                    : WavePiece::exponential(k, cfg.b, 0.0, eb);
    const CauchyData at_b{eb, static_cast<double>(sign) * I * k * eb};
    p[1] = middle_piece(kap, cfg.b, at_b, limit_rule);
    const CauchyData at_a = p[1].cauchy_at(cfg.a);
    p[0] = WavePiece::split(k, cfg.a, at_a);
    return p;
}

/// Origin-centred amplitudes (coefficient of e^{+iqr}, e^{-iqr}) of a piece.
inline std::pair<cplx, cplx> centred_amplitudes(const WavePiece& p) {
    if (p.form == WavePiece::Form::exponential)
        return {p.c1 * std::exp(-I * p.q * p.r_ref), p.c2 * std::exp(I * p.q * p.r_ref)};
    const WavePiece e = WavePiece::split(p.q, p.r_ref, {p.c1, p.c2});
    return centred_amplitudes(e);
}

} // namespace detail

/// Evaluates every matching coefficient at complex energy E.
///
/// The shell piece is matched to sin(kr) (resp. cos(kr)) at r = a and the
/// outer exponentials are matched at r = b; f+- are matched from outside in.
/// Each matching step is the closed form
///   alpha = (u + u'/(iq)) / 2,   beta = (u - u'/(iq)) / 2,
/// so for instance J1 = e^{-i kappa a} (sin(ka) + (k / i kappa) cos(ka)) / 2.
inline CoefficientSet compute_coefficients(ComplexEnergy E, const PotentialConfig& cfg,
                                           const CoefficientOptions& opt = {}) {
    cfg.validate();
    if (!std::isfinite(E.real()) || !std::isfinite(E.imag()))
        throw DegenerateEnergy("energy must be finite");
    if (std::abs(E.value) < opt.degenerate_threshold)
        throw DegenerateEnergy("energy too close to 0: k appears in a denominator");
    if (cfg.V0 != 0.0 && std::abs(E.value - cfg.V0) < opt.degenerate_threshold)
        throw DegenerateEnergy("energy too close to V0: kappa appears in a denominator");

    CoefficientSet cs;
    cs.at_energy = E;
    cs.k = wave_number(E, cfg);
    cs.kappa = kappa(E, cfg);
    const cplx k = cs.k;
    const cplx kap = cs.kappa;

    if (cfg.V0 == 0.0) {
        // No potential: every solution is a single free expression on all of (0, inf).
        cs.free = true;
        for (int i = 0; i < 3; ++i) {
            cs.regular_pieces[i] = WavePiece::cauchy(k, 0.0, {0.0, k});
            cs.sigma2_pieces[i] = WavePiece::cauchy(k, 0.0, {1.0, 0.0});
            cs.fplus_pieces[i] = WavePiece::exponential(k, 0.0, 1.0, 0.0);
            cs.fminus_pieces[i] = WavePiece::exponential(k, 0.0, 0.0, 1.0);
        }
        cs.J1 = cs.J3 = -0.5 * I;
        cs.J2 = cs.J4 = 0.5 * I;
        cs.C1 = cs.C2 = cs.C3 = cs.C4 = 0.5;
        cs.Aplus1 = cs.Aplus3 = 1.0;
        cs.Aplus2 = cs.Aplus4 = 0.0;
        cs.Aminus1 = cs.Aminus3 = 0.0;
        cs.Aminus2 = cs.Aminus4 = 1.0;
        cs.J3_scaled = cs.J3;
        cs.J4_scaled = cs.J4;
        cs.jost_plus = cs.jost_minus = 1.0;
        cs.W = cs.J4 * cs.C3 - cs.J3 * cs.C4;
        return cs;
    }

    cs.limit_rule = std::abs(E.value - cfg.V0) < opt.limit_window;
    const double barrier = std::abs(kap.imag()) * (cfg.b - cfg.a);
    cs.log_scale = barrier > opt.overflow_guard ? barrier : 0.0;
    const cplx scale = std::exp(-cs.log_scale);

    const cplx ska = std::sin(k * cfg.a), cka = std::cos(k * cfg.a);
    cs.regular_pieces = detail::outward_family(cfg, k, kap, {0.0, k}, {ska, k * cka},
                                               cs.limit_rule, scale);
    cs.sigma2_pieces = detail::outward_family(cfg, k, kap, {1.0, 0.0}, {cka, -k * ska},
                                              cs.limit_rule, scale);
    cs.fplus_pieces = detail::inward_family(cfg, k, kap, +1, cs.limit_rule, scale);
    cs.fminus_pieces = detail::inward_family(cfg, k, kap, -1, cs.limit_rule, scale);

    const cplx unscale = std::exp(cs.log_scale);
    auto centred = [&](const WavePiece& p) {
        auto [x, y] = detail::centred_amplitudes(p);
        return std::pair<cplx, cplx>{x * unscale, y * unscale};
    };
    std::tie(cs.J1, cs.J2) = centred(cs.regular_pieces[1]);
    std::tie(cs.J3_scaled, cs.J4_scaled) = detail::centred_amplitudes(cs.regular_pieces[2]);
    cs.J3 = cs.J3_scaled * unscale;
    cs.J4 = cs.J4_scaled * unscale;
    std::tie(cs.C1, cs.C2) = centred(cs.sigma2_pieces[1]);
    std::tie(cs.C3, cs.C4) = centred(cs.sigma2_pieces[2]);
    std::tie(cs.Aplus1, cs.Aplus2) = centred(cs.fplus_pieces[0]);
    std::tie(cs.Aplus3, cs.Aplus4) = centred(cs.fplus_pieces[1]);
    std::tie(cs.Aminus1, cs.Aminus2) = centred(cs.fminus_pieces[0]);
    std::tie(cs.Aminus3, cs.Aminus4) = centred(cs.fminus_pieces[1]);

    cs.jost_plus = -2.0 * I * cs.J4;
    cs.jost_minus = 2.0 * I * cs.J3;
    cs.W = cs.J4 * cs.C3 - cs.J3 * cs.C4;
    return cs;
}

inline void require_positive_energy(double E, const CoefficientOptions& opt = {}) {
    if (!(E > opt.degenerate_threshold))
        throw DegenerateEnergy("physical spectrum requires E > 0");
}

/// S(E) = J-(E) / J+(E) on the positive real axis.
inline cplx s_matrix(double E, const PotentialConfig& cfg, const CoefficientOptions& opt = {}) {
    require_positive_energy(E, opt);
    return compute_coefficients(E, cfg, opt).s_matrix();
}

/// Phase shift delta = arg(S) / 2 in (-pi/2, pi/2].
inline double phase_shift(double E, const PotentialConfig& cfg, const CoefficientOptions& opt = {}) {
    return 0.5 * std::arg(s_matrix(E, cfg, opt));
}

/// Phase shifts along an increasing grid, unwrapped so that consecutive values
/// never jump by more than pi/2. The first value is the principal one.
inline std::vector<double> phase_shift_grid(std::span<const double> energies, const PotentialConfig& cfg,
                                            const CoefficientOptions& opt = {}) {
    std::vector<double> out;
    out.reserve(energies.size());
    cplx prev{};
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const cplx S = s_matrix(energies[i], cfg, opt);
        if (i == 0) {
            out.push_back(0.5 * std::arg(S));
        } else {
            out.push_back(out.back() + 0.5 * std::arg(S / prev));
        }
        prev = S;
    }
    return out;
}

} // namespace shellscatter
