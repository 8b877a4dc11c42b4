#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "shellscatter/coeffs.hpp"
#include "shellscatter/piece.hpp"
#include "shellscatter/units.hpp"

namespace shellscatter {

enum class WaveKind { regular, chi_plus, chi_minus, f_plus, f_minus, sigma2, free };
enum class Sign { plus, minus };

inline const char* to_string(WaveKind k) {
    switch (k) {
    case WaveKind::regular: return "regular";
    case WaveKind::chi_plus: return "chi_plus";
    case WaveKind::chi_minus: return "chi_minus";
    case WaveKind::f_plus: return "f_plus";
    case WaveKind::f_minus: return "f_minus";
    case WaveKind::sigma2: return "sigma2";
    case WaveKind::free: return "free";
    }
    return "unknown";
}

inline WaveKind wave_kind_from_string(const std::string& s) {
    for (auto k : {WaveKind::regular, WaveKind::chi_plus, WaveKind::chi_minus, WaveKind::f_plus,
                   WaveKind::f_minus, WaveKind::sigma2, WaveKind::free})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown wave kind: " + s);
}

/// A solution of (h - E) u = 0 as three analytic segments on (0,a), (a,b), (b,inf).
///
/// Evaluation is lazy and exact up to rounding. The stored pieces may carry a
/// common factor exp(-log_scale); `value` restores it, `scaled_value` does not.
class PiecewiseWave {
  public:
    PiecewiseWave(std::array<WavePiece, 3> pieces, WaveKind kind, ComplexEnergy E, double a, double b,
                  double log_scale = 0.0)
        : pieces_(pieces), kind_(kind), energy_(E), a_(a), b_(b), log_scale_(log_scale) {}

    int piece_index(double r) const {
        if (!(r >= 0.0)) throw std::domain_error("radius must be nonnegative");
        return r < a_ ? 0 : (r < b_ ? 1 : 2);
    }

    cplx scaled_value(double r) const { return pieces_[piece_index(r)].value(r); }
    cplx scaled_derivative(double r) const { return pieces_[piece_index(r)].derivative(r); }

    cplx value(double r) const { return restore(scaled_value(r)); }
    cplx operator()(double r) const { return value(r); }
    cplx derivative(double r) const { return restore(scaled_derivative(r)); }
    cplx second_derivative(double r) const {
        return restore(pieces_[piece_index(r)].second_derivative(r));
    }

    const WavePiece& piece(int i) const { return pieces_.at(static_cast<std::size_t>(i)); }
    const std::array<WavePiece, 3>& pieces() const { return pieces_; }
    WaveKind kind() const { return kind_; }
    ComplexEnergy energy() const { return energy_; }
    double log_scale() const { return log_scale_; }
    double a() const { return a_; }
    double b() const { return b_; }

    PiecewiseWave scaled(cplx f, WaveKind kind) const {
        std::array<WavePiece, 3> p;
        for (int i = 0; i < 3; ++i) p[i] = pieces_[i].scaled(f);
        return PiecewiseWave(p, kind, energy_, a_, b_, log_scale_);
    }

    /// Coefficients of e^{+ikr} and e^{-ikr} on r > b (origin-centred, true scale).
    std::pair<cplx, cplx> outer_amplitudes() const {
        auto [p, m] = detail::centred_amplitudes(pieces_[2]);
        return {restore(p), restore(m)};
    }

  private:
    cplx restore(cplx v) const { return log_scale_ == 0.0 ? v : v * std::exp(log_scale_); }

    std::array<WavePiece, 3> pieces_;
    WaveKind kind_;
    ComplexEnergy energy_;
    double a_, b_;
    double log_scale_;
};

/// Delta-normalisation factor N(E) = sqrt(c2 / (pi k)), k = sqrt(c2 E).
struct NormalizationFactor {
    double value;
};

inline NormalizationFactor normalization(double E, const PotentialConfig& cfg) {
    if (!(E > 0.0)) throw DegenerateEnergy("N(E) requires E > 0");
    const double c2 = cfg.c2();
    return {std::sqrt(c2 / (pi * std::sqrt(c2 * E)))};
}

/// N continued off the real axis with the same square-root branch.
inline cplx normalization(ComplexEnergy E, const PotentialConfig& cfg) {
    if (E.is_real() && E.real() > 0.0) return normalization(E.real(), cfg).value;
    if (std::abs(E.value) == 0.0) throw DegenerateEnergy("N(E) diverges at E = 0");
    return branch_sqrt(cfg.c2() / (pi * wave_number(E, cfg)));
}

inline PiecewiseWave regular_chi(const CoefficientSet& cs, const PotentialConfig& cfg) {
    return PiecewiseWave(cs.regular_pieces, WaveKind::regular, cs.at_energy, cfg.a, cfg.b, cs.log_scale);
}

/// Regular solution: sin(kr) on (0,a), J1/J2 exponentials on (a,b), J3/J4 beyond b.
inline PiecewiseWave regular_chi(ComplexEnergy E, const PotentialConfig& cfg,
                                 const CoefficientOptions& opt = {}) {
    return regular_chi(compute_coefficients(E, cfg, opt), cfg);
}

/// chi+- = N chi / J+-. Defined wherever the Jost function is nonzero; the
/// resolvent code evaluates it off the real axis as well.
inline PiecewiseWave chi_pm(Sign sign, const CoefficientSet& cs, const PotentialConfig& cfg) {
    const cplx N = normalization(cs.at_energy, cfg);
    const cplx jost = sign == Sign::plus ? cs.jost_plus_scaled() : cs.jost_minus_scaled();
    const auto kind = sign == Sign::plus ? WaveKind::chi_plus : WaveKind::chi_minus;
    PiecewiseWave chi(cs.regular_pieces, WaveKind::regular, cs.at_energy, cfg.a, cfg.b, 0.0);
    return chi.scaled(N / jost, kind);
}

inline PiecewiseWave chi_pm(Sign sign, ComplexEnergy E, const PotentialConfig& cfg,
                            const CoefficientOptions& opt = {}) {
    return chi_pm(sign, compute_coefficients(E, cfg, opt), cfg);
}

/// f+- : pure e^{+-ikr} beyond b, continued inward through the shell.
inline PiecewiseWave f_pm(Sign sign, const CoefficientSet& cs, const PotentialConfig& cfg) {
    const auto& p = sign == Sign::plus ? cs.fplus_pieces : cs.fminus_pieces;
    return PiecewiseWave(p, sign == Sign::plus ? WaveKind::f_plus : WaveKind::f_minus, cs.at_energy,
                         cfg.a, cfg.b, cs.log_scale);
}

inline PiecewiseWave f_pm(Sign sign, ComplexEnergy E, const PotentialConfig& cfg,
                          const CoefficientOptions& opt = {}) {
    return f_pm(sign, compute_coefficients(E, cfg, opt), cfg);
}

/// Solution with cos(kr) on (0,a); C1..C4 elsewhere.
inline PiecewiseWave sigma2(const CoefficientSet& cs, const PotentialConfig& cfg) {
    return PiecewiseWave(cs.sigma2_pieces, WaveKind::sigma2, cs.at_energy, cfg.a, cfg.b, cs.log_scale);
}

inline PiecewiseWave sigma2(ComplexEnergy E, const PotentialConfig& cfg, const CoefficientOptions& opt = {}) {
    return sigma2(compute_coefficients(E, cfg, opt), cfg);
}

/// Free eigenfunction chi0 = N sin(kr) on the whole half line.
inline PiecewiseWave free_chi0(ComplexEnergy E, const PotentialConfig& cfg) {
    if (std::abs(E.value) == 0.0) throw DegenerateEnergy("chi0 requires E != 0");
    const cplx k = wave_number(E, cfg);
    const cplx N = normalization(E, cfg);
    const WavePiece p = WavePiece::cauchy(k, 0.0, {0.0, k});
    PiecewiseWave w({p, p, p}, WaveKind::regular, E, cfg.a, cfg.b);
    return w.scaled(N, WaveKind::free);
}

inline PiecewiseWave make_wave(WaveKind kind, ComplexEnergy E, const PotentialConfig& cfg,
                               const CoefficientOptions& opt = {}) {
    if (kind == WaveKind::free) return free_chi0(E, cfg);
    const CoefficientSet cs = compute_coefficients(E, cfg, opt);
    switch (kind) {
    case WaveKind::regular: return regular_chi(cs, cfg);
    case WaveKind::chi_plus: return chi_pm(Sign::plus, cs, cfg);
    case WaveKind::chi_minus: return chi_pm(Sign::minus, cs, cfg);
    case WaveKind::f_plus: return f_pm(Sign::plus, cs, cfg);
    case WaveKind::f_minus: return f_pm(Sign::minus, cs, cfg);
    case WaveKind::sigma2: return sigma2(cs, cfg);
    case WaveKind::free: break;
    }
    return free_chi0(E, cfg);
}

/// W(u, v) = u v' - u' v at radius r.
inline cplx wronskian(const PiecewiseWave& u, const PiecewiseWave& v, double r) {
    return u.value(r) * v.derivative(r) - u.derivative(r) * v.value(r);
}

/// Wronskian of the stored (scaled) pieces, taken at r = b on the outer piece.
inline cplx scaled_wronskian(const PiecewiseWave& u, const PiecewiseWave& v) {
    const double r = u.b();
    const auto& pu = u.piece(2);
    const auto& pv = v.piece(2);
    return pu.value(r) * pv.derivative(r) - pu.derivative(r) * pv.value(r);
}

// ---------------------------------------------------------------------------
// Independent check: direct numerical integration of u'' = c2 (V(r) - E) u.

struct OdeSolution {
    std::vector<double> r;
    std::vector<cplx> u;
    std::vector<cplx> du;
    double max_error_estimate = 0.0;
};

/// Fixed-step classical Runge-Kutta with step doubling; the two solutions are
/// Richardson-combined, giving a fifth-order result and a local error
/// estimate per step. Steps land exactly on a and b, where the potential
/// jumps. Integration may run inward (r_end < r_start).
///
/// Throws StepTooLarge when an estimated local error exceeds
/// tol * max(1, |u|).
inline OdeSolution ode_oracle(ComplexEnergy E, const PotentialConfig& cfg, cplx u0, cplx du0,
                              double r_start, double r_end, double step, double tol = 1e-11) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const double c2 = cfg.c2();
    const double dir = r_end >= r_start ? 1.0 : -1.0;

    std::vector<double> stops{r_start};
    for (double x : {cfg.a, cfg.b})
        if ((x - r_start) * dir > 0.0 && (r_end - x) * dir > 0.0) stops.push_back(x);
    stops.push_back(r_end);
    std::sort(stops.begin(), stops.end(), [dir](double x, double y) { return x * dir < y * dir; });

    OdeSolution sol;
    sol.r.push_back(r_start);
    sol.u.push_back(u0);
    sol.du.push_back(du0);
    cplx u = u0, du = du0;

    for (std::size_t seg = 0; seg + 1 < stops.size(); ++seg) {
        const double lo = stops[seg], hi = stops[seg + 1];
        const double mid = 0.5 * (lo + hi);
        // Potential is constant on the open segment; sample it at the midpoint.
        const cplx q2 = c2 * (cfg.potential(mid) - E.value);
        const auto n = static_cast<long>(std::ceil(std::abs(hi - lo) / step));
        const double h = (hi - lo) / static_cast<double>(n);

        auto rk4 = [&](cplx y, cplx dy, double hh, cplx& y_out, cplx& dy_out) {
            // y'' = q2 y as a first-order system (y, y').
            const cplx k1y = dy, k1d = q2 * y;
            const cplx k2y = dy + 0.5 * hh * k1d, k2d = q2 * (y + 0.5 * hh * k1y);
            const cplx k3y = dy + 0.5 * hh * k2d, k3d = q2 * (y + 0.5 * hh * k2y);
            const cplx k4y = dy + hh * k3d, k4d = q2 * (y + hh * k3y);
            y_out = y + hh / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy_out = dy + hh / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        };

        for (long i = 0; i < n; ++i) {
            cplx y1, d1, yh, dh, y2, d2;
            rk4(u, du, h, y1, d1);
            rk4(u, du, 0.5 * h, yh, dh);
            rk4(yh, dh, 0.5 * h, y2, d2);
            const double err = std::max(std::abs(y2 - y1), std::abs(d2 - d1) / (1.0 + std::abs(q2))) / 15.0;
            sol.max_error_estimate = std::max(sol.max_error_estimate, err);
            if (err > tol * std::max(1.0, std::abs(y2)))
                throw StepTooLarge("local error estimate " + std::to_string(err) + " exceeds tolerance");
            u = y2 + (y2 - y1) / 15.0;
            du = d2 + (d2 - d1) / 15.0;
            sol.r.push_back(i + 1 == n ? hi : lo + static_cast<double>(i + 1) * h);
            sol.u.push_back(u);
            sol.du.push_back(du);
        }
    }
    return sol;
}

} // namespace shellscatter
