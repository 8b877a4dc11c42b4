#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "shellscatter/coeffs.hpp"
#include "shellscatter/quadrature.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"
#include "shellscatter/waves.hpp"

namespace shellscatter {

inline void require_off_axis(ComplexEnergy E) {
    if (E.imag() == 0.0) throw OnRealAxis("resolvent kernel needs Im(E) != 0");
}

/// Kernel of (E - H)^{-1}: c2 chi(r<) f(r>) / W(chi, f), with f = f+ above
/// the real axis and f = f- below it. W(chi, f+) = 2ik J4, W(chi, f-) = -2ik J3.
inline cplx green_theorem1(double r, double s, ComplexEnergy E, const PotentialConfig& cfg) {
    require_off_axis(E);
    if (!(r > 0.0) || !(s > 0.0)) throw std::domain_error("radii must be positive");
    const auto cs = compute_coefficients(E, cfg);
    const bool upper = E.imag() > 0.0;
    const auto chi = regular_chi(cs, cfg);
    const auto f = f_pm(upper ? Sign::plus : Sign::minus, cs, cfg);
    const cplx W = upper ? 2.0 * I * cs.k * cs.J4 : -2.0 * I * cs.k * cs.J3;
    return cfg.c2() * chi(std::min(r, s)) * f(std::max(r, s)) / W;
}

/// The same kernel written as -pi N chi+(r<) f+(r>) above the axis and
/// -pi N chi-(r<) f-(r>) below it.
inline cplx green_quadrant(double r, double s, ComplexEnergy E, const PotentialConfig& cfg) {
    require_off_axis(E);
    const auto cs = compute_coefficients(E, cfg);
    const Sign sg = E.imag() > 0.0 ? Sign::plus : Sign::minus;
    const cplx N = normalization(E, cfg);
    return -pi * N * chi_pm(sg, cs, cfg)(std::min(r, s)) * f_pm(sg, cs, cfg)(std::max(r, s));
}

/// Free kernel -c2 sin(k r<) e^{+-ik r>} / k; W(sin, e^{+-ikr}) = -k for both signs.
inline cplx free_green(Sign sign, double r, double s, ComplexEnergy E, const PotentialConfig& cfg) {
    if (std::abs(E.value) == 0.0) throw DegenerateEnergy("free kernel requires E != 0");
    const cplx k = wave_number(E, cfg);
    const double sg = sign == Sign::plus ? 1.0 : -1.0;
    const double lo = std::min(r, s), hi = std::max(r, s);
    return -cfg.c2() * std::sin(k * lo) * std::exp(sg * I * k * hi) / k;
}

enum class HalfPlane { upper, lower };
/// in_basis: sigma1 = chi+; out_basis: sigma1 = chi-. sigma2 is the cosine solution in both.
enum class ThetaBasis { in_basis, out_basis };

struct ThetaMatrix {
    std::array<std::array<cplx, 2>, 2> entries{};
    HalfPlane half_plane = HalfPlane::upper;
    ThetaBasis basis = ThetaBasis::in_basis;

    cplx operator()(int i, int j) const { return entries.at(std::size_t(i)).at(std::size_t(j)); }
};

inline ThetaMatrix theta_matrix(ComplexEnergy E, const PotentialConfig& cfg, ThetaBasis basis) {
    require_off_axis(E);
    if (!(E.real() > 0.0)) throw DegenerateEnergy("theta matrix requires Re(E) > 0");
    const auto cs = compute_coefficients(E, cfg);
    const cplx N = normalization(E, cfg);
    ThetaMatrix t;
    t.basis = basis;
    t.half_plane = E.imag() > 0.0 ? HalfPlane::upper : HalfPlane::lower;
    const cplx num = t.half_plane == HalfPlane::upper ? cs.J3 * cs.C4 : cs.J4 * cs.C3;
    t.entries[0][0] = 2.0 * pi * I * num / cs.W;
    t.entries[1][0] = basis == ThetaBasis::in_basis ? pi * N * cs.J3 / cs.W : -pi * N * cs.J4 / cs.W;
    t.entries[0][1] = 0.0;
    t.entries[1][1] = 0.0;
    return t;
}

/// sum_ij theta_ij sigma_i(r;E) conj(sigma_j(s;conj E)) for r > s.
inline cplx theta_expansion(const ThetaMatrix& t, double r, double s, ComplexEnergy E, const PotentialConfig& cfg) {
    const Sign sg = t.basis == ThetaBasis::in_basis ? Sign::plus : Sign::minus;
    const auto cs = compute_coefficients(E, cfg);
    const auto cs_bar = compute_coefficients(std::conj(E.value), cfg);
    const std::array<cplx, 2> left{chi_pm(sg, cs, cfg)(r), sigma2(cs, cfg)(r)};
    const std::array<cplx, 2> right{std::conj(chi_pm(sg, cs_bar, cfg)(s)), std::conj(sigma2(cs_bar, cfg)(s))};
    cplx sum{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) sum += t(i, j) * left[std::size_t(i)] * right[std::size_t(j)];
    return sum;
}

/// (theta(E - i eps) - theta(E + i eps)) / (2 pi i), entry by entry.
inline std::array<std::array<cplx, 2>, 2> spectral_density_matrix(double E, double epsilon, const PotentialConfig& cfg,
                                                                    ThetaBasis basis = ThetaBasis::in_basis) {
    if (!(E > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("need E > 0 and epsilon > 0");
    const auto lo = theta_matrix(cplx(E, -epsilon), cfg, basis);
    const auto hi = theta_matrix(cplx(E, epsilon), cfg, basis);
    std::array<std::array<cplx, 2>, 2> out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = (lo(i, j) - hi(i, j)) / (2.0 * pi * I);
    return out;
}

/// rho_11 density at E from the theta jump across the real axis at height epsilon.
inline double spectral_measure_density(double E, double epsilon, const PotentialConfig& cfg,
                                       ThetaBasis basis = ThetaBasis::in_basis) {
    return spectral_density_matrix(E, epsilon, cfg, basis)[0][0].real();
}

/// Density extrapolated to epsilon -> 0 from epsilon and epsilon/10, using
/// the linear leading error.
inline double extrapolated_spectral_density(double E, double epsilon, const PotentialConfig& cfg,
                                            ThetaBasis basis = ThetaBasis::in_basis) {
    const double fine = spectral_measure_density(E, 0.1 * epsilon, cfg, basis);
    const double coarse = spectral_measure_density(E, epsilon, cfg, basis);
    return (10.0 * fine - coarse) / 9.0;
}

// ---------------------------------------------------------------------------
// Resolvent application u = (E - H)^{-1} g.
//
// With chi regular and f decaying,
//   u(r) = c2/W [ f(r) int_0^r chi g + chi(r) int_r^inf f g ].

namespace detail {

struct ResolventWaves {
    PiecewiseWave chi;
    PiecewiseWave f;
    cplx factor;  // c2 / W(chi, f)
};

inline ResolventWaves resolvent_waves(ComplexEnergy E, const PotentialConfig& cfg) {
    require_off_axis(E);
    const auto cs = compute_coefficients(E, cfg);
    const bool upper = E.imag() > 0.0;
    const cplx W = upper ? 2.0 * I * cs.k * cs.J4 : -2.0 * I * cs.k * cs.J3;
    return {regular_chi(cs, cfg), f_pm(upper ? Sign::plus : Sign::minus, cs, cfg), cfg.c2() / W};
}

/// M[j][i] = integral over [-1, x_j] of the i-th Lagrange basis polynomial
/// on the Gauss-Legendre nodes x.
inline const std::vector<std::vector<double>>& gl_cumulative_matrix() {
    static const auto table = [] {
        const auto& rule = gauss_legendre_rule();
        const std::size_t m = rule.offset.size();
        const auto& x = rule.offset;
        auto lagrange = [&](std::size_t i, double t) {
            double v = 1.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) v *= (t - x[j]) / (x[i] - x[j]);
            return v;
        };
        std::vector<std::vector<double>> M(m, std::vector<double>(m, 0.0));
        for (std::size_t j = 0; j < m; ++j) {
            // Map the same rule onto [-1, x_j]; exact for the degree m-1 basis.
            const double half = 0.5 * (x[j] + 1.0), mid = 0.5 * (x[j] - 1.0);
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0.0;
                for (std::size_t q = 0; q < m; ++q) s += rule.weight[q] * lagrange(i, mid + half * x[q]);
                M[j][i] = half * s;
            }
        }
        return M;
    }();
    return table;
}

} // namespace detail

/// Resolvent on radial samples. The grid must consist of Gauss-Legendre
/// panels on which g is smooth (as produced by radial_gl_grid); g is taken
/// to vanish beyond the grid. Partial integrals inside a panel use the exact
/// integral of the panel's interpolating polynomial.
inline SampledFunction resolvent_apply(const SampledFunction& g, ComplexEnergy E, const PotentialConfig& cfg) {
    const auto rw = detail::resolvent_waves(E, cfg);
    const auto& grid = g.grid;
    const std::size_t n = grid.size();
    const auto& M = detail::gl_cumulative_matrix();
    const std::size_t m = M.size();
    for (const auto& bl : grid.blocks)
        if (bl.rule != &gauss_legendre_rule()) throw std::invalid_argument("resolvent needs Gauss-Legendre panels");

    std::vector<cplx> chi(n), f(n), A(n), B(n);
    for (std::size_t i = 0; i < n; ++i) {
        chi[i] = rw.chi(grid.r[i]);
        f[i] = rw.f(grid.r[i]);
    }
    // A: running integral of chi g from 0; B: running integral of f g from the grid end.
    cplx runA{};
    std::vector<cplx> panel_f_total;
    std::vector<std::size_t> panel_first;
    for (const auto& bl : grid.blocks)
        for (std::size_t p = 0; p < bl.panels; ++p) {
            const std::size_t base = bl.first + p * m;
            const double half = 0.5 * bl.width;
            cplx totA{}, totB{};
            for (std::size_t j = 0; j < m; ++j) {
                cplx s{};
                for (std::size_t i = 0; i < m; ++i) s += M[j][i] * chi[base + i] * g.values[base + i];
                A[base + j] = runA + half * s;
                cplx t{};
                for (std::size_t i = 0; i < m; ++i) t += M[j][i] * f[base + i] * g.values[base + i];
                B[base + j] = half * t;  // from panel start to node, fixed below
            }
            for (std::size_t i = 0; i < m; ++i) {
                totA += grid.w[base + i] * chi[base + i] * g.values[base + i];
                totB += grid.w[base + i] * f[base + i] * g.values[base + i];
            }
            runA += totA;
            panel_f_total.push_back(totB);
            panel_first.push_back(base);
        }
    cplx runB{};
    for (std::size_t p = panel_first.size(); p-- > 0;) {
        const std::size_t base = panel_first[p];
        for (std::size_t j = 0; j < m; ++j) B[base + j] = runB + panel_f_total[p] - B[base + j];
        runB += panel_f_total[p];
    }
    SampledFunction out{grid, std::vector<cplx>(n), g.warnings};
    for (std::size_t i = 0; i < n; ++i) out.values[i] = rw.factor * (f[i] * A[i] + chi[i] * B[i]);
    return out;
}

/// Resolvent of a test function at arbitrary radii, by adaptive quadrature:
/// totals over each smooth interval of g are formed once, and only the
/// interval containing r is integrated partially.
inline std::vector<cplx> resolvent_apply(const TestFunction& g, ComplexEnergy E, const PotentialConfig& cfg,
                                         const std::vector<double>& radii, double rel_tol = 1e-12) {
    const auto rw = detail::resolvent_waves(E, cfg);
    const auto segs = g.smooth_intervals();
    auto chi_g = [&](double s) { return rw.chi(s) * g(s); };
    auto f_g = [&](double s) { return rw.f(s) * g(s); };
    std::vector<cplx> totA(segs.size()), totB(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        totA[i] = integrate_adaptive(chi_g, segs[i].first, segs[i].second, rel_tol);
        totB[i] = integrate_adaptive(f_g, segs[i].first, segs[i].second, rel_tol);
    }
    std::vector<cplx> out(radii.size());
    parallel_for(radii.size(), [&](std::size_t idx) {
        const double r = radii[idx];
        cplx A{}, B{};
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto [lo, hi] = segs[i];
            if (hi <= r) {
                A += totA[i];
            } else if (lo >= r) {
                B += totB[i];
            } else {
                // Near a bump edge the integrand is tiny; judge the error against the interval total.
                A += integrate_adaptive(chi_g, lo, r, rel_tol, rel_tol * std::abs(totA[i]));
                B += integrate_adaptive(f_g, r, hi, rel_tol, rel_tol * std::abs(totB[i]));
            }
        }
        out[idx] = rw.factor * (rw.f(r) * A + rw.chi(r) * B);
    });
    return out;
}

inline SampledFunction resolvent_apply(const TestFunction& g, ComplexEnergy E, const PotentialConfig& cfg,
                                       const RadialGrid& grid, double rel_tol = 1e-12) {
    return {grid, resolvent_apply(g, E, cfg, grid.r, rel_tol), {}};
}

/// ||(E - h) u - g|| / ||g|| for u = resolvent_apply(g), with h applied by a
/// sixth-order finite-difference stencil on a uniform grid of spacing `step`
/// over (0, support_max + tail]. Nodes within three steps of 0, a or b are
/// skipped, since u'' jumps where V does.
inline double resolvent_residual(const TestFunction& g, ComplexEnergy E, const PotentialConfig& cfg,
                                 double step = 3e-3, double tail = 2.0) {
    const double hi = g.support_max() + tail;
    const auto n = static_cast<std::size_t>(std::ceil(hi / step));
    std::vector<double> r(n + 1);
    for (std::size_t i = 0; i <= n; ++i) r[i] = double(i) * step;
    r[0] = 0.5 * step;  // never the centre of a retained stencil
    const auto u = resolvent_apply(g, E, cfg, r);
    const double c2 = cfg.c2();
    constexpr std::array<double, 7> stencil{2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0};
    double num = 0.0, den = 0.0;
    for (std::size_t i = 3; i + 3 <= n; ++i) {
        const double x = r[i];
        const double guard = 3.0 * step;
        if (std::abs(x - cfg.a) <= guard || std::abs(x - cfg.b) <= guard || x <= guard) continue;
        cplx d2{};
        for (std::size_t j = 0; j < 7; ++j) d2 += stencil[j] * u[i + j - 3];
        d2 /= 180.0 * step * step;
        const cplx hu = -d2 / c2 + cfg.potential(x) * u[i];
        const cplx gx = g(x);
        num += std::norm(E.value * u[i] - hu - gx);
        den += std::norm(gx);
    }
    if (den == 0.0) throw std::invalid_argument("source vanishes on the residual grid");
    return std::sqrt(num / den);
}

} // namespace shellscatter
