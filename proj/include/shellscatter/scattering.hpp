#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "shellscatter/green.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"
#include "shellscatter/waves.hpp"

namespace shellscatter {

/// Largest |d log J+ / dk| over the k range of a grid. A resonance of
/// this sharpness leaves a scattered tail decaying like exp(-r / rate).
inline double max_jost_rate(const EnergyGrid& grid, const PotentialConfig& cfg) {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.size(); i += 4) m = std::max(m, jost_rate(grid.k[i], cfg));
    return m;
}

/// Grids for operators whose output is a scattered state: the radial range
/// grows until the resonant tail has fallen to opt.tolerance, and the
/// energy grid is refined to match.
inline TransformPlan plan_scattering(const TestFunction& f, const PotentialConfig& cfg, TransformOptions opt = {}) {
    const TransformPlan probe = plan_transform(f, cfg, opt);
    opt.extra_extent += std::log(1.0 / opt.tolerance) * max_jost_rate(probe.energy, cfg);
    return plan_transform(f, cfg, opt);
}

/// Test function built from bumps whose first and third
/// radial moments vanish, so U0 f = O(E^(11/4)) at threshold. The first
/// bump is kept as given and the last two are rescaled; at least three
/// bumps are needed. Packets without this suppression leave an
/// algebraically decaying scattered tail.
inline TestFunction moment_free(const std::vector<Bump>& bumps, const PotentialConfig& cfg) {
    if (bumps.size() < 3) throw std::invalid_argument("moment_free needs at least three bumps");
    std::vector<TestFunction> parts;
    for (const auto& b : bumps) parts.push_back(make_bump(b.center, b.halfwidth, b.amplitude, cfg));
    auto moment = [](const TestFunction& g, int n) {
        return integrate_over_support(g, [&](double r) { return std::pow(r, n) * g(r); });
    };
    const std::size_t n = parts.size();
    TestFunction head;
    for (std::size_t i = 0; i + 2 < n; ++i) head = head + parts[i];
    const cplx a11 = moment(parts[n - 2], 1), a12 = moment(parts[n - 1], 1);
    const cplx a21 = moment(parts[n - 2], 3), a22 = moment(parts[n - 1], 3);
    const cplx r1 = -moment(head, 1), r2 = -moment(head, 3);
    const cplx det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-12 * std::abs(a11 * a22)) throw std::invalid_argument("moment_free: degenerate bumps");
    const cplx x = (r1 * a22 - a12 * r2) / det, y = (a11 * r2 - a21 * r1) / det;
    return head + x * parts[n - 2] + y * parts[n - 1];
}

/// Omega+- f = U+-^dagger U0 f, sampled on plan.radial.
inline SampledFunction moller(Sign sign, const TestFunction& f, const PotentialConfig& cfg, const TransformPlan& plan) {
    const auto p0 = forward(TransformKind::zero, f, plan.energy, cfg);
    return inverse(kind_of(sign), p0, plan.radial, cfg);
}

inline SampledFunction moller(Sign sign, const TestFunction& f, const PotentialConfig& cfg) {
    return moller(sign, f, cfg, plan_scattering(f, cfg));
}

/// S f = U0^dagger U- U+^dagger U0 f, as four successive transforms.
inline SampledFunction s_operator(const TestFunction& f, const PotentialConfig& cfg, const TransformPlan& plan) {
    const auto omega_plus = moller(Sign::plus, f, cfg, plan);
    const auto minus_profile = forward(TransformKind::minus, omega_plus, plan.energy, cfg);
    auto out = inverse(TransformKind::zero, minus_profile, plan.radial, cfg);
    out.warnings.insert(out.warnings.end(), omega_plus.warnings.begin(), omega_plus.warnings.end());
    return out;
}

inline SampledFunction s_operator(const TestFunction& f, const PotentialConfig& cfg) {
    return s_operator(f, cfg, plan_scattering(f, cfg));
}

/// (psi, phi) by adaptive radial quadrature.
inline cplx direct_inner_product(const TestFunction& psi, const TestFunction& phi) { return inner_product(psi, phi); }

/// integral dE <psi|E-> S(E) <+E|phi> on the given energy grid.
inline cplx s_matrix_element(const TestFunction& psi, const TestFunction& phi, const PotentialConfig& cfg,
                             const EnergyGrid& grid) {
    const auto pm = forward(TransformKind::minus, psi, grid, cfg);
    const auto pp = forward(TransformKind::plus, phi, grid, cfg);
    cplx sum{};
    for (std::size_t i = 0; i < grid.size(); ++i)
        sum += grid.w[i] * std::conj(pm.values[i]) * s_matrix(grid.E[i], cfg) * pp.values[i];
    return sum;
}

inline cplx s_matrix_element(const TestFunction& psi, const TestFunction& phi, const PotentialConfig& cfg) {
    return s_matrix_element(psi, phi, cfg, plan_transform(psi + phi, cfg).energy);
}

struct LsResidual {
    cplx lhs, free_part, scattered;  // <phi|chi+->, <phi|chi0>, <phi|G0+- V chi+->
    double residual = 0.0;
    /// |<phi|chi+->| + |<phi|chi0>| + |<phi|G0+- V chi+->|.
    double scale = 0.0;
    double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

/// Sandwiched Lippmann-Schwinger equation chi+- = chi0 + G0+- V chi+-:
/// the last term is a double quadrature with s restricted to (a, b), where
/// V is nonzero.
inline LsResidual ls_residual(Sign sign, double E, const TestFunction& phi, const PotentialConfig& cfg,
                              double rel_tol = 1e-11) {
    require_positive_energy(E);
    if (cfg.V0 != 0.0 && std::abs(E - cfg.V0) < 1e-8) throw DegenerateEnergy("E too close to V0");
    const auto chi = chi_pm(sign, E, cfg);
    const auto chi0 = free_chi0(E, cfg);
    const cplx lhs = integrate_over_support(phi, [&](double r) { return std::conj(phi(r)) * chi(r); }, rel_tol);
    const cplx free_part = integrate_over_support(phi, [&](double r) { return std::conj(phi(r)) * chi0(r); }, rel_tol);

    auto source = [&](double s) { return cfg.V0 * chi(s); };
    auto scattered = [&](double r) {
        auto g = [&](double s) { return free_green(sign, r, s, E, cfg) * source(s); };
        if (cfg.V0 == 0.0) return cplx{};
        if (r > cfg.a && r < cfg.b)  // kink of G0 at s = r
            return integrate_adaptive(g, cfg.a, r, rel_tol) + integrate_adaptive(g, r, cfg.b, rel_tol);
        return integrate_adaptive(g, cfg.a, cfg.b, rel_tol);
    };
    const cplx ls_term =
        integrate_over_support(phi, [&](double r) { return std::conj(phi(r)) * scattered(r); }, rel_tol);
    LsResidual out{lhs, free_part, ls_term};
    out.residual = std::abs(lhs - free_part - ls_term);
    out.scale = std::abs(lhs) + std::abs(free_part) + std::abs(ls_term);
    return out;
}

/// ||Omega+- f - integral dE chi+-(r;E) (U0 f)(E)||, the energy integral
/// evaluated wave by wave without the transform engine.
inline double decompose_moller_check(Sign sign, const TestFunction& f, const PotentialConfig& cfg,
                                     const TransformPlan& plan) {
    const auto omega = moller(sign, f, cfg, plan);
    const auto p0 = forward(TransformKind::zero, f, plan.energy, cfg);
    const auto& grid = plan.radial;
    std::vector<cplx> direct(grid.size());
    std::vector<PiecewiseWave> waves;
    waves.reserve(p0.size());
    for (std::size_t i = 0; i < p0.size(); ++i) waves.push_back(chi_pm(sign, plan.energy.E[i], cfg));
    parallel_for(grid.size(), [&](std::size_t n) {
        cplx s{};
        for (std::size_t i = 0; i < p0.size(); ++i) s += plan.energy.w[i] * p0.values[i] * waves[i](grid.r[n]);
        direct[n] = s;
    });
    double d = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) d += grid.w[n] * std::norm(omega.values[n] - direct[n]);
    return std::sqrt(d);
}

inline double decompose_moller_check(Sign sign, const TestFunction& f, const PotentialConfig& cfg) {
    return decompose_moller_check(sign, f, cfg, plan_transform(f, cfg));
}

struct IntertwiningCheck {
    cplx full;  // (Omega f, H Omega g)
    cplx free;  // (f, H0 g)
    double scale = 0.0;
    double relative() const { return std::abs(full - free) / scale; }
};

/// (Omega+- f, H Omega+- g) against (f, H0 g). The left side uses the
/// quadratic form (1/c2) (u', v') + (u, V v), with u' from the differentiated
/// transform kernels, so no diagonalisation property enters.
inline IntertwiningCheck intertwining_check(Sign sign, const TestFunction& f, const TestFunction& g,
                                            const PotentialConfig& cfg) {
    const auto plan = plan_scattering(f + g, cfg);
    const auto kind = kind_of(sign);
    const auto pf = forward(TransformKind::zero, f, plan.energy, cfg);
    const auto pg = forward(TransformKind::zero, g, plan.energy, cfg);
    const auto uf = inverse(kind, pf, plan.radial, cfg);
    const auto ug = inverse(kind, pg, plan.radial, cfg);
    const auto duf = inverse_derivative(kind, pf, plan.radial, cfg);
    const auto dug = inverse_derivative(kind, pg, plan.radial, cfg);
    cplx form{};
    const auto& grid = plan.radial;
    for (std::size_t n = 0; n < grid.size(); ++n)
        form += grid.w[n] * (std::conj(duf.values[n]) * dug.values[n] / cfg.c2() +
                             cfg.potential(grid.r[n]) * std::conj(uf.values[n]) * ug.values[n]);
    PotentialConfig free_cfg = cfg;
    free_cfg.V0 = 0.0;
    const auto h0g = apply_H(g, free_cfg);
    IntertwiningCheck out{form, inner_product(f, h0g), l2_norm(f) * l2_norm(h0g)};
    return out;
}

} // namespace shellscatter
