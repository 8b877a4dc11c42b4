#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "shellscatter/coeffs.hpp"
#include "shellscatter/evolution.hpp"
#include "shellscatter/green.hpp"
#include "shellscatter/scattering.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"
#include "shellscatter/waves.hpp"

namespace shellscatter {

struct Check {
    std::string name;
    std::string module;
    /// The identity the check executes.
    std::string paper_ref;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    /// Diagnostics report a trend and pass unless the computation breaks down.
    bool diagnostic = false;
    std::string note;
};

struct VerifyTolerances {
    double closed_form = 1e-12;
    double quadrature = 1e-6;
};

struct VerifyReport {
    std::string suite;
    std::vector<Check> checks;

    std::size_t failed() const {
        return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
    }
    bool all_pass() const { return failed() == 0; }
};

inline const std::vector<std::string>& verify_modules() {
    static const std::vector<std::string> m{"units",      "coeffs",     "eigenfuncs", "green",
                                            "testspace",  "transforms", "scattering", "evolution"};
    return m;
}

namespace detail {

/// Deterministic, portable sample in [0, 1): fractional parts of i times the golden ratio.
inline double golden(std::size_t i, double shift = 0.0) {
    const double x = (double(i) + 1.0) * 0.6180339887498949 + shift;
    return x - std::floor(x);
}

inline double lerp(double lo, double hi, double u) { return lo + (hi - lo) * u; }

inline double max_rel(cplx got, cplx want, double floor = 1.0) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

inline TestFunction inner_bump(const PotentialConfig& cfg, cplx amp = 1.0) {
    return make_bump(0.5 * cfg.a, 0.4 * cfg.a, amp, cfg);
}

inline TestFunction shell_bump(const PotentialConfig& cfg, cplx amp = 1.0) {
    return make_bump(0.5 * (cfg.a + cfg.b), 0.4 * (cfg.b - cfg.a), amp, cfg);
}

inline TestFunction outer_bump(const PotentialConfig& cfg, double offset, double halfwidth, cplx amp = 1.0) {
    return make_bump(cfg.b + offset + halfwidth, halfwidth, amp, cfg);
}

/// Mixed element of Phi with one bump on each piece.
inline TestFunction mixed_function(const PotentialConfig& cfg) {
    return inner_bump(cfg, cplx(0.6, -0.3)) + shell_bump(cfg, cplx(-0.4, 0.8)) +
           outer_bump(cfg, 0.1, 0.8, cplx(1.0, 0.2));
}

/// Wide packet outside the shell; keeps scattering and evolution grids small.
inline TestFunction wide_outer_packet(const PotentialConfig& cfg) { return outer_bump(cfg, 0.05, 4.0, cplx(1.0, 0.5)); }

inline std::vector<double> table_energies(const PotentialConfig& cfg) {
    return log_energy_grid(1e-3, 1e3, 200, cfg).E;
}

/// Energy nudged away from V0, where the closed forms have a removable singularity.
inline double off_barrier(double E, const PotentialConfig& cfg) {
    return (cfg.V0 != 0.0 && std::abs(E - cfg.V0) < 1e-3) ? E + 0.1 : E;
}

inline double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

struct CheckSpec {
    const char* name;
    const char* module;
    const char* paper_ref;
    bool unitarity;
    bool diagnostic;
    /// Fills value, tolerance and (optionally) note.
    std::function<void(Check&)> run;
};

// ---------------------------------------------------------------------------
// units

inline std::vector<cplx> branch_samples() {
    std::vector<cplx> zs;
    for (double rho : {1e-3, 0.5, 1.0, 7.0, 1e3})
        for (int j = 1; j <= 64; ++j) zs.push_back(std::polar(rho, -pi + 2.0 * pi * j / 64.0));
    return zs;
}

inline void check_branch_square(Check& c, const VerifyTolerances&) {
    for (cplx z : branch_samples()) {
        const cplx s = branch_sqrt(z);
        c.value = std::max(c.value, std::abs(s * s - z) / std::abs(z));
    }
    c.tolerance = 1e-14;
}

inline void check_branch_conjugation(Check& c, const VerifyTolerances& tol) {
    auto zs = branch_samples();
    for (double x : {0.5, 3.0, 40.0})
        for (double side : {1.0, -1.0}) zs.emplace_back(-x, side * 1e-12 * x);
    for (cplx z : zs) {
        if (z.imag() == 0.0 || std::abs(std::arg(z)) == pi) continue;  // the cut itself is half-open
        c.value = std::max(c.value, max_rel(std::conj(branch_sqrt(std::conj(z))), branch_sqrt(z), 1e-300));
    }
    c.tolerance = tol.closed_form;
}

inline void check_branch_continuity(Check& c, const VerifyTolerances&) {
    for (cplx z : branch_samples()) {
        if (std::abs(std::arg(z)) > pi - 0.05) continue;
        for (int d = 0; d < 8; ++d) {
            const cplx h = std::polar(1e-9 * std::abs(z), 2.0 * pi * d / 8.0);
            c.value = std::max(c.value, std::abs(branch_sqrt(z + h) - branch_sqrt(z)) / std::abs(branch_sqrt(z)));
        }
    }
    c.tolerance = 1e-6;
}

// ---------------------------------------------------------------------------
// coeffs

inline void check_s_unitarity(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (double E : table_energies(cfg)) c.value = std::max(c.value, std::abs(std::abs(s_matrix(E, cfg)) - 1.0));
    c.tolerance = tol.closed_form;
}

inline void check_jost_conjugate(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (double E : table_energies(cfg)) {
        const auto cs = compute_coefficients(off_barrier(E, cfg), cfg);
        c.value = std::max(c.value, max_rel(cs.jost_minus_scaled(), std::conj(cs.jost_plus_scaled()), 1e-300));
    }
    c.tolerance = tol.closed_form;
}

/// Value and slope mismatch of a wave's pieces at a and b, relative to 1 + |u| + |u'|.
inline double matching_mismatch(const PiecewiseWave& w, const PotentialConfig& cfg) {
    double worst = 0.0;
    for (double x : {cfg.a, cfg.b}) {
        const int i = w.piece_index(x);
        const auto& in = w.piece(i - 1);
        const auto& out = w.piece(i);
        const double scale = 1.0 + std::abs(out.value(x)) + std::abs(out.derivative(x));
        worst = std::max({worst, std::abs(in.value(x) - out.value(x)) / scale,
                          std::abs(in.derivative(x) - out.derivative(x)) / scale});
    }
    return worst;
}

inline void check_matching(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (double E : table_energies(cfg)) {
        const auto cs = compute_coefficients(off_barrier(E, cfg), cfg);
        c.value = std::max({c.value, matching_mismatch(regular_chi(cs, cfg), cfg),
                            matching_mismatch(sigma2(cs, cfg), cfg)});
    }
    c.tolerance = tol.closed_form;
}

inline void check_weak_limit(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    PotentialConfig weak = cfg;
    weak.V0 = 1e-6;
    for (double E : {0.3, 3.0, 30.0}) {
        const auto cs = compute_coefficients(E, weak);
        c.value = std::max({c.value, std::abs(cs.J1 + 0.5 * I), std::abs(cs.J2 - 0.5 * I), std::abs(cs.J3 + 0.5 * I),
                            std::abs(cs.J4 - 0.5 * I)});
    }
    c.tolerance = 1e-4;
    c.note = "V0 = 1e-6";
}

// ---------------------------------------------------------------------------
// eigenfuncs

inline std::vector<cplx> wave_energies(const PotentialConfig& cfg) {
    std::vector<cplx> es{5.0, 2.0, 0.01, 60.0, {3.0, 0.5}, {7.0, -1.0}, {0.2, 0.05}};
    for (std::size_t i = 0; i < 20; ++i) es.emplace_back(lerp(0.05, 40.0, golden(i)), lerp(-2.0, 2.0, golden(i, 0.3)));
    for (cplx& E : es)
        if (E.imag() == 0.0) E = off_barrier(E.real(), cfg);
    return es;
}

inline void check_dispersion(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (cplx E : wave_energies(cfg))
        for (auto kind : {WaveKind::regular, WaveKind::f_plus, WaveKind::sigma2}) {
            const auto w = make_wave(kind, E, cfg);
            for (int i = 0; i < 3; ++i)
                c.value = std::max(c.value, max_rel(w.piece(i).q * w.piece(i).q,
                                                    cfg.c2() * (E - cfg.piece_potential(i)), 1e-300));
        }
    c.tolerance = tol.closed_form;
}

inline void check_wave_continuity(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (cplx E : wave_energies(cfg))
        for (auto kind : {WaveKind::regular, WaveKind::chi_plus, WaveKind::chi_minus, WaveKind::f_plus,
                          WaveKind::f_minus, WaveKind::sigma2})
            c.value = std::max(c.value, matching_mismatch(make_wave(kind, E, cfg), cfg));
    c.tolerance = tol.closed_form;
}

inline void check_chi_conjugation(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (std::size_t n = 0; n < 20; ++n) {
        const cplx E{lerp(0.1, 20.0, golden(n)), lerp(0.01, 2.0, golden(n, 0.5))};
        const auto cs = compute_coefficients(E, cfg);
        const auto cp = chi_pm(Sign::plus, cs, cfg);
        const auto cp_bar = chi_pm(Sign::plus, std::conj(E), cfg);
        for (double r : {0.5 * cfg.a, 0.5 * (cfg.a + cfg.b), 1.5 * cfg.b}) {
            const cplx want = -(cs.J4 / cs.J3) * cp(r);
            c.value = std::max(c.value, std::abs(std::conj(cp_bar(r)) - want) / (1.0 + std::abs(want)));
        }
    }
    c.tolerance = 100.0 * tol.closed_form;
}

inline void check_ode_oracle(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    std::vector<cplx> es{5.0, 2.0, {3.0, 0.7}, {12.0, -0.4}};
    if (cfg.V0 > 0.2) es.push_back(0.5 * cfg.V0);
    const double r_end = 2.0 * cfg.b;
    for (cplx E : es) {
        const auto chi = regular_chi(E, cfg);
        const auto sol = ode_oracle(E, cfg, 0.0, wave_number(E, cfg), 0.0, r_end, 2e-3);
        for (std::size_t i = 0; i < sol.r.size(); ++i)
            c.value = std::max(c.value, std::abs(sol.u[i] - chi(sol.r[i])) / (1.0 + std::abs(chi(sol.r[i]))));
        const auto fp = f_pm(Sign::plus, E, cfg);
        const double start = r_end + 1.0;
        const auto back = ode_oracle(E, cfg, fp(start), fp.derivative(start), start, 0.05 * cfg.a, 2e-3);
        for (std::size_t i = 0; i < back.r.size(); ++i)
            c.value = std::max(c.value, std::abs(back.u[i] - fp(back.r[i])) / (1.0 + std::abs(fp(back.r[i]))));
    }
    c.tolerance = 1e-8;
}

// ---------------------------------------------------------------------------
// green

inline void check_green_forms(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (int quadrant = 1; quadrant <= 4; ++quadrant)
        for (std::size_t n = 0; n < 25; ++n) {
            const double re = lerp(0.05, 30.0, golden(n)) * (quadrant == 1 || quadrant == 4 ? 1.0 : -1.0);
            const double im = lerp(0.02, 3.0, golden(n, 0.2)) * (quadrant <= 2 ? 1.0 : -1.0);
            const double r = lerp(0.01, 3.0 * cfg.b, golden(n, 0.4)), s = lerp(0.01, 3.0 * cfg.b, golden(n, 0.7));
            const cplx E{re, im};
            c.value = std::max(c.value, max_rel(green_quadrant(r, s, E, cfg), green_theorem1(r, s, E, cfg), 1e-300));
        }
    c.tolerance = tol.closed_form;
}

inline void check_theta_expansion(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    for (auto basis : {ThetaBasis::in_basis, ThetaBasis::out_basis})
        for (std::size_t n = 0; n < 20; ++n) {
            const cplx E{lerp(0.1, 25.0, golden(n)), (n % 2 ? -1.0 : 1.0) * lerp(0.05, 2.0, golden(n, 0.3))};
            double r = lerp(0.05, 2.5 * cfg.b, golden(n, 0.6)), s = lerp(0.05, 2.5 * cfg.b, golden(n, 0.9));
            if (r < s) std::swap(r, s);
            const cplx want = green_theorem1(r, s, E, cfg);
            const cplx got = theta_expansion(theta_matrix(E, cfg, basis), r, s, E, cfg);
            c.value = std::max(c.value, std::abs(got - want) / (1e-3 + std::abs(want)));
        }
    c.tolerance = 100.0 * tol.closed_form;
}

inline void check_density_slope(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    for (double E : {1.0, 5.0, 20.0}) {
        E = off_barrier(E, cfg);
        const double d2 = std::abs(spectral_measure_density(E, 1e-2, cfg) - 1.0);
        const double d4 = std::abs(spectral_measure_density(E, 1e-4, cfg) - 1.0);
        if (d4 < 1e-12) continue;  // already exact at this epsilon
        c.value = std::max(c.value, std::abs(std::log10(d2 / d4) / 2.0 - 1.0));
    }
    c.tolerance = 0.15;
    c.note = "|log-log slope - 1| over epsilon in {1e-2, 1e-4}";
}

inline void check_density_limit(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    for (double E : {1.0, 5.0, 20.0})
        c.value = std::max(c.value, std::abs(extrapolated_spectral_density(off_barrier(E, cfg), 1e-3, cfg) - 1.0));
    c.tolerance = 1e-3;
    c.note = "density extrapolated to epsilon -> 0 from 1e-3 and 1e-4";
}

inline void check_resolvent(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const cplx E{3.0, 2.0};
    for (const auto& g : {inner_bump(cfg), shell_bump(cfg, cplx(0.0, 2.0)), outer_bump(cfg, 0.5, 1.0)}) {
        c.value = std::max(c.value, resolvent_residual(g, E, cfg));
        c.value = std::max(c.value, resolvent_residual(g, std::conj(E), cfg));
    }
    c.tolerance = tol.quadrature;
}

inline void check_first_resolvent(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const cplx E1{3.0, 2.0}, E2{4.0, 1.0};
    const auto f = outer_bump(cfg, 0.2, 0.8);
    const auto grid = radial_gl_grid(0.0, cfg.b + 90.0, 0.25, cfg, f.breakpoints());
    const auto u1 = resolvent_apply(f, E1, cfg, grid);
    const auto u2 = resolvent_apply(f, E2, cfg, grid);
    const auto u12 = resolvent_apply(u2, E1, cfg);
    double num = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        num += grid.w[i] * std::norm(u1.values[i] - u2.values[i] - (E2 - E1) * u12.values[i]);
    c.value = std::sqrt(num) / l2_norm(f);
    c.tolerance = 10.0 * tol.quadrature;
}

// ---------------------------------------------------------------------------
// testspace

inline void check_membership(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const double m = 2e-6;
    const auto phi = make_bump(0.5 * cfg.a, 0.5 * cfg.a - m, 1.0, cfg) +
                     make_bump(0.5 * (cfg.a + cfg.b), 0.5 * (cfg.b - cfg.a) - m, cplx(0.0, 1.0), cfg) +
                     make_bump(cfg.b + 1.0, 1.0 - m, 2.0, cfg);
    for (double x : {0.0, cfg.a, cfg.b})
        for (double side : {-1e-9, 1e-9}) {
            if (x + side < 0.0) continue;
            for (int n = 0; n <= derivative_budget; ++n)
                c.value = std::max(c.value, std::abs(phi.derivative_value(x + side, n)));
        }
    c.tolerance = 1e-30;
}

inline void check_norm_axioms(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto f = mixed_function(cfg);
    const auto g = inner_bump(cfg, cplx(0.0, -1.0)) + outer_bump(cfg, 1.0, 0.5, 0.7);
    const cplx alpha{1.3, -0.7};
    for (auto [n, m] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 1}, std::pair{1, 2}}) {
        const double nf = phi_norm(f, n, m, cfg), ng = phi_norm(g, n, m, cfg);
        if (!(nf > 0.0)) c.value = std::numeric_limits<double>::infinity();
        c.value = std::max(c.value, std::abs(phi_norm(alpha * f, n, m, cfg) - std::abs(alpha) * nf) / nf);
        c.value = std::max(c.value, (phi_norm(f + g, n, m, cfg) - nf - ng) / (nf + ng));
    }
    c.tolerance = 1e-8;
    c.note = "largest homogeneity or triangle violation";
}

inline void check_continuity_bound(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const std::vector<TestFunction> phis{mixed_function(cfg), inner_bump(cfg), shell_bump(cfg),
                                         outer_bump(cfg, 0.3, 0.6, cplx(0.0, 1.0))};
    for (const auto& phi : phis) {
        const double nphi = phi_norm(phi, 1, 0, cfg);
        for (double E : {0.01, 0.5, 3.0, 4.5, 30.0}) {
            E = off_barrier(E, cfg);
            const double bound = continuity_constant(Sign::plus, E, cfg) * nphi;
            c.value = std::max(c.value, std::abs(ket_action(TransformKind::plus, E, phi, cfg)) / bound);
        }
    }
    c.tolerance = 1.0;
    c.note = "largest |<phi|E+>| / (C+(E) ||phi||_{1,0})";
}

// ---------------------------------------------------------------------------
// transforms

inline void check_parseval(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = mixed_function(cfg);
    TransformOptions opt;
    opt.tolerance = tol.quadrature;
    const auto plan = plan_transform(f, cfg, opt);
    const double nf = l2_norm(f);
    for (auto kind : {TransformKind::plus, TransformKind::minus, TransformKind::zero})
        c.value = std::max(c.value, std::abs(forward(kind, f, plan.energy, cfg).norm() - nf) / nf);
    c.tolerance = tol.quadrature;
}

inline void check_round_trip(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = mixed_function(cfg);
    TransformOptions opt;
    opt.tolerance = tol.quadrature;
    const auto plan = plan_transform(f, cfg, opt);
    const auto sampled = SampledFunction::sample(f, plan.radial);
    const double nf = l2_norm(f);
    for (auto kind : {TransformKind::plus, TransformKind::minus, TransformKind::zero}) {
        const auto back = inverse(kind, forward(kind, f, plan.energy, cfg), plan.radial, cfg);
        c.value = std::max(c.value, back.distance(sampled) / nf);
    }
    c.tolerance = tol.quadrature;
}

inline void check_diagonalization(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto phi = mixed_function(cfg);
    const auto hphi = apply_H(phi, cfg);
    PotentialConfig free_cfg = cfg;
    free_cfg.V0 = 0.0;
    const auto h0phi = apply_H(phi, free_cfg);
    TransformOptions opt;
    opt.tolerance = tol.quadrature;
    const auto plan = plan_transform(hphi, cfg, opt);
    for (auto kind : {TransformKind::plus, TransformKind::minus, TransformKind::zero}) {
        const auto p = forward(kind, phi, plan.energy, cfg);
        const auto ph = forward(kind, kind == TransformKind::zero ? h0phi : hphi, plan.energy, cfg);
        double num = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            num += plan.energy.w[i] * std::norm(ph.values[i] - plan.energy.E[i] * p.values[i]);
        c.value = std::max(c.value, std::sqrt(num) / ph.norm());
    }
    c.tolerance = tol.quadrature;
    c.note = "||U(H phi) - E U phi|| / ||U(H phi)||; the free transform with H0";
}

inline void check_delta_identity(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto f = mixed_function(cfg);
    const auto grid = log_energy_grid(0.01, 100.0, 64, cfg);
    for (auto kind : {TransformKind::plus, TransformKind::minus, TransformKind::zero}) {
        const auto p = forward(kind, f, grid, cfg);
        for (std::size_t i = 0; i < p.size(); ++i) c.value = std::max(c.value, std::abs(p.at(grid.E[i]) - p.values[i]));
    }
    c.tolerance = 0.0;
    c.note = "energy-representation bra at a node returns the stored value";
}

inline void check_eigen_sandwich(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto phi = mixed_function(cfg);
    for (std::size_t i = 0; i < 10; ++i) {
        const double E = off_barrier(std::pow(10.0, lerp(-1.5, 2.0, golden(i))), cfg);
        for (auto kind : {TransformKind::plus, TransformKind::minus}) {
            const double scale = std::max(E * std::abs(ket_action(kind, E, phi, cfg)), 1e-4);
            c.value = std::max(c.value, eigen_residual(kind, E, phi, cfg) / scale);
        }
    }
    c.tolerance = 1e-8;
}

inline void check_s_relation(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto g = mixed_function(cfg);
    const auto grid = log_energy_grid(1e-3, 1e3, 200, cfg);
    const auto pp = forward(TransformKind::plus, g, grid, cfg);
    const auto pm = forward(TransformKind::minus, g, grid, cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx want = s_matrix(grid.E[i], cfg) * pp.values[i];
        c.value = std::max(c.value, std::abs(pm.values[i] - want) / (1e-3 + std::abs(want)));
    }
    c.tolerance = 1e-8;
}

// ---------------------------------------------------------------------------
// scattering

inline TransformOptions scattering_options(const VerifyTolerances& tol) {
    TransformOptions opt;
    opt.tolerance = tol.quadrature;
    return opt;
}

inline void check_moller_isometry(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = outer_bump(cfg, 0.05, 1.3, cplx(1.0, -0.4)) + outer_bump(cfg, 2.8, 1.1, cplx(-0.5, 0.6));
    const auto plan = plan_scattering(f, cfg, scattering_options(tol));
    const double nf = l2_norm(f);
    for (auto sign : {Sign::plus, Sign::minus})
        c.value = std::max(c.value, std::abs(moller(sign, f, cfg, plan).norm() - nf) / nf);
    c.tolerance = tol.quadrature;
}

/// Outer packet with vanishing first and third radial moments.
inline TestFunction moment_free_packet(const PotentialConfig& cfg) {
    return moment_free({{cfg.b + 1.55, 1.5, {1.0, 0.3}}, {cfg.b + 4.45, 1.3, {-0.6, 0.8}}, {cfg.b + 7.4, 1.4, {0.4, -0.5}}},
                       cfg);
}

inline void check_s_operator_law(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = moment_free_packet(cfg);
    const auto plan = plan_scattering(f, cfg, scattering_options(tol));
    const auto sf = s_operator(f, cfg, plan);
    const auto p0 = forward(TransformKind::zero, f, plan.energy, cfg);
    const auto ps = forward(TransformKind::zero, sf, plan.energy, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i)
        worst = std::max(worst, std::abs(ps.values[i] - s_matrix(plan.energy.E[i], cfg) * p0.values[i]));
    c.value = worst / max_abs(p0.values);
    c.tolerance = tol.quadrature;
    c.note = "node-wise, relative to max |U0 f|; norm defect " +
             format_double(std::abs(sf.norm() - l2_norm(f)) / l2_norm(f));
}

inline void check_intertwining(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = outer_bump(cfg, 0.05, 2.0, cplx(1.0, 0.4));
    const auto g = outer_bump(cfg, 0.3, 1.9, cplx(-0.3, 1.0));
    for (auto sign : {Sign::plus, Sign::minus}) c.value = std::max(c.value, intertwining_check(sign, f, g, cfg).relative());
    c.tolerance = 10.0 * tol.quadrature;
    c.note = "(Omega f, H Omega g) against (f, H0 g)";
}

inline void check_s_matrix_element(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto psi = mixed_function(cfg);
    const auto phi = inner_bump(cfg, cplx(0.2, 1.0)) + shell_bump(cfg, 0.5) + outer_bump(cfg, 0.4, 0.6, cplx(1.0, -1.0));
    for (const auto& [x, y] : {std::pair{psi, phi}, std::pair{phi, phi}}) {
        const cplx element = s_matrix_element(x, y, cfg);
        c.value = std::max(c.value, std::abs(element - direct_inner_product(x, y)) / (l2_norm(x) * l2_norm(y)));
    }
    c.tolerance = tol.quadrature;
}

inline void check_ls_residual(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto phi = shell_bump(cfg) + outer_bump(cfg, 0.2, 0.8, cplx(0.5, 1.0));
    for (double E : {2.0, 5.0, 10.0})
        for (auto sign : {Sign::plus, Sign::minus})
            c.value = std::max(c.value, ls_residual(sign, off_barrier(E, cfg), phi, cfg).relative());
    c.tolerance = 1e-5;
}

inline void check_decompose(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = outer_bump(cfg, 0.3, 1.2) + shell_bump(cfg, cplx(0.0, 1.0));
    for (auto sign : {Sign::plus, Sign::minus})
        c.value = std::max(c.value, decompose_moller_check(sign, f, cfg) / l2_norm(f));
    c.tolerance = tol.quadrature;
}

// ---------------------------------------------------------------------------
// evolution

inline void check_evolution_norm(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = wide_outer_packet(cfg);
    const double nf = l2_norm(f);
    for (double t : {1.0, -1.0, 10.0, -10.0})
        c.value = std::max(c.value, std::abs(evolve(f, t, Generator::full, Sign::plus, cfg).norm() - nf) / nf);
    for (double t : {1.0, -1.0}) {
        c.value = std::max(c.value, std::abs(evolve(f, t, Generator::full, Sign::minus, cfg).norm() - nf) / nf);
        c.value = std::max(c.value, std::abs(evolve(f, t, Generator::free, Sign::plus, cfg).norm() - nf) / nf);
    }
    c.tolerance = tol.quadrature;
    c.note = "t in {+-1, +-10}";
}

inline void check_evolution_identity(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = wide_outer_packet(cfg);
    for (auto gen : {Generator::full, Generator::free}) {
        const auto plan = plan_evolution(f, 0.0, gen, cfg);
        const auto u = evolve(EvolutionRequest{f, 0.0, gen, Sign::plus}, plan.radial, cfg);
        c.value = std::max(c.value, u.distance(SampledFunction::sample(f, plan.radial)) / l2_norm(f));
    }
    c.tolerance = tol.quadrature;
}

inline void check_group_law(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = wide_outer_packet(cfg);
    const auto plan = plan_evolution(f, 2.0, Generator::full, cfg);
    const auto once = evolve(EvolutionRequest{f, 2.0, Generator::full, Sign::plus}, plan.radial, cfg);
    const auto half = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::plus}, plan.radial, cfg);
    const auto half_profile = forward(TransformKind::plus, half, plan.energy, cfg);
    const auto twice = evolve(EvolutionRequest{half_profile, 1.0, Generator::full, Sign::plus}, plan.radial, cfg);
    c.value = twice.distance(once) / l2_norm(f);
    c.tolerance = 2.0 * tol.quadrature;
    c.note = "evolve(1) after evolve(1) against evolve(2)";
}

inline void check_basis_independence(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol) {
    const auto f = wide_outer_packet(cfg);
    const auto plan = plan_evolution(f, 1.0, Generator::full, cfg);
    const auto up = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::plus}, plan.radial, cfg);
    const auto down = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::minus}, plan.radial, cfg);
    c.value = up.distance(down) / l2_norm(f);
    c.tolerance = 2.0 * tol.quadrature;
}

inline void check_phase_laws(Check& c, const PotentialConfig& cfg, const VerifyTolerances& tol, bool bra) {
    const auto phi = wide_outer_packet(cfg);
    for (auto sign : {Sign::plus, Sign::minus}) {
        const auto back = evolve(phi, -1.0, Generator::full, sign, cfg);
        for (double E : {0.7, 5.0}) {
            E = off_barrier(E, cfg);
            const double scale = phase_check_scale(sign, E, phi, cfg);
            const double r = bra ? bra_phase_residual(kind_of(sign), E, 1.0, phi, back, cfg)
                                 : ket_phase_residual(kind_of(sign), E, 1.0, phi, back, cfg);
            c.value = std::max(c.value, r / scale);
        }
    }
    c.tolerance = tol.quadrature;
    c.note = "t = 1, relative to C(E) ||phi||_{1,0}";
}

inline void check_hunziker(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto rep = hunziker_diagnostic(wide_outer_packet(cfg), 2, {0.0, 1.0, 2.0}, cfg);
    c.value = rep.fitted_constant;
    c.tolerance = std::numeric_limits<double>::infinity();
    c.note = "n = 2, t in {0, 1, 2}: fitted c_2 = " + format_double(rep.fitted_constant) + ", trend " + rep.trend;
}

inline void check_interior_mass(Check& c, const PotentialConfig& cfg, const VerifyTolerances&) {
    const auto mass = interior_mass_trend(5.0, 0.5, {5.0, 10.0, 20.0}, cfg);
    c.value = mass.back() / std::max(mass.front(), 1e-300);
    c.tolerance = std::numeric_limits<double>::infinity();
    const bool down = mass[1] <= mass[0] && mass[2] <= mass[1];
    c.note = "mass in r < b at t = 5, 10, 20: " + format_double(mass[0]) + ", " + format_double(mass[1]) + ", " +
             format_double(mass[2]) + (down ? " (decreasing)" : " (not decreasing)");
}

inline std::vector<CheckSpec> check_catalog(const PotentialConfig& cfg, const VerifyTolerances& tol) {
    auto with = [&](void (*fn)(Check&, const PotentialConfig&, const VerifyTolerances&)) {
        return [fn, cfg, tol](Check& c) { fn(c, cfg, tol); };
    };
    auto plain = [&](void (*fn)(Check&, const VerifyTolerances&)) { return [fn, tol](Check& c) { fn(c, tol); }; };
    return {
        {"branch_sqrt_square", "units", "branch_sqrt(z)^2 = z", false, false, plain(check_branch_square)},
        {"branch_sqrt_conjugation", "units", "conj(sqrt(conj z)) = sqrt(z) off the cut", false, false,
         plain(check_branch_conjugation)},
        {"branch_sqrt_continuity", "units", "sqrt continuous off the negative real axis", false, false,
         plain(check_branch_continuity)},
        {"s_matrix_unitarity", "coeffs", "|S(E)| = 1 for real E > 0", true, false, with(check_s_unitarity)},
        {"jost_conjugate", "coeffs", "J-(E) = conj(J+(E)) for real E > 0", false, false, with(check_jost_conjugate)},
        {"matching_residual", "coeffs", "matching conditions at r = a and r = b", false, false, with(check_matching)},
        {"weak_potential_limit", "coeffs", "J1..J4 -> (-i/2, i/2, -i/2, i/2) as V0 -> 0", false, false,
         with(check_weak_limit)},
        {"piece_dispersion", "eigenfuncs", "q^2 = c2 (E - V) on every piece", false, false, with(check_dispersion)},
        {"wave_continuity", "eigenfuncs", "value and slope continuity of every wave kind", false, false,
         with(check_wave_continuity)},
        {"chi_plus_conjugation", "eigenfuncs", "conj(chi+(r; conj E)) = -(J4/J3) chi+(r; E)", false, false,
         with(check_chi_conjugation)},
        {"ode_oracle", "eigenfuncs", "closed forms solve (h - E) u = 0", false, false, with(check_ode_oracle)},
        {"green_forms", "green", "resolvent kernel equals its quadrant forms", false, false, with(check_green_forms)},
        {"theta_expansion", "green", "theta-matrix expansion of the kernel", false, false, with(check_theta_expansion)},
        {"spectral_density_slope", "green", "spectral density - 1 = O(epsilon)", false, false,
         with(check_density_slope)},
        {"spectral_density_limit", "green", "spectral measure is Lebesgue measure", false, false,
         with(check_density_limit)},
        {"resolvent_residual", "green", "(E - h) R(E) g = g", false, false, with(check_resolvent)},
        {"first_resolvent_identity", "green", "R(E1) - R(E2) = (E2 - E1) R(E1) R(E2)", false, false,
         with(check_first_resolvent)},
        {"test_function_membership", "testspace", "all derivatives vanish at 0, a, b", false, false,
         with(check_membership)},
        {"norm_axioms", "testspace", "||.||_{n,m} is a norm", false, false, with(check_norm_axioms)},
        {"continuity_bound", "testspace", "|<phi|E+>| <= C+(E) ||phi||_{1,0}", false, false,
         with(check_continuity_bound)},
        {"parseval", "transforms", "U+, U-, U0 are isometries", true, false, with(check_parseval)},
        {"round_trip", "transforms", "U^-1 U = 1", false, false, with(check_round_trip)},
        {"diagonalization", "transforms", "(U H phi)(E) = E (U phi)(E)", false, false, with(check_diagonalization)},
        {"delta_identity", "transforms", "<E|phi-hat> = phi-hat(E)", false, false, with(check_delta_identity)},
        {"eigen_sandwich", "transforms", "<h phi|E> = E <phi|E>", false, false, with(check_eigen_sandwich)},
        {"s_relation", "transforms", "(U- g)(E) = S(E) (U+ g)(E)", false, false, with(check_s_relation)},
        {"moller_isometry", "scattering", "Moller operators are isometric", true, false, with(check_moller_isometry)},
        {"s_operator_law", "scattering", "U0 S f = S(E) U0 f", false, false, with(check_s_operator_law)},
        {"intertwining", "scattering", "Omega^dagger H Omega = H0", false, false, with(check_intertwining)},
        {"s_matrix_element", "scattering", "(psi-, phi+) = integral <psi|E-> S(E) <+E|phi>", false, false,
         with(check_s_matrix_element)},
        {"lippmann_schwinger", "scattering", "sandwiched chi+- = chi0 + G0+- V chi+-", false, false,
         with(check_ls_residual)},
        {"moller_decomposition", "scattering", "Omega+- = integral dE |E+-><E|", false, false, with(check_decompose)},
        {"evolution_norm", "evolution", "e^{-iHt} is unitary", true, false, with(check_evolution_norm)},
        {"evolution_identity", "evolution", "e^{-iH 0} = 1", false, false, with(check_evolution_identity)},
        {"group_law", "evolution", "e^{-iHs} e^{-iHt} = e^{-iH(s+t)}", false, false, with(check_group_law)},
        {"basis_independence", "evolution", "plus and minus bases give the same evolution", false, false,
         with(check_basis_independence)},
        {"ket_phase_law", "evolution", "<phi|e^{-iHt}|E> = e^{-iEt} <phi|E>", false, false,
         [cfg, tol](Check& c) { check_phase_laws(c, cfg, tol, false); }},
        {"bra_phase_law", "evolution", "<E|e^{-iHt} = e^{iEt} <E|", false, false,
         [cfg, tol](Check& c) { check_phase_laws(c, cfg, tol, true); }},
        {"hunziker_bound", "evolution", "||e^{-iHt} f||_n <= c_n (1 + |t|)^n ||f||_n", false, true,
         with(check_hunziker)},
        {"interior_mass_trend", "evolution", "incoming packets move toward the potential region", false, true,
         with(check_interior_mass)},
    };
}

} // namespace detail

/// True for "full", "unitarity-only" and the module names.
inline bool is_valid_suite(const std::string& suite) {
    if (suite == "full" || suite == "unitarity-only") return true;
    const auto& m = verify_modules();
    return std::find(m.begin(), m.end(), suite) != m.end();
}

/// Names of the checks a suite selects, in catalog order.
inline std::vector<std::string> suite_checks(const std::string& suite) {
    if (!is_valid_suite(suite)) throw std::invalid_argument("unknown suite " + suite);
    std::vector<std::string> out;
    for (const auto& spec : detail::check_catalog(PotentialConfig{}, {})) {
        const bool take = suite == "full" || (suite == "unitarity-only" && spec.unitarity) || suite == spec.module;
        if (take) out.push_back(spec.name);
    }
    return out;
}

/// Runs the selected checks. A check that throws fails with the error in its note.
inline VerifyReport run_verification(const PotentialConfig& cfg, const std::string& suite,
                                     const VerifyTolerances& tol = {}) {
    cfg.validate();
    const auto selected = suite_checks(suite);
    VerifyReport report{suite, {}};
    for (const auto& spec : detail::check_catalog(cfg, tol)) {
        if (std::find(selected.begin(), selected.end(), spec.name) == selected.end()) continue;
        Check c;
        c.name = spec.name;
        c.module = spec.module;
        c.paper_ref = spec.paper_ref;
        c.diagnostic = spec.diagnostic;
        try {
            spec.run(c);
            c.pass = std::isfinite(c.value) && c.value <= c.tolerance;
        } catch (const Error& e) {
            c.value = std::numeric_limits<double>::quiet_NaN();
            c.note = std::string(e.kind()) + ": " + e.what();
        } catch (const std::exception& e) {
            c.value = std::numeric_limits<double>::quiet_NaN();
            c.note = e.what();
        }
        report.checks.push_back(c);
    }
    return report;
}

inline nlohmann::json to_json(const VerifyReport& r) {
    using nlohmann::json;
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json checks = json::array();
    for (const auto& c : r.checks) {
        json j{{"name", c.name},           {"module", c.module}, {"paper_ref", c.paper_ref},
               {"value", num(c.value)},     {"tolerance", num(c.tolerance)},
               {"pass", c.pass},            {"diagnostic", c.diagnostic}};
        if (!c.note.empty()) j["note"] = c.note;
        checks.push_back(j);
    }
    const std::size_t failed = r.failed();
    return {{"suite", r.suite},
            {"checks", checks},
            {"summary", {{"total", r.checks.size()}, {"passed", r.checks.size() - failed}, {"failed", failed}}}};
}

} // namespace shellscatter
