#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "shellscatter/scattering.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"

namespace shellscatter {

enum class Generator { full, free };

inline const char* to_string(Generator g) { return g == Generator::full ? "full" : "free"; }

struct EvolutionRequest {
    std::variant<TestFunction, EnergyProfile> state;
    /// May be negative; the evolution is a group.
    double time = 0.0;
    Generator generator = Generator::full;
    /// Eigenbasis used for the full generator.
    Sign sign = Sign::plus;

    TransformKind kind() const { return generator == Generator::free ? TransformKind::zero : kind_of(sign); }
};

/// Grids for evolving f by |t|: the energy grid resolves the time phase and
/// the radial range covers the spreading packet.
inline TransformPlan plan_evolution(const TestFunction& f, double time, Generator generator, const PotentialConfig& cfg,
                                    TransformOptions opt = {}) {
    opt.time = std::abs(time) / cfg.hbar;
    if (generator == Generator::free) {
        PotentialConfig free_cfg = cfg;
        free_cfg.V0 = 0.0;
        return plan_transform(f, free_cfg, opt);
    }
    return plan_scattering(f, cfg, opt);
}

/// Largest phase step |E_{i+1} - E_i| |t| / hbar between neighbouring nodes.
inline double max_phase_step(const EnergyGrid& grid, double time, const PotentialConfig& cfg) {
    double m = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) m = std::max(m, (grid.E[i] - grid.E[i - 1]) * std::abs(time));
    return m / cfg.hbar;
}

/// e^{-iHt/hbar} (or e^{-iH0 t/hbar}) applied in the energy representation:
/// forward transform, multiplication by e^{-iEt/hbar}, inverse transform.
inline SampledFunction evolve(const EvolutionRequest& req, const RadialGrid& r_nodes, const PotentialConfig& cfg) {
    const TransformKind kind = req.kind();
    EnergyProfile profile;
    if (const auto* f = std::get_if<TestFunction>(&req.state)) {
        profile = forward(kind, *f, plan_evolution(*f, req.time, req.generator, cfg).energy, cfg);
    } else {
        profile = std::get<EnergyProfile>(req.state);
        if (profile.kind != kind)
            throw std::invalid_argument(std::string("profile is in the ") + to_string(profile.kind) +
                                        " representation but the request needs " + to_string(kind));
    }
    for (std::size_t i = 0; i < profile.size(); ++i)
        profile.values[i] *= std::exp(-I * (profile.grid.E[i] * req.time / cfg.hbar));
    auto out = inverse(kind, profile, r_nodes, cfg);
    const double step = max_phase_step(profile.grid, req.time, cfg);
    if (step > pi / 4)
        out.warnings.push_back("RefinementWarning: phase step " + format_double(step) +
                               " between energy nodes exceeds pi/4; refine the energy grid");
    return out;
}

/// Evolves a test function on grids planned for it; the result lives on
/// plan_evolution(f, t, ...).radial.
inline SampledFunction evolve(const TestFunction& f, double time, Generator generator, Sign sign,
                              const PotentialConfig& cfg) {
    const auto plan = plan_evolution(f, time, generator, cfg);
    return evolve(EvolutionRequest{f, time, generator, sign}, plan.radial, cfg);
}

/// |<back|E> - e^{-iEt/hbar} <phi|E>| where back = e^{iHt/hbar} phi, the
/// sandwiched form of e^{-iHt/hbar}|E> = e^{-iEt/hbar}|E>.
inline double ket_phase_residual(TransformKind kind, double E, double time, const TestFunction& phi,
                                 const SampledFunction& back, const PotentialConfig& cfg) {
    const cplx lhs = ket_action(kind, E, back, cfg);
    return std::abs(lhs - std::exp(-I * (E * time / cfg.hbar)) * ket_action(kind, E, phi, cfg));
}

/// |<E|back> - e^{iEt/hbar} <E|phi>| where back = e^{iHt/hbar} phi, the
/// sandwiched form of <E| e^{-iHt/hbar} = e^{iEt/hbar} <E|.
inline double bra_phase_residual(TransformKind kind, double E, double time, const TestFunction& phi,
                                 const SampledFunction& back, const PotentialConfig& cfg) {
    const cplx lhs = std::conj(ket_action(kind, E, back, cfg));
    return std::abs(lhs - std::exp(I * (E * time / cfg.hbar)) * bra_action(kind, E, phi, cfg));
}

inline double ket_phase_check(Sign sign, double E, double time, const TestFunction& phi, const PotentialConfig& cfg,
                              Generator generator = Generator::full) {
    require_positive_energy(E);
    if (time == 0.0) return 0.0;
    const EvolutionRequest req{phi, -time, generator, sign};
    return ket_phase_residual(req.kind(), E, time, phi, evolve(phi, -time, generator, sign, cfg), cfg);
}

inline double bra_phase_check(Sign sign, double E, double time, const TestFunction& phi, const PotentialConfig& cfg,
                              Generator generator = Generator::full) {
    require_positive_energy(E);
    if (time == 0.0) return 0.0;
    const EvolutionRequest req{phi, -time, generator, sign};
    return bra_phase_residual(req.kind(), E, time, phi, evolve(phi, -time, generator, sign, cfg), cfg);
}

/// Natural size for the phase checks: C+-(E) ||phi||_{1,0} bounds |<phi|E+->|.
inline double phase_check_scale(Sign sign, double E, const TestFunction& phi, const PotentialConfig& cfg) {
    return continuity_constant(sign, E, cfg) * phi_norm(phi, 1, 0, cfg);
}

/// h applied by second differences to samples u_j = u(j * step), on a grid
/// that has a and b as nodes; the potential takes V0/2 on the jumps. Node 0
/// is r = 0, where regular functions have u = u'' = 0.
inline std::vector<cplx> fd_apply_h(const std::vector<cplx>& u, double step, const PotentialConfig& cfg) {
    const double c2 = cfg.c2();
    std::vector<cplx> out(u.size());
    for (std::size_t j = 1; j < u.size(); ++j) {
        const cplx left = u[j - 1];
        const cplx right = j + 1 < u.size() ? u[j + 1] : cplx{};
        out[j] = -(left - 2.0 * u[j] + right) / (c2 * step * step) + cfg.potential(double(j) * step) * u[j];
    }
    return out;
}

/// D_n norm max_{k+m<=n} ||r^k h^m u|| of samples u_j = u(j * step) on [0, R],
/// using fd_apply_h and the rectangle rule.
inline double sampled_dn_norm(const std::vector<cplx>& u, double step, int n, const PotentialConfig& cfg) {
    double best = 0.0;
    std::vector<cplx> hm = u;
    for (int m = 0; m <= n; ++m) {
        if (m > 0) hm = fd_apply_h(hm, step, cfg);
        for (int k = 0; k + m <= n; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < hm.size(); ++j) s += std::norm(std::pow(double(j) * step, k) * hm[j]);
            best = std::max(best, std::sqrt(s * step));
        }
    }
    return best;
}

struct HunzikerRow {
    double time = 0.0;
    double norm = 0.0;   // ||e^{-iHt/hbar} phi||_n
    double ratio = 0.0;  // norm / (1 + |t|/hbar)^n
};

struct HunzikerReport {
    int n = 0;
    std::vector<HunzikerRow> rows;
    /// Smallest c with ratio <= c ||phi||_n over the table.
    double fitted_constant = 0.0;
    /// "decreasing", "increasing" or "mixed" over the rows in time order.
    std::string trend;
};

/// Empirical check of ||e^{-iHt/hbar} phi||_n <= c_n (1 + |t|/hbar)^n ||phi||_n.
/// The t = 0 row uses the exact norm of phi; other rows evolve phi onto a
/// uniform grid with spacing `step` and use sampled_dn_norm.
inline HunzikerReport hunziker_diagnostic(const TestFunction& phi, int n, const std::vector<double>& times,
                                          const PotentialConfig& cfg, double step = 1e-2) {
    if (n < 0 || n > derivative_budget / 2) throw OrderTooHigh("Hunziker order exceeds the derivative budget");
    HunzikerReport rep;
    rep.n = n;
    const double exact = dn_norm(phi, n, cfg);
    for (double t : times) {
        HunzikerRow row{t, exact, 0.0};
        if (t != 0.0) {
            const auto plan = plan_evolution(phi, t, Generator::full, cfg);
            const auto grid = radial_uniform_grid(plan.r_hi, step, cfg);
            const auto u = evolve(EvolutionRequest{phi, t, Generator::full, Sign::plus}, grid, cfg);
            row.norm = sampled_dn_norm(u.values, step, n, cfg);
        }
        row.ratio = row.norm / std::pow(1.0 + std::abs(t) / cfg.hbar, n);
        rep.rows.push_back(row);
        rep.fitted_constant = std::max(rep.fitted_constant, row.ratio / exact);
    }
    bool up = true, down = true;
    auto sorted = rep.rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        up = up && sorted[i].ratio >= sorted[i - 1].ratio;
        down = down && sorted[i].ratio <= sorted[i - 1].ratio;
    }
    rep.trend = down ? "decreasing" : (up ? "increasing" : "mixed");
    return rep;
}

/// Probability inside r < b of a packet given in the minus basis by a
/// Gaussian energy profile centred at E0, after evolving by each time.
inline std::vector<double> interior_mass_trend(double E0, double width, const std::vector<double>& times,
                                               const PotentialConfig& cfg) {
    const double k_hi = std::sqrt(cfg.c2() * (E0 + 12.0 * width));
    double t_max = 0.0;
    for (double t : times) t_max = std::max(t_max, std::abs(t));
    EnergyGridSpec es;
    es.k_max = k_hi;
    es.time = t_max / cfg.hbar;
    es.extent = cfg.b + 2.0 * k_hi * es.time / cfg.c2() + 10.0;
    const auto grid = energy_grid(cfg, es, [&cfg](double k) { return jost_rate(k, cfg); });
    std::vector<cplx> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = (grid.E[i] - E0) / width;
        values[i] = std::exp(-0.5 * x * x);
    }
    EnergyProfile p{TransformKind::minus, grid, values, cfg, 1e-6};
    const double total = p.norm();
    const auto inner = radial_gl_grid(0.0, cfg.b, 0.02, cfg);
    std::vector<double> out;
    for (double t : times) {
        const auto u = evolve(EvolutionRequest{p, t, Generator::full, Sign::minus}, inner, cfg);
        out.push_back(std::pow(u.norm() / total, 2));
    }
    return out;
}

} // namespace shellscatter
