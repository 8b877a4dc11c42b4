#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "shellscatter/coeffs.hpp"
#include "shellscatter/quadrature.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/waves.hpp"

namespace shellscatter {

enum class TransformKind { plus, minus, zero };

inline const char* to_string(TransformKind k) {
    switch (k) {
    case TransformKind::plus: return "plus";
    case TransformKind::minus: return "minus";
    case TransformKind::zero: return "zero";
    }
    return "unknown";
}

inline TransformKind transform_kind_from_string(const std::string& s) {
    for (auto k : {TransformKind::plus, TransformKind::minus, TransformKind::zero})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown transform kind: " + s);
}

inline TransformKind kind_of(Sign s) { return s == Sign::plus ? TransformKind::plus : TransformKind::minus; }

/// f-hat on an energy grid: the energy representation of a state.
struct EnergyProfile {
    TransformKind kind = TransformKind::plus;
    EnergyGrid grid;
    std::vector<cplx> values;
    PotentialConfig cfg;
    double tolerance = 1e-6;

    std::size_t size() const { return values.size(); }

    /// sqrt(sum w |f-hat|^2).
    double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += grid.w[i] * std::norm(values[i]);
        return std::sqrt(s);
    }

    /// Bra <E| acting on the profile: the stored value at node E. Only grid
    /// energies are admissible; anything else throws.
    cplx at(double E) const {
        const auto it = std::lower_bound(grid.E.begin(), grid.E.end(), E);
        if (it == grid.E.end() || *it != E) throw std::out_of_range("energy is not a profile node");
        return values[static_cast<std::size_t>(it - grid.E.begin())];
    }

    /// Multiplies node i by g(E_i).
    template <class G>
    EnergyProfile multiplied(G&& g) const {
        EnergyProfile out = *this;
        for (std::size_t i = 0; i < values.size(); ++i) out.values[i] *= g(grid.E[i]);
        return out;
    }
};

/// Radial samples on a quadrature grid.
struct SampledFunction {
    RadialGrid grid;
    std::vector<cplx> values;
    std::vector<std::string> warnings;

    std::size_t size() const { return values.size(); }

    double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += grid.w[i] * std::norm(values[i]);
        return std::sqrt(s);
    }

    /// integral of conj(this) * other on the shared grid.
    cplx inner(const SampledFunction& other) const {
        cplx s{};
        for (std::size_t i = 0; i < values.size(); ++i) s += grid.w[i] * std::conj(values[i]) * other.values[i];
        return s;
    }

    /// L2 distance on the grid.
    double distance(const SampledFunction& other) const {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += grid.w[i] * std::norm(values[i] - other.values[i]);
        return std::sqrt(s);
    }

    static SampledFunction sample(const TestFunction& f, const RadialGrid& grid) {
        SampledFunction s{grid, std::vector<cplx>(grid.size()), {}};
        for (std::size_t i = 0; i < grid.size(); ++i) s.values[i] = f(grid.r[i]);
        return s;
    }
};

namespace detail {

/// u = c1 e^{iq(r-ref)} + c2 e^{-iq(r-ref)}.
struct ExpPiece {
    cplx q{};
    double ref = 0.0;
    cplx c1{}, c2{};
};

/// Transform kernel chi_kind(r; E) at one real energy, in exponential form
/// per piece. Inside the E = V0 window the shell piece has no usable
/// exponential form and the wave is evaluated directly.
struct KernelSlice {
    std::array<ExpPiece, 3> piece{};
    std::optional<PiecewiseWave> wave;
    bool direct = false;
    bool differentiated = false;

    cplx value(double r) const { return differentiated ? wave->derivative(r) : wave->value(r); }

    /// d/dr of the kernel.
    KernelSlice derivative() const {
        KernelSlice d = *this;
        d.differentiated = true;
        for (auto& p : d.piece) {
            p.c1 *= I * p.q;
            p.c2 *= -I * p.q;
        }
        return d;
    }
};

inline KernelSlice make_kernel_slice(TransformKind kind, double E, const PotentialConfig& cfg) {
    KernelSlice ks;
    bool limit = false;
    if (kind == TransformKind::zero) {
        ks.wave = free_chi0(E, cfg);
    } else {
        const auto cs = compute_coefficients(E, cfg);
        limit = cs.limit_rule;
        ks.wave = chi_pm(kind == TransformKind::plus ? Sign::plus : Sign::minus, cs, cfg);
    }
    ks.direct = limit;
    if (!limit) {
        for (int i = 0; i < 3; ++i) {
            WavePiece p = ks.wave->piece(i);
            if (p.form == WavePiece::Form::cauchy) p = WavePiece::split(p.q, p.r_ref, {p.c1, p.c2});
            ks.piece[static_cast<std::size_t>(i)] = {p.q, p.r_ref, p.c1, p.c2};
        }
    }
    return ks;
}

inline std::vector<KernelSlice> make_kernels(TransformKind kind, const EnergyGrid& grid, const PotentialConfig& cfg) {
    std::vector<KernelSlice> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { out[i] = make_kernel_slice(kind, grid.E[i], cfg); });
    return out;
}

/// Visits panels [p0, p1) of one block. For exponential kernels,
/// panel(base, A, B, tp, tm) receives the kernel as A tp[j] + B tm[j] at
/// node base + j; otherwise node(index, value) is called per node. Phases
/// advance by recurrence from the panel midpoints and are recomputed
/// directly every 16 panels.
template <class PanelFn, class NodeFn>
void visit_block(const KernelSlice& ks, const RadialGrid& grid, const RadialGrid::Block& bl, std::size_t p0,
                 std::size_t p1, PanelFn&& panel, NodeFn&& node) {
    const PanelRule& rule = *bl.rule;
    const std::size_t m = rule.offset.size();
    if (ks.direct) {
        for (std::size_t p = p0; p < p1; ++p)
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t idx = bl.first + p * m + j;
                node(idx, ks.value(grid.r[idx]));
            }
        return;
    }
    const ExpPiece& e = ks.piece[static_cast<std::size_t>(bl.piece)];
    const double half = 0.5 * bl.width;
    std::array<cplx, 32> tp{}, tm{};
    for (std::size_t j = 0; j < m; ++j) exp_pair(e.q, half * rule.offset[j], tp[j], tm[j]);
    cplx step_p, step_m;
    exp_pair(e.q, bl.width, step_p, step_m);
    cplx A{}, B{};
    for (std::size_t p = p0; p < p1; ++p) {
        if (p == p0 || (p - p0) % 16 == 0) {
            cplx ep, em;
            exp_pair(e.q, bl.lo + (double(p) + 0.5) * bl.width - e.ref, ep, em);
            A = e.c1 * ep;
            B = e.c2 * em;
        } else {
            A *= step_p;
            B *= step_m;
        }
        panel(bl.first + p * m, m, A, B, tp, tm);
    }
}

/// Evaluates the kernel on panels [p0, p1) of one block, calling
/// sink(node_index, value).
template <class Sink>
void eval_block(const KernelSlice& ks, const RadialGrid& grid, const RadialGrid::Block& bl, std::size_t p0,
                std::size_t p1, Sink&& sink) {
    visit_block(
        ks, grid, bl, p0, p1,
        [&](std::size_t base, std::size_t m, cplx A, cplx B, const std::array<cplx, 32>& tp,
            const std::array<cplx, 32>& tm) {
            for (std::size_t j = 0; j < m; ++j) sink(base + j, A * tp[j] + B * tm[j]);
        },
        sink);
}

/// Work units of at most 64 panels, in grid order.
struct PanelRange {
    std::size_t block, p0, p1;
};

inline std::vector<PanelRange> panel_ranges(const RadialGrid& grid) {
    std::vector<PanelRange> out;
    for (std::size_t b = 0; b < grid.blocks.size(); ++b)
        for (std::size_t p = 0; p < grid.blocks[b].panels; p += 64)
            out.push_back({b, p, std::min(p + 64, grid.blocks[b].panels)});
    return out;
}

/// out[i] = sum_n weighted[n] conj(K_i(r_n)). The node loops are written
/// in real arithmetic so they vectorise.
inline std::vector<cplx> project(const std::vector<KernelSlice>& kernels, const RadialGrid& grid,
                                 const std::vector<cplx>& weighted) {
    std::vector<cplx> out(kernels.size());
    const double* wv = reinterpret_cast<const double*>(weighted.data());
    parallel_for(kernels.size(), [&](std::size_t i) {
        cplx s{};
        for (const auto& bl : grid.blocks)
            visit_block(
                kernels[i], grid, bl, 0, bl.panels,
                [&](std::size_t base, std::size_t m, cplx A, cplx B, const std::array<cplx, 32>& tp,
                    const std::array<cplx, 32>& tm) {
                    // sum_j w_j conj(tp_j) and sum_j w_j conj(tm_j)
                    double pr = 0, pi = 0, mr = 0, mi = 0;
                    const double* w = wv + 2 * base;
                    for (std::size_t j = 0; j < m; ++j) {
                        const double a = w[2 * j], b = w[2 * j + 1];
                        const double tr = tp[j].real(), ti = tp[j].imag();
                        const double ur = tm[j].real(), ui = tm[j].imag();
                        pr += a * tr + b * ti;
                        pi += b * tr - a * ti;
                        mr += a * ur + b * ui;
                        mi += b * ur - a * ui;
                    }
                    s += std::conj(A) * cplx(pr, pi) + std::conj(B) * cplx(mr, mi);
                },
                [&](std::size_t n, cplx v) { s += weighted[n] * std::conj(v); });
        out[i] = s;
    });
    return out;
}

/// u(r_n) = sum_i coeff[i] K_i(r_n).
inline std::vector<cplx> synthesize(const std::vector<KernelSlice>& kernels, const std::vector<cplx>& coeff,
                                    const RadialGrid& grid) {
    std::vector<cplx> u(grid.size());
    double* uv = reinterpret_cast<double*>(u.data());
    const auto ranges = panel_ranges(grid);
    parallel_for(ranges.size(), [&](std::size_t t) {
        const auto& pr = ranges[t];
        const auto& bl = grid.blocks[pr.block];
        for (std::size_t i = 0; i < kernels.size(); ++i) {
            if (coeff[i] == cplx(0.0)) continue;
            const cplx c = coeff[i];
            visit_block(
                kernels[i], grid, bl, pr.p0, pr.p1,
                [&](std::size_t base, std::size_t m, cplx A, cplx B, const std::array<cplx, 32>& tp,
                    const std::array<cplx, 32>& tm) {
                    const cplx cA = c * A, cB = c * B;
                    const double ar = cA.real(), ai = cA.imag(), br = cB.real(), bi = cB.imag();
                    double* out = uv + 2 * base;
                    for (std::size_t j = 0; j < m; ++j) {
                        const double tr = tp[j].real(), ti = tp[j].imag();
                        const double vr = tm[j].real(), vi = tm[j].imag();
                        out[2 * j] += ar * tr - ai * ti + br * vr - bi * vi;
                        out[2 * j + 1] += ar * ti + ai * tr + br * vi + bi * vr;
                    }
                },
                [&](std::size_t n, cplx v) { u[n] += c * v; });
        }
    });
    return u;
}

} // namespace detail

/// Spectral cutoff q = k * halfwidth beyond which a mollifier bump keeps at
/// most `mass` of its squared sine-transform norm.
inline double spectral_cutoff(double mass) {
    const double d = -std::log10(std::max(mass, 1e-300)) / 0.96;
    return std::max(d * d, 4.0);
}

/// |d log J+ / dk|: large near zeros of the Jost function (resonances),
/// where the transform kernels vary quickly in energy.
inline double jost_rate(double k, const PotentialConfig& cfg) {
    if (cfg.V0 == 0.0) return 0.0;
    const double c2 = cfg.c2();
    const double kk = std::max(k, 1e-4);
    const double dk = 1e-5 * std::max(kk, 1.0);
    auto logj = [&](double q) {
        double E = q * q / c2;
        if (std::abs(E - cfg.V0) < 1e-9) E = cfg.V0 + 1e-9;
        return std::log(compute_coefficients(E, cfg).jost_plus);
    };
    cplx d = logj(kk + dk) - logj(std::max(kk - dk, 0.5 * kk));
    d /= (kk + dk) - std::max(kk - dk, 0.5 * kk);
    // log is taken on the principal branch; a 2 pi jump means an unresolved phase wrap.
    if (std::abs(d.imag()) * dk > 3.0) d = {d.real(), 0.0};
    return std::abs(d);
}

struct TransformOptions {
    double tolerance = 1e-6;
    /// Phase allowed per Gauss-Legendre panel, radial and energy.
    double budget = 15.0;
    /// Radial room past the last support, for outputs that leak out of it.
    double extra_extent = 2.0;
    /// Largest |t|/hbar the energy grid must resolve.
    double time = 0.0;
};

/// Energy and radial grids sized for a test function.
struct TransformPlan {
    EnergyGrid energy;
    RadialGrid radial;
    double k_max = 0.0;
    double r_hi = 0.0;
};

inline TransformPlan plan_transform(const TestFunction& f, const PotentialConfig& cfg, const TransformOptions& opt = {}) {
    if (f.empty()) throw std::invalid_argument("cannot plan grids for the zero function");
    const double tol = opt.tolerance;
    const double h = f.min_halfwidth();
    const double c2 = cfg.c2();
    TransformPlan plan;
    plan.k_max = (spectral_cutoff(1e-2 * tol * tol) + 8.0 * f.order()) / h;
    const double k_spread = spectral_cutoff(0.1 * tol) / h;
    plan.r_hi = std::max(f.support_max(), cfg.b) + opt.extra_extent + 2.0 * k_spread * opt.time / c2;
    EnergyGridSpec es;
    es.k_max = plan.k_max;
    es.extent = plan.r_hi + std::max(f.support_max(), cfg.b);
    es.time = opt.time;
    es.budget = opt.budget;
    plan.energy = energy_grid(cfg, es, [&cfg](double k) { return jost_rate(k, cfg); });
    plan.radial = radial_gl_grid(0.0, plan.r_hi, opt.budget / plan.k_max, cfg, f.breakpoints());
    return plan;
}

/// Radial grid covering only the supports of f, for forward transforms.
inline RadialGrid support_grid(const TestFunction& f, double k_max, const PotentialConfig& cfg, double budget = 15.0) {
    RadialGrid g;
    const double width = std::min(budget / k_max, f.min_halfwidth() / 6.0);
    const auto& rule = gauss_legendre_rule();
    for (auto [lo, hi] : f.smooth_intervals()) {
        const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        g.add_block(lo, hi, std::max<std::size_t>(n, 1), cfg.piece_index(0.5 * (lo + hi)), rule);
    }
    return g;
}

/// (U_kind f)(E) = integral of f(r) conj(chi_kind(r;E)) at every grid energy.
inline EnergyProfile forward(TransformKind kind, const TestFunction& f, const EnergyGrid& grid,
                             const PotentialConfig& cfg, double tolerance = 1e-6) {
    const double k_top = grid.k.empty() ? 1.0 : grid.k.back();
    const RadialGrid rg = support_grid(f, std::max(k_top, 1.0), cfg);
    std::vector<cplx> weighted(rg.size());
    for (std::size_t n = 0; n < rg.size(); ++n) weighted[n] = rg.w[n] * f(rg.r[n]);
    const auto kernels = detail::make_kernels(kind, grid, cfg);
    return {kind, grid, detail::project(kernels, rg, weighted), cfg, tolerance};
}

/// Forward transform of radial samples (weights taken from their grid).
inline EnergyProfile forward(TransformKind kind, const SampledFunction& f, const EnergyGrid& grid,
                             const PotentialConfig& cfg, double tolerance = 1e-6) {
    std::vector<cplx> weighted(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) weighted[n] = f.grid.w[n] * f.values[n];
    const auto kernels = detail::make_kernels(kind, grid, cfg);
    return {kind, grid, detail::project(kernels, f.grid, weighted), cfg, tolerance};
}

/// Relative size of the profile over the top 5% of its k range.
inline double tail_fraction(const EnergyProfile& p) {
    if (p.grid.k.empty()) return 0.0;
    const double k_cut = 0.95 * p.grid.k.back();
    double tail = 0.0, total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = p.grid.w[i] * std::norm(p.values[i]);
        total += m;
        if (p.grid.k[i] >= k_cut) tail += m;
    }
    return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

/// f(r) = integral dE f-hat(E) chi_kind(r;E) on the nodes of `grid`.
inline SampledFunction inverse(TransformKind kind, const EnergyProfile& profile, const RadialGrid& grid,
                               const PotentialConfig& cfg) {
    SampledFunction out{grid, {}, {}};
    std::vector<cplx> coeff(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) coeff[i] = profile.grid.w[i] * profile.values[i];
    const auto kernels = detail::make_kernels(kind, profile.grid, cfg);
    out.values = detail::synthesize(kernels, coeff, grid);
    const double tail = tail_fraction(profile);
    if (tail > 0.1 * profile.tolerance)
        out.warnings.push_back("TruncationWarning: profile tail fraction " + format_double(tail) +
                               " exceeds tolerance/10");
    return out;
}

/// d/dr of the inverse transform, from the differentiated kernels.
inline SampledFunction inverse_derivative(TransformKind kind, const EnergyProfile& profile, const RadialGrid& grid,
                                          const PotentialConfig& cfg) {
    std::vector<cplx> coeff(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) coeff[i] = profile.grid.w[i] * profile.values[i];
    auto kernels = detail::make_kernels(kind, profile.grid, cfg);
    for (auto& k : kernels) k = k.derivative();
    return {grid, detail::synthesize(kernels, coeff, grid), {}};
}

/// <phi|E kind> = integral of conj(phi(r)) chi_kind(r;E), adaptive in r.
inline cplx ket_action(TransformKind kind, double E, const TestFunction& phi, const PotentialConfig& cfg) {
    require_positive_energy(E);
    const PiecewiseWave chi = kind == TransformKind::zero
                                  ? free_chi0(E, cfg)
                                  : chi_pm(kind == TransformKind::plus ? Sign::plus : Sign::minus, E, cfg);
    return integrate_over_support(phi, [&](double r) { return std::conj(phi(r)) * chi(r); });
}

/// Same functional on radial samples.
inline cplx ket_action(TransformKind kind, double E, const SampledFunction& phi, const PotentialConfig& cfg) {
    require_positive_energy(E);
    const auto ks = detail::make_kernel_slice(kind, E, cfg);
    cplx s{};
    for (const auto& bl : phi.grid.blocks)
        detail::eval_block(ks, phi.grid, bl, 0, bl.panels,
                           [&](std::size_t n, cplx v) { s += phi.grid.w[n] * std::conj(phi.values[n]) * v; });
    return s;
}

/// <kind E|phi> = conj(<phi|E kind>).
inline cplx bra_action(TransformKind kind, double E, const TestFunction& phi, const PotentialConfig& cfg) {
    return std::conj(ket_action(kind, E, phi, cfg));
}

/// |<h phi|E> - E <phi|E>|, with h phi applied in closed form.
inline double eigen_residual(TransformKind kind, double E, const TestFunction& phi, const PotentialConfig& cfg) {
    const PotentialConfig eff = kind == TransformKind::zero ? PotentialConfig{cfg.a, cfg.b, 0.0, cfg.hbar, cfg.mass} : cfg;
    const TestFunction hphi = apply_H(phi, eff, 1);
    return std::abs(ket_action(kind, E, hphi, cfg) - E * ket_action(kind, E, phi, cfg));
}

} // namespace shellscatter
