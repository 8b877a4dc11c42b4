#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shellscatter/errors.hpp"
#include "shellscatter/units.hpp"

namespace shellscatter {

inline constexpr int gl_order = 20;

/// Node offsets and weights of a panel rule on [-1, 1].
struct PanelRule {
    std::vector<double> offset;
    std::vector<double> weight;
};

/// 20-point Gauss-Legendre rule, sorted ascending.
inline const PanelRule& gauss_legendre_rule() {
    static const PanelRule rule = [] {
        using G = boost::math::quadrature::gauss<double, gl_order>;
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        PanelRule r;
        for (std::size_t i = x.size(); i-- > 0;) {
            if (x[i] == 0.0) continue;
            r.offset.push_back(-x[i]);
            r.weight.push_back(w[i]);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.offset.push_back(x[i]);
            r.weight.push_back(w[i]);
        }
        return r;
    }();
    return rule;
}

/// One node per panel at the left edge, weight equal to the panel width.
inline const PanelRule& left_point_rule() {
    static const PanelRule rule{{-1.0}, {2.0}};
    return rule;
}

/// Radial nodes grouped into blocks of equal-width panels. Each block lies
/// inside one constant piece of the potential, so kernels can be evaluated
/// per block with phase recurrences.
struct RadialGrid {
    struct Block {
        double lo = 0.0;
        double width = 0.0;  // panel width
        std::size_t panels = 0;
        int piece = 0;
        const PanelRule* rule = nullptr;
        std::size_t first = 0;  // index of the first node
    };

    std::vector<double> r;
    std::vector<double> w;
    std::vector<Block> blocks;

    std::size_t size() const { return r.size(); }
    double lo() const { return blocks.empty() ? 0.0 : blocks.front().lo; }
    double hi() const {
        return blocks.empty() ? 0.0 : blocks.back().lo + blocks.back().width * double(blocks.back().panels);
    }

    void add_block(double lo, double hi, std::size_t panels, int piece, const PanelRule& rule) {
        if (!(hi > lo) || panels == 0) return;
        Block bl{lo, (hi - lo) / double(panels), panels, piece, &rule, r.size()};
        const double half = 0.5 * bl.width;
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = lo + (double(p) + 0.5) * bl.width;
            for (std::size_t j = 0; j < rule.offset.size(); ++j) {
                r.push_back(mid + half * rule.offset[j]);
                w.push_back(half * rule.weight[j]);
            }
        }
        blocks.push_back(bl);
    }
};

/// Gauss-Legendre panels on [lo, hi], split at every breakpoint and at a and
/// b, with panel width at most max_width.
inline RadialGrid radial_gl_grid(double lo, double hi, double max_width, const PotentialConfig& cfg,
                                 std::vector<double> breaks = {}) {
    if (!(hi > lo) || !(max_width > 0.0)) throw std::invalid_argument("bad radial grid bounds");
    breaks.push_back(lo);
    breaks.push_back(hi);
    breaks.push_back(cfg.a);
    breaks.push_back(cfg.b);
    std::sort(breaks.begin(), breaks.end());
    RadialGrid g;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double x0 = std::max(breaks[i], lo), x1 = std::min(breaks[i + 1], hi);
        if (!(x1 - x0 > 1e-14 * std::max(1.0, std::abs(x1)))) continue;
        const auto n = static_cast<std::size_t>(std::ceil((x1 - x0) / max_width));
        g.add_block(x0, x1, std::max<std::size_t>(n, 1), cfg.piece_index(0.5 * (x0 + x1)), gauss_legendre_rule());
    }
    return g;
}

/// Uniform grid r_j = j * step on [0, hi] with a and b landing on nodes when
/// they are multiples of step; weights are the plain step (rectangle rule).
inline RadialGrid radial_uniform_grid(double hi, double step, const PotentialConfig& cfg) {
    if (!(hi > 0.0) || !(step > 0.0)) throw std::invalid_argument("bad uniform grid");
    RadialGrid g;
    const double cuts[] = {0.0, cfg.a, cfg.b, hi};
    for (int i = 0; i < 3; ++i) {
        const double x0 = cuts[i], x1 = std::min(cuts[i + 1], hi);
        if (!(x1 > x0)) continue;
        const auto n = static_cast<std::size_t>(std::llround((x1 - x0) / step));
        g.add_block(x0, x1, std::max<std::size_t>(n, 1), i, left_point_rule());
        if (x1 >= hi) break;
    }
    return g;
}

/// Energy nodes E = k^2 / c2 from Gauss-Legendre panels in k on [0, k_max],
/// with weights for dE.
struct EnergyGrid {
    std::vector<double> k;
    std::vector<double> E;
    std::vector<double> w;

    std::size_t size() const { return E.size(); }
    double E_min() const { return E.empty() ? 0.0 : E.front(); }
    double E_max() const { return E.empty() ? 0.0 : E.back(); }
};

struct EnergyGridSpec {
    double k_max = 0.0;
    /// Radial extent seen by the integrand; sets the oscillation rate in k.
    double extent = 0.0;
    /// |t| / hbar of an evolution phase exp(-i E t / hbar), if any.
    double time = 0.0;
    /// Total phase allowed per panel.
    double budget = 15.0;
    /// Phase from the time factor allowed per panel; keeps |dE| t / hbar
    /// below pi/4 between neighbouring nodes.
    double time_budget = 9.0;
    /// Allowed panel width times the extra local rate supplied to energy_grid.
    double rate_budget = 1.0;
};

/// `rate(k)`, if given, is an extra local variation rate (1 / length in k);
/// panels are kept below rate_budget / rate.
inline EnergyGrid energy_grid(const PotentialConfig& cfg, const EnergyGridSpec& spec,
                              const std::function<double(double)>& rate = {}) {
    if (!(spec.k_max > 0.0)) throw std::invalid_argument("k_max must be positive");
    const double c2 = cfg.c2();
    const double g = 2.0 * spec.time / c2;  // d(phase)/dk per unit k from the time factor
    const auto& rule = gauss_legendre_rule();
    EnergyGrid grid;
    double k0 = 0.0;
    auto width_at = [&](double k) {
        double wd = spec.budget / (spec.extent + g * k + 1e-300);
        if (g > 0.0) wd = std::min(wd, spec.time_budget / (g * k + 1e-300));
        if (rate) wd = std::min(wd, spec.rate_budget / (rate(k) + 1e-300));
        return std::min(wd, spec.k_max);
    };
    while (k0 < spec.k_max) {
        double wd = width_at(k0);
        wd = std::min(wd, width_at(k0 + wd));
        if (rate) wd = std::min({wd, width_at(k0 + 0.5 * wd), width_at(k0 + wd)});
        double k1 = std::min(k0 + wd, spec.k_max);
        if (spec.k_max - k1 < 0.25 * wd) k1 = spec.k_max;
        const double mid = 0.5 * (k0 + k1), half = 0.5 * (k1 - k0);
        for (std::size_t j = 0; j < rule.offset.size(); ++j) {
            const double k = mid + half * rule.offset[j];
            grid.k.push_back(k);
            grid.E.push_back(k * k / c2);
            grid.w.push_back(half * rule.weight[j] * 2.0 * k / c2);
        }
        k0 = k1;
    }
    return grid;
}

/// Log-spaced energies with trapezoid weights in E (tables, not transforms).
inline EnergyGrid log_energy_grid(double E_min, double E_max, std::size_t n, const PotentialConfig& cfg) {
    if (!(E_min > 0.0) || !(E_max > E_min) || n < 2) throw ConfigError("log grid needs 0 < E_min < E_max, n >= 2");
    EnergyGrid g;
    const double l0 = std::log(E_min), l1 = std::log(E_max);
    for (std::size_t i = 0; i < n; ++i) {
        const double E = i + 1 == n ? E_max : std::exp(l0 + (l1 - l0) * double(i) / double(n - 1));
        g.E.push_back(i == 0 ? E_min : E);
        g.k.push_back(std::sqrt(cfg.c2() * g.E.back()));
    }
    g.w.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (g.E[i + 1] - g.E[i]);
        g.w[i] += h;
        g.w[i + 1] += h;
    }
    return g;
}

inline EnergyGrid linear_energy_grid(double E_min, double E_max, std::size_t n, const PotentialConfig& cfg) {
    if (!(E_min > 0.0) || !(E_max > E_min) || n < 2) throw ConfigError("linear grid needs 0 < E_min < E_max, n >= 2");
    EnergyGrid g;
    for (std::size_t i = 0; i < n; ++i) {
        const double E = i + 1 == n ? E_max : E_min + (E_max - E_min) * double(i) / double(n - 1);
        g.E.push_back(E);
        g.k.push_back(std::sqrt(cfg.c2() * E));
    }
    g.w.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (g.E[i + 1] - g.E[i]);
        g.w[i] += h;
        g.w[i + 1] += h;
    }
    return g;
}

namespace detail {

/// One 15-point Kronrod panel on [lo, hi] with its embedded 7-point Gauss
/// value; nodes and weights come from Boost.
template <class F>
auto kronrod_panel(F& f, double lo, double hi, double& err, double& l1) {
    using R = decltype(f(lo));
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    const R f0 = f(mid);
    R kron = wk[0] * f0;
    R gauss = wg[0] * f0;  // x[0] = 0 is a Gauss node of the 7-point rule
    l1 = wk[0] * std::abs(f0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const R fp = f(mid + half * x[i]), fm = f(mid - half * x[i]);
        kron += wk[i] * (fp + fm);
        l1 += wk[i] * (std::abs(fp) + std::abs(fm));
        if (i % 2 == 0) gauss += wg[i / 2] * (fp + fm);
    }
    err = std::abs(half * (kron - gauss));
    l1 *= half;
    return R(half * kron);
}

} // namespace detail

/// Adaptive 15-point Gauss-Kronrod on [lo, hi] by bisection. Each panel must
/// reach its length share of max(abs_tol, rel_tol * L1), or sit at the
/// roundoff floor of its own L1; otherwise QuadratureFailure is thrown.
template <class F>
auto integrate_adaptive(F&& f, double lo, double hi, double rel_tol = 1e-12, double abs_tol = 0.0,
                        unsigned max_depth = 18) {
    using R = decltype(f(lo));
    if (!(hi > lo)) return R{};
    double err = 0.0, l1 = 0.0;
    const R whole = detail::kronrod_panel(f, lo, hi, err, l1);
    const double target = std::max(abs_tol, rel_tol * l1);
    if (err <= target) return whole;
    const double len = hi - lo;
    const double floor_factor = 64.0 * std::numeric_limits<double>::epsilon();
    R total{};
    auto recurse = [&](auto&& self, double a, double b, unsigned depth) -> void {
        double e = 0.0, m = 0.0;
        const R v = detail::kronrod_panel(f, a, b, e, m);
        const double allowed = std::max(target * (b - a) / len, floor_factor * m);
        if (e <= allowed) {
            total += v;
            return;
        }
        if (depth >= max_depth || !std::isfinite(e))
            throw QuadratureFailure("adaptive quadrature on [" + format_double(lo) + ", " + format_double(hi) +
                                    "] stalled near " + format_double(a) + ": error estimate " + format_double(e));
        const double c = 0.5 * (a + b);
        self(self, a, c, depth + 1);
        self(self, c, b, depth + 1);
    };
    recurse(recurse, lo, hi, 0);
    return total;
}

/// Adaptive integral over consecutive intervals between sorted breakpoints.
template <class F>
auto integrate_pieces(F&& f, const std::vector<double>& breaks, double rel_tol = 1e-12, double abs_tol = 0.0) {
    using R = decltype(f(0.0));
    R total{};
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        total += integrate_adaptive(f, breaks[i], breaks[i + 1], rel_tol, abs_tol);
    return total;
}

/// Worker count: SHELLSCATTER_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("SHELLSCATTER_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker,
/// so results written per index do not depend on the worker count.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += workers) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace shellscatter
