#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "shellscatter/errors.hpp"
#include "shellscatter/quadrature.hpp"
#include "shellscatter/units.hpp"
#include "shellscatter/waves.hpp"

namespace shellscatter {

/// Default number of derivatives a test function may carry.
inline constexpr int derivative_budget = 8;
/// Beyond this order the mollifier polynomials lose too many digits in double.
inline constexpr int derivative_hard_limit = 12;

namespace detail {

/// Coefficients of P_n with psi^(n)(x) = P_n(x) psi(x) / (1 - x^2)^(2n),
/// psi(x) = exp(-1/(1-x^2)). P_{n+1} = P_n' u^2 + 4 n x u P_n - 2 x P_n, u = 1 - x^2.
inline const std::vector<std::vector<double>>& mollifier_polynomials() {
    static const auto table = [] {
        std::vector<std::vector<double>> P{{1.0}};
        for (int n = 0; n < derivative_hard_limit; ++n) {
            const auto& p = P.back();
            std::vector<double> next(p.size() + 3, 0.0);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double c = p[i];
                if (i > 0) {
                    // i c x^{i-1} (1 - 2x^2 + x^4)
                    const double d = double(i) * c;
                    next[i - 1] += d;
                    next[i + 1] -= 2.0 * d;
                    next[i + 3] += d;
                }
                // 4n x (1 - x^2) c x^i - 2 x c x^i
                next[i + 1] += (4.0 * n - 2.0) * c;
                next[i + 3] -= 4.0 * n * c;
            }
            while (next.size() > 1 && next.back() == 0.0) next.pop_back();
            P.push_back(std::move(next));
        }
        return P;
    }();
    return table;
}

/// n-th derivative of exp(-1/(1-x^2)) on |x| < 1, zero outside.
inline double mollifier(double x, int n) {
    const double u = 1.0 - x * x;
    if (!(u > 0.0)) return 0.0;
    const auto& p = mollifier_polynomials()[static_cast<std::size_t>(n)];
    double poly = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) poly = poly * x + p[i];
    const double expo = -1.0 / u - 2.0 * n * std::log(u);
    return expo < -745.0 ? 0.0 : poly * std::exp(expo);
}

} // namespace detail

/// One mollifier component: amplitude * exp(-1/(1-x^2)), x = (r - center)/halfwidth.
struct Bump {
    double center = 0.0;
    double halfwidth = 0.0;
    cplx amplitude{};

    double lo() const { return center - halfwidth; }
    double hi() const { return center + halfwidth; }
    bool operator==(const Bump&) const = default;
};

/// Finite sum of bumps, each optionally acted on by a constant-coefficient
/// differential polynomial: term value = sum_n d[n] * (d/dr)^n bump(r).
/// Closed under d/dr and under h, since V is constant on every support.
class TestFunction {
  public:
    struct Term {
        Bump bump;
        int piece = 0;
        std::vector<cplx> d{1.0};
    };

    TestFunction() = default;
    TestFunction(std::vector<Term> terms, double support_bound)
        : terms_(std::move(terms)), support_bound_(support_bound) {}

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    /// R_max: declared outer limit of the supports.
    double support_bound() const { return support_bound_; }

    std::vector<Bump> bumps() const {
        std::vector<Bump> out;
        for (const auto& t : terms_) out.push_back(t.bump);
        return out;
    }

    /// True when every term is an undifferentiated bump.
    bool is_plain() const {
        for (const auto& t : terms_)
            if (t.d.size() != 1 || t.d[0] != cplx(1.0)) return false;
        return true;
    }

    int order() const {
        int o = 0;
        for (const auto& t : terms_) o = std::max(o, static_cast<int>(t.d.size()) - 1);
        return o;
    }

    cplx value(double r) const { return derivative_value(r, 0); }
    cplx operator()(double r) const { return value(r); }

    /// Closed-form n-th derivative at r.
    cplx derivative_value(double r, int n) const {
        cplx sum{};
        for (const auto& t : terms_) {
            const double h = t.bump.halfwidth;
            const double x = (r - t.bump.center) / h;
            if (!(std::abs(x) < 1.0)) continue;
            for (std::size_t j = 0; j < t.d.size(); ++j) {
                if (t.d[j] == cplx(0.0)) continue;
                const int order = static_cast<int>(j) + n;
                if (order > derivative_hard_limit) throw OrderTooHigh("derivative order above hard limit");
                sum += t.d[j] * t.bump.amplitude * detail::mollifier(x, order) / std::pow(h, order);
            }
        }
        return sum;
    }

    /// n-th derivative as a new test function.
    TestFunction derivative(int n, int budget = derivative_budget) const {
        if (n < 0) throw std::invalid_argument("derivative order must be >= 0");
        budget = std::min(budget, derivative_hard_limit);
        if (order() + n > budget)
            throw OrderTooHigh("derivative order " + std::to_string(order() + n) + " exceeds budget " +
                               std::to_string(budget));
        TestFunction out = *this;
        for (auto& t : out.terms_) t.d.insert(t.d.begin(), static_cast<std::size_t>(n), cplx(0.0));
        return out;
    }

    TestFunction scaled(cplx f) const {
        TestFunction out = *this;
        for (auto& t : out.terms_)
            for (auto& c : t.d) c *= f;
        return out;
    }

    friend TestFunction operator+(const TestFunction& x, const TestFunction& y) {
        TestFunction out = x;
        out.terms_.insert(out.terms_.end(), y.terms_.begin(), y.terms_.end());
        out.support_bound_ = std::max(x.support_bound_, y.support_bound_);
        return out;
    }
    friend TestFunction operator*(cplx f, const TestFunction& x) { return x.scaled(f); }
    friend TestFunction operator-(const TestFunction& x, const TestFunction& y) { return x + y.scaled(-1.0); }

    double support_min() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& t : terms_) m = std::min(m, t.bump.lo());
        return m;
    }
    double support_max() const {
        double m = 0.0;
        for (const auto& t : terms_) m = std::max(m, t.bump.hi());
        return m;
    }
    double min_halfwidth() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& t : terms_) m = std::min(m, t.bump.halfwidth);
        return m;
    }

    /// Sorted edges and centres of all bumps; the function is smooth between them.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& t : terms_) {
            b.push_back(t.bump.lo());
            b.push_back(t.bump.center);
            b.push_back(t.bump.hi());
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// Breakpoints restricted to intervals where some bump is nonzero.
    std::vector<std::pair<double, double>> smooth_intervals() const {
        const auto b = breakpoints();
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            const double mid = 0.5 * (b[i] + b[i + 1]);
            for (const auto& t : terms_)
                if (mid > t.bump.lo() && mid < t.bump.hi()) {
                    out.emplace_back(b[i], b[i + 1]);
                    break;
                }
        }
        return out;
    }

  private:
    std::vector<Term> terms_;
    double support_bound_ = 0.0;
};

/// A single bump, validated against the piece structure of the potential.
inline TestFunction make_bump(double center, double halfwidth, cplx amplitude, const PotentialConfig& cfg,
                              double r_max = std::numeric_limits<double>::infinity()) {
    cfg.validate();
    constexpr double margin = 1e-6;
    if (!(halfwidth > 0.0) || !std::isfinite(center) || !std::isfinite(halfwidth))
        throw SupportViolation("bump halfwidth must be positive and finite");
    const double lo = center - halfwidth, hi = center + halfwidth;
    int piece = -1;
    if (lo >= margin && hi <= cfg.a - margin) piece = 0;
    else if (lo >= cfg.a + margin && hi <= cfg.b - margin) piece = 1;
    else if (lo >= cfg.b + margin && hi <= r_max - margin) piece = 2;
    if (piece < 0)
        throw SupportViolation("bump support [" + format_double(lo) + ", " + format_double(hi) +
                               "] must lie inside one of (0,a), (a,b), (b,R_max) with margin 1e-6");
    const double bound = std::isfinite(r_max) ? r_max : hi;
    return TestFunction({{Bump{center, halfwidth, amplitude}, piece, {1.0}}}, bound);
}

/// Rebuilds a test function from plain bumps (checks every support).
inline TestFunction make_test_function(const std::vector<Bump>& bumps, const PotentialConfig& cfg,
                                       double r_max = std::numeric_limits<double>::infinity()) {
    TestFunction out;
    for (const auto& b : bumps) out = out + make_bump(b.center, b.halfwidth, b.amplitude, cfg, r_max);
    return out;
}

/// h^m phi with h = -(1/c2) d^2/dr^2 + V, applied term by term.
inline TestFunction apply_H(const TestFunction& phi, const PotentialConfig& cfg, int m = 1,
                            int budget = derivative_budget) {
    if (m < 0) throw std::invalid_argument("power must be >= 0");
    budget = std::min(budget, derivative_hard_limit);
    if (phi.order() + 2 * m > budget)
        throw OrderTooHigh("h^" + std::to_string(m) + " needs derivative order " +
                           std::to_string(phi.order() + 2 * m) + " > budget " + std::to_string(budget));
    const double c2 = cfg.c2();
    auto terms = phi.terms();
    for (auto& t : terms) {
        const double V = cfg.piece_potential(t.piece);
        for (int step = 0; step < m; ++step) {
            std::vector<cplx> next(t.d.size() + 2, 0.0);
            for (std::size_t j = 0; j < t.d.size(); ++j) {
                next[j] += V * t.d[j];
                next[j + 2] -= t.d[j] / c2;
            }
            t.d = std::move(next);
        }
    }
    return TestFunction(std::move(terms), phi.support_bound());
}

/// Integral of g over the supports of phi (adaptive, split at bump edges and centres).
template <class G>
cplx integrate_over_support(const TestFunction& phi, G&& g, double rel_tol = 1e-12) {
    cplx total{};
    for (auto [lo, hi] : phi.smooth_intervals()) total += integrate_adaptive(g, lo, hi, rel_tol);
    return total;
}

/// (psi, phi) = integral of conj(psi) phi.
inline cplx inner_product(const TestFunction& psi, const TestFunction& phi, double rel_tol = 1e-12) {
    const TestFunction both = psi + phi;
    return integrate_over_support(both, [&](double r) { return std::conj(psi(r)) * phi(r); }, rel_tol);
}

inline double l2_norm(const TestFunction& phi) {
    const double s = integrate_over_support(phi, [&](double r) { return cplx(std::norm(phi(r))); }).real();
    return std::sqrt(std::max(s, 0.0));
}

/// ||phi||_{n,m} = || (1+r)^n (1+h)^m phi ||.
inline double phi_norm(const TestFunction& phi, int n, int m, const PotentialConfig& cfg) {
    if (n < 0 || m < 0) throw std::invalid_argument("norm indices must be >= 0");
    TestFunction g;
    TestFunction hp = phi;
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
        g = g + hp.scaled(binom);
        if (j < m) {
            hp = apply_H(hp, cfg, 1);
            binom = binom * double(m - j) / double(j + 1);
        }
    }
    const double s = integrate_over_support(g, [&](double r) {
                         return cplx(std::norm(std::pow(1.0 + r, n) * g(r)));
                     }).real();
    return std::sqrt(std::max(s, 0.0));
}

/// D_n norm: max over k + m <= n of || r^k h^m phi ||.
inline double dn_norm(const TestFunction& phi, int n, const PotentialConfig& cfg) {
    if (n < 0) throw std::invalid_argument("norm index must be >= 0");
    double best = 0.0;
    TestFunction hm = phi;
    for (int m = 0; m <= n; ++m) {
        if (m > 0) hm = apply_H(hm, cfg, 1);
        for (int k = 0; k + m <= n; ++k) {
            const double s = integrate_over_support(hm, [&](double r) {
                                 return cplx(std::norm(std::pow(r, k) * hm(r)));
                             }).real();
            best = std::max(best, std::sqrt(std::max(s, 0.0)));
        }
    }
    return best;
}

/// C(E) = sup_r |chi+-(r;E)|: 4096 samples on (0, 3b] combined with the
/// bound N (|J3| + |J4|) / |J+-| that holds for all r > b.
inline double continuity_constant(Sign sign, double E, const PotentialConfig& cfg) {
    const auto cs = compute_coefficients(E, cfg);
    const auto chi = chi_pm(sign, cs, cfg);
    double best = 0.0;
    constexpr int samples = 4096;
    for (int i = 1; i <= samples; ++i) best = std::max(best, std::abs(chi(3.0 * cfg.b * i / samples)));
    const double N = normalization(E, cfg).value;
    const cplx jost = sign == Sign::plus ? cs.jost_plus : cs.jost_minus;
    return std::max(best, N * (std::abs(cs.J3) + std::abs(cs.J4)) / std::abs(jost));
}

} // namespace shellscatter
