#include <catch_amalgamated.hpp>

#include "shellscatter/scattering.hpp"
#include "helpers.hpp"

using namespace shellscatter;
using test_helpers::uniform;

namespace {

/// Wide random bumps outside the shell keep the scattering grids small.
std::vector<Bump> outer_bumps(const PotentialConfig& cfg, int count, double h_lo = 1.0, double h_hi = 1.5) {
    std::vector<Bump> out;
    double lo = cfg.b + 0.05;
    for (int i = 0; i < count; ++i) {
        const double h = uniform(h_lo, h_hi);
        out.push_back({lo + h, h, {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}});
        lo += 2.0 * h + uniform(0.05, 0.5);
    }
    return out;
}

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_diff(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

} // namespace

TEST_CASE("free potential: Moller and S operators are the identity", "[scattering]") {
    const auto cfg = test_helpers::with_v0(0.0);
    const auto f = make_bump(3.5, 1.2, cplx(1.0, 0.5), cfg);
    const auto plan = plan_scattering(f, cfg);
    const auto sampled = SampledFunction::sample(f, plan.radial);
    for (auto sign : {Sign::plus, Sign::minus})
        CHECK(moller(sign, f, cfg, plan).distance(sampled) < 1e-6 * l2_norm(f));
    CHECK(s_operator(f, cfg, plan).distance(sampled) < 1e-6 * l2_norm(f));
}

TEST_CASE("Moller operators are isometric", "[scattering][property]") {
    const PotentialConfig cfg;
    for (int trial = 0; trial < 2; ++trial) {
        const auto f = make_test_function(outer_bumps(cfg, 1 + trial), cfg);
        const auto plan = plan_scattering(f, cfg);
        for (auto sign : {Sign::plus, Sign::minus}) {
            const auto omega = moller(sign, f, cfg, plan);
            CHECK(omega.warnings.empty());
            CHECK(std::abs(omega.norm() - l2_norm(f)) < 1e-6 * l2_norm(f));
        }
    }
}

TEST_CASE("Moller operators map U0 onto U+-", "[scattering][property]") {
    const PotentialConfig cfg;
    const auto f = moment_free(outer_bumps(cfg, 3), cfg);
    const auto plan = plan_scattering(f, cfg);
    const auto p0 = forward(TransformKind::zero, f, plan.energy, cfg);
    const double scale = max_abs(p0.values);
    for (auto sign : {Sign::plus, Sign::minus}) {
        const auto back = forward(kind_of(sign), moller(sign, f, cfg, plan), plan.energy, cfg);
        CHECK(max_diff(back.values, p0.values) < 1e-6 * scale);
    }
}

TEST_CASE("moment_free removes the first and third moments", "[scattering]") {
    const PotentialConfig cfg;
    const auto f = moment_free(outer_bumps(cfg, 3), cfg);
    for (int n : {1, 3}) {
        const cplx m = integrate_over_support(f, [&](double r) { return std::pow(r, n) * f(r); });
        CHECK(std::abs(m) < 1e-10 * std::pow(10.0, n));
    }
    CHECK_THROWS_AS(moment_free(outer_bumps(cfg, 2), cfg), std::invalid_argument);
}

TEST_CASE("S operator is unitary and acts as S(E) in the energy representation", "[scattering]") {
    const PotentialConfig cfg;
    const auto f = moment_free(outer_bumps(cfg, 3), cfg);
    const auto plan = plan_scattering(f, cfg);
    const auto sf = s_operator(f, cfg, plan);
    CHECK(sf.warnings.empty());
    CHECK(std::abs(sf.norm() - l2_norm(f)) < 1e-6 * l2_norm(f));
    const auto p0 = forward(TransformKind::zero, f, plan.energy, cfg);
    const auto ps = forward(TransformKind::zero, sf, plan.energy, cfg);
    std::vector<cplx> want(p0.size());
    for (std::size_t i = 0; i < p0.size(); ++i) want[i] = s_matrix(plan.energy.E[i], cfg) * p0.values[i];
    CHECK(max_diff(ps.values, want) < 1e-6 * max_abs(p0.values));
}

TEST_CASE("S-matrix elements equal the direct inner product", "[scattering][property]") {
    const PotentialConfig cfg;
    for (int trial = 0; trial < 5; ++trial) {
        const auto psi = test_helpers::random_test_function(cfg, 3, 0.25);
        const auto phi = test_helpers::random_test_function(cfg, 3, 0.25);
        const cplx element = s_matrix_element(psi, phi, cfg);
        CHECK(std::abs(element - direct_inner_product(psi, phi)) < 1e-6 * l2_norm(psi) * l2_norm(phi));
    }
    const auto phi = test_helpers::random_test_function(cfg, 3, 0.25);
    const cplx self = s_matrix_element(phi, phi, cfg);
    CHECK(std::abs(self.imag()) < 1e-6 * std::norm(l2_norm(phi)));
    CHECK(self.real() == Catch::Approx(std::pow(l2_norm(phi), 2)).epsilon(1e-6));

    const auto inner = make_bump(0.5, 0.3, 1.0, cfg), outer = make_bump(4.0, 1.0, cplx(0.0, 1.0), cfg);
    CHECK(std::abs(s_matrix_element(inner, outer, cfg)) < 1e-6 * l2_norm(inner) * l2_norm(outer));

    const auto free_cfg = test_helpers::with_v0(0.0);
    const auto a = make_bump(3.0, 0.8, 1.0, free_cfg), b = make_bump(3.5, 1.0, cplx(1.0, -1.0), free_cfg);
    CHECK(std::abs(s_matrix_element(a, b, free_cfg) - inner_product(a, b)) < 1e-6 * l2_norm(a) * l2_norm(b));
}

TEST_CASE("sandwiched Lippmann-Schwinger residual", "[scattering][oracle]") {
    const PotentialConfig cfg;
    const auto phi = make_bump(1.5, 0.4, 1.0, cfg) + make_bump(3.0, 0.8, cplx(0.5, 1.0), cfg);
    for (double E : {2.0, 5.0, 10.0})
        for (auto sign : {Sign::plus, Sign::minus}) {
            CAPTURE(E);
            const auto res = ls_residual(sign, E, phi, cfg);
            CHECK(res.relative() < 1e-5);
            CHECK(std::abs(res.scattered) > 1e-2 * std::abs(res.lhs));
        }
    // Pairing chi+ with the outgoing-wave kernel of the other sign breaks the equation.
    const auto plus = ls_residual(Sign::plus, 5.0, phi, cfg);
    const auto minus = ls_residual(Sign::minus, 5.0, phi, cfg);
    CHECK(std::abs(plus.lhs - plus.free_part - minus.scattered) > 1e-2 * plus.scale);
    CHECK(ls_residual(Sign::plus, 5.0, phi, test_helpers::with_v0(0.0)).residual < 1e-10);
    CHECK_THROWS_AS(ls_residual(Sign::plus, 4.0, phi, cfg), DegenerateEnergy);
}

TEST_CASE("Moller operator as an energy integral over chi+-", "[scattering]") {
    const PotentialConfig cfg;
    const auto f = make_bump(3.5, 1.2, 1.0, cfg) + make_bump(1.5, 0.45, cplx(0.0, 1.0), cfg);
    for (auto sign : {Sign::plus, Sign::minus}) CHECK(decompose_moller_check(sign, f, cfg) < 1e-6 * l2_norm(f));
    const auto free_cfg = test_helpers::with_v0(0.0);
    CHECK(decompose_moller_check(Sign::plus, make_bump(3.5, 1.2, 1.0, free_cfg), free_cfg) < 1e-6);
}

TEST_CASE("Moller operators intertwine H and H0", "[scattering][property]") {
    const PotentialConfig cfg;
    const auto f = make_test_function(outer_bumps(cfg, 1, 1.8, 2.2), cfg);
    const auto g = make_test_function(outer_bumps(cfg, 1, 1.8, 2.2), cfg);
    for (auto sign : {Sign::plus, Sign::minus}) {
        const auto check = intertwining_check(sign, f, g, cfg);
        CAPTURE(check.full, check.free);
        CHECK(check.relative() < 1e-5);
    }
}
