#include <catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include "shellscatter/evolution.hpp"
#include "helpers.hpp"

using namespace shellscatter;

namespace {

// Wide packets keep the time-resolving grids small: their cost grows like |t| k_max^2.
TestFunction wide_packet(const PotentialConfig& cfg) { return make_bump(6.05, 4.0, cplx(1.0, 0.5), cfg); }

} // namespace

TEST_CASE("t = 0 is the identity", "[evolution]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    for (auto gen : {Generator::full, Generator::free}) {
        const auto plan = plan_evolution(f, 0.0, gen, cfg);
        const auto u = evolve(EvolutionRequest{f, 0.0, gen, Sign::plus}, plan.radial, cfg);
        CHECK(u.distance(SampledFunction::sample(f, plan.radial)) < 1e-6 * l2_norm(f));
    }
}

TEST_CASE("evolution conserves the norm", "[evolution][property]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    const double nf = l2_norm(f);
    for (double t : {1.0, -1.0, 10.0, -10.0}) {
        CAPTURE(t);
        const auto u = evolve(f, t, Generator::full, Sign::plus, cfg);
        CHECK(u.warnings.empty());
        CHECK(std::abs(u.norm() - nf) < 1e-6 * nf);
    }
    for (double t : {1.0, -1.0}) {
        CHECK(std::abs(evolve(f, t, Generator::full, Sign::minus, cfg).norm() - nf) < 1e-6 * nf);
        CHECK(std::abs(evolve(f, t, Generator::free, Sign::plus, cfg).norm() - nf) < 1e-6 * nf);
    }
}

TEST_CASE("group law", "[evolution]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    const double nf = l2_norm(f);

    const auto plan2 = plan_evolution(f, 2.0, Generator::full, cfg);
    const auto once = evolve(EvolutionRequest{f, 2.0, Generator::full, Sign::plus}, plan2.radial, cfg);
    const auto half = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::plus}, plan2.radial, cfg);
    const auto half_profile = forward(TransformKind::plus, half, plan2.energy, cfg);
    const auto twice = evolve(EvolutionRequest{half_profile, 1.0, Generator::full, Sign::plus}, plan2.radial, cfg);
    CHECK(twice.distance(once) < 2e-6 * nf);

    // evolve(10) after evolve(-1) against evolve(9), all on the t = 10 grids so
    // the intermediate state is fully contained.
    const auto plan10 = plan_evolution(f, 10.0, Generator::full, cfg);
    const auto p = forward(TransformKind::plus, f, plan10.energy, cfg);
    const auto step1 = evolve(EvolutionRequest{p, -1.0, Generator::full, Sign::plus}, plan10.radial, cfg);
    const auto p1 = forward(TransformKind::plus, step1, plan10.energy, cfg);
    const auto step2 = evolve(EvolutionRequest{p1, 10.0, Generator::full, Sign::plus}, plan10.radial, cfg);
    const auto direct = evolve(EvolutionRequest{p, 9.0, Generator::full, Sign::plus}, plan10.radial, cfg);
    CHECK(step2.distance(direct) < 2e-6 * nf);
}

TEST_CASE("kets and bras pick up the energy phase", "[evolution]") {
    const PotentialConfig cfg;
    const auto phi = wide_packet(cfg);
    for (double t : {1.0, -1.0, 10.0, -10.0})
        for (auto sign : {Sign::plus, Sign::minus}) {
            const auto back = evolve(phi, -t, Generator::full, sign, cfg);
            for (double E : {0.7, 5.0}) {
                CAPTURE(t, E);
                const double scale = phase_check_scale(sign, E, phi, cfg);
                CHECK(ket_phase_residual(kind_of(sign), E, t, phi, back, cfg) < 1e-6 * scale);
                CHECK(bra_phase_residual(kind_of(sign), E, t, phi, back, cfg) < 1e-6 * scale);
            }
            if (std::abs(t) > 1.0) break;  // the minus basis is covered at |t| = 1
        }
    CHECK(ket_phase_check(Sign::plus, 5.0, 0.0, phi, cfg) == 0.0);
    CHECK(ket_phase_check(Sign::plus, 5.0, 1.0, phi, cfg, Generator::free) <
          1e-6 * phase_check_scale(Sign::plus, 5.0, phi, cfg));
    CHECK(bra_phase_check(Sign::minus, 2.0, -1.0, phi, cfg) < 1e-6 * phase_check_scale(Sign::minus, 2.0, phi, cfg));
}

TEST_CASE("plus and minus bases evolve the same state", "[evolution][property]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    const auto plan = plan_evolution(f, 1.0, Generator::full, cfg);
    const auto up = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::plus}, plan.radial, cfg);
    const auto down = evolve(EvolutionRequest{f, 1.0, Generator::full, Sign::minus}, plan.radial, cfg);
    CHECK(up.distance(down) < 2e-6 * l2_norm(f));
}

TEST_CASE("coarse energy grids raise a refinement warning", "[evolution]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    const auto coarse = linear_energy_grid(0.01, 10.0, 50, cfg);
    const auto p = forward(TransformKind::plus, f, coarse, cfg);
    const auto grid = radial_gl_grid(0.0, 12.0, 0.1, cfg);
    auto refinement_warnings = [](const SampledFunction& u) {
        return std::count_if(u.warnings.begin(), u.warnings.end(),
                             [](const std::string& w) { return w.rfind("RefinementWarning", 0) == 0; });
    };
    CHECK(refinement_warnings(evolve(EvolutionRequest{p, 0.1, Generator::full, Sign::plus}, grid, cfg)) == 0);
    CHECK(refinement_warnings(evolve(EvolutionRequest{p, 50.0, Generator::full, Sign::plus}, grid, cfg)) == 1);
    CHECK(max_phase_step(coarse, 50.0, cfg) > pi / 4);
    CHECK_THROWS_AS(evolve(EvolutionRequest{p, 1.0, Generator::free, Sign::plus}, grid, cfg), std::invalid_argument);
}

TEST_CASE("finite-difference D_n norms", "[evolution][oracle]") {
    const PotentialConfig cfg;
    const auto f = make_bump(4.0, 1.5, 1.0, cfg);
    const double step = 1e-3;
    std::vector<cplx> u(9001);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = f(double(j) * step);
    // Second differences: relative errors of order step^2 times the squared wave numbers.
    CHECK(sampled_dn_norm(u, step, 0, cfg) == Catch::Approx(dn_norm(f, 0, cfg)).epsilon(1e-9));
    CHECK(sampled_dn_norm(u, step, 1, cfg) == Catch::Approx(dn_norm(f, 1, cfg)).epsilon(1e-5));
    CHECK(sampled_dn_norm(u, step, 2, cfg) == Catch::Approx(dn_norm(f, 2, cfg)).epsilon(1e-3));
    const auto hu = fd_apply_h(u, step, cfg);
    const auto exact = apply_H(f, cfg);
    for (std::size_t j : {2700u, 4000u, 5100u})
        CHECK(std::abs(hu[j] - exact(double(j) * step)) < 1e-4 * (1.0 + std::abs(exact(double(j) * step))));
}

TEST_CASE("Hunziker diagnostic", "[evolution]") {
    const PotentialConfig cfg;
    const auto f = wide_packet(cfg);
    const auto l2 = hunziker_diagnostic(f, 0, {0.0, 1.0, 4.0}, cfg);
    REQUIRE(l2.rows.size() == 3);
    CHECK(l2.rows[0].ratio == dn_norm(f, 0, cfg));
    // Rectangle rule on a uniform grid across the kinks of u'' at a and b.
    for (const auto& row : l2.rows) CHECK(row.ratio == Catch::Approx(l2_norm(f)).epsilon(1e-5));

    const auto rep = hunziker_diagnostic(f, 2, {0.0, 1.0, 2.0, 4.0}, cfg);
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].norm == dn_norm(f, 2, cfg));
    CHECK(std::isfinite(rep.fitted_constant));
    CHECK(rep.fitted_constant >= 1.0);
    for (const auto& row : rep.rows) CHECK(row.ratio <= rep.fitted_constant * rep.rows[0].norm * (1.0 + 1e-12));
    WARN("Hunziker n=2 trend: " << rep.trend << ", fitted c_2 = " << rep.fitted_constant);
    CHECK_THROWS_AS(hunziker_diagnostic(f, 5, {1.0}, cfg), OrderTooHigh);
}

TEST_CASE("interior mass of an incoming packet", "[evolution]") {
    const PotentialConfig cfg;
    const auto mass = interior_mass_trend(5.0, 0.5, {5.0, 10.0, 20.0}, cfg);
    REQUIRE(mass.size() == 3);
    for (double m : mass) {
        CHECK(m >= 0.0);
        CHECK(m <= 1.0 + 1e-9);
    }
    WARN("interior mass at t = 5, 10, 20: " << mass[0] << ", " << mass[1] << ", " << mass[2]);
}
