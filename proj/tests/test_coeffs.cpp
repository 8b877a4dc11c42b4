#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "shellscatter/coeffs.hpp"
#include "helpers.hpp"

using namespace shellscatter;
using test_helpers::rel_err;
using test_helpers::uniform;

namespace {

// Independent oracle: J1..J4 from the 4x4 continuity system for chi and chi'
// at r = a and r = b, solved by dense LU. Unknowns multiply exponentials
// centred at the origin.
Eigen::Vector4cd matching_system_J(cplx E, const PotentialConfig& cfg, bool cosine = false) {
    const cplx k = branch_sqrt(cfg.c2() * E);
    const cplx q = branch_sqrt(cfg.c2() * (E - cfg.V0));
    const double a = cfg.a, b = cfg.b;
    auto e = [](cplx x) { return std::exp(x); };
    Eigen::Matrix4cd M;
    M << e(I * q * a), e(-I * q * a), 0.0, 0.0,
        I * q * e(I * q * a), -I * q * e(-I * q * a), 0.0, 0.0,
        e(I * q * b), e(-I * q * b), -e(I * k * b), -e(-I * k * b),
        I * q * e(I * q * b), -I * q * e(-I * q * b), -I * k * e(I * k * b), I * k * e(-I * k * b);
    Eigen::Vector4cd rhs;
    if (cosine)
        rhs << std::cos(k * a), -k * std::sin(k * a), 0.0, 0.0;
    else
        rhs << std::sin(k * a), k * std::cos(k * a), 0.0, 0.0;
    return M.partialPivLu().solve(rhs);
}

// Same construction for f+- (outer piece e^{+-ikr}); unknowns A1..A4.
Eigen::Vector4cd matching_system_A(cplx E, const PotentialConfig& cfg, int sign) {
    const cplx k = branch_sqrt(cfg.c2() * E);
    const cplx q = branch_sqrt(cfg.c2() * (E - cfg.V0));
    const double a = cfg.a, b = cfg.b;
    auto e = [](cplx x) { return std::exp(x); };
    Eigen::Matrix4cd M;
    M << e(I * k * a), e(-I * k * a), -e(I * q * a), -e(-I * q * a),
        I * k * e(I * k * a), -I * k * e(-I * k * a), -I * q * e(I * q * a), I * q * e(-I * q * a),
        0.0, 0.0, e(I * q * b), e(-I * q * b),
        0.0, 0.0, I * q * e(I * q * b), -I * q * e(-I * q * b);
    const cplx eb = e(double(sign) * I * k * b);
    Eigen::Vector4cd rhs;
    rhs << 0.0, 0.0, eb, double(sign) * I * k * eb;
    return M.partialPivLu().solve(rhs);
}

struct Frozen {
    double E;
    cplx J[4], C[4], Ap[4], Am[4], S;
    double delta;
};

// 40-digit solutions of the matching system (a=1, b=2, V0=4, c2=1).
const Frozen frozen[] = {
    {5.0,
     {{0.79326728594601178, 0.041866658065253202}, {0.79326728594601178, -0.041866658065253202},
      {-0.21814013162596201, -0.43251375664888005}, {-0.21814013162596201, 0.43251375664888005}},
     {{0.57341122357468691, 0.7349651452068159}, {0.57341122357468691, -0.7349651452068159},
      {0.12217412824087766, -0.90381355947513858}, {0.12217412824087766, 0.90381355947513858}},
     {{0.55468788488975771, 1.1219536911011006}, {0.31033962840800239, -0.68567342784917657},
      {-1.2687958057610382, 1.0040872432379034}, {-0.60703414189147696, -0.1160842876025148}},
     {{0.31033962840800239, 0.68567342784917657}, {0.55468788488975771, -1.1219536911011006},
      {-0.60703414189147696, 0.1160842876025148}, {-1.2687958057610382, -1.0040872432379034}},
     {0.59442186600095787, -0.80415337170215191},
     -0.46712490214161744},
    {2.0,
     {{1.7107465949705052, 0.0}, {0.13902747650101998, 0.0},
      {-1.5137332415247704, 0.69289537743454794}, {-1.5137332415247704, -0.69289537743454794}},
     {{2.352182056532991, 0.0}, {-0.10111495467405628, 0.0},
      {1.0325693691292727, -0.63780229981451578}, {1.0325693691292727, 0.63780229981451578}},
     {{0.33967399169472475, 2.1515355413392862}, {-1.7254647465638206, 0.87593094171025463},
      {-5.4418683730564762, 10.654081402801662}, {-0.037219919133203328, -0.019011108806192911}},
     {{-1.7254647465638206, -0.87593094171025463}, {0.33967399169472475, -2.1515355413392862},
      {-5.4418683730564762, -10.654081402801662}, {-0.037219919133203328, 0.019011108806192911}},
     {-0.65354116352766551, 0.7568909746951044},
     1.1415249666123303},
};

} // namespace

TEST_CASE("free potential gives the free coefficients", "[coeffs]") {
    PotentialConfig cfg;
    cfg.V0 = 0.0;
    for (double E : {0.01, 1.0, 5.0, 300.0}) {
        const auto cs = compute_coefficients(E, cfg);
        CHECK(cs.J1 == -0.5 * I);
        CHECK(cs.J2 == 0.5 * I);
        CHECK(cs.J3 == -0.5 * I);
        CHECK(cs.J4 == 0.5 * I);
        CHECK(cs.jost_plus == cplx(1.0));
        CHECK(cs.jost_minus == cplx(1.0));
        CHECK(s_matrix(E, cfg) == cplx(1.0));
        CHECK(phase_shift(E, cfg) == 0.0);
    }
}

TEST_CASE("coefficients match frozen high-precision matching solutions", "[coeffs][oracle]") {
    const PotentialConfig cfg;
    for (const auto& f : frozen) {
        CAPTURE(f.E);
        const auto cs = compute_coefficients(f.E, cfg);
        const cplx J[] = {cs.J1, cs.J2, cs.J3, cs.J4};
        const cplx C[] = {cs.C1, cs.C2, cs.C3, cs.C4};
        const cplx Ap[] = {cs.Aplus1, cs.Aplus2, cs.Aplus3, cs.Aplus4};
        const cplx Am[] = {cs.Aminus1, cs.Aminus2, cs.Aminus3, cs.Aminus4};
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(J[i] - f.J[i]) < 1e-14 * (1 + std::abs(f.J[i])));
            CHECK(std::abs(C[i] - f.C[i]) < 1e-14 * (1 + std::abs(f.C[i])));
            CHECK(std::abs(Ap[i] - f.Ap[i]) < 1e-14 * (1 + std::abs(f.Ap[i])));
            CHECK(std::abs(Am[i] - f.Am[i]) < 1e-14 * (1 + std::abs(f.Am[i])));
        }
        CHECK(std::abs(s_matrix(f.E, cfg) - f.S) < 1e-14);
        CHECK(std::abs(phase_shift(f.E, cfg) - f.delta) < 1e-14);
        // W = J4 C3 - J3 C4 turns out to be i/2 at both energies.
        CHECK(std::abs(cs.W - 0.5 * I) < 1e-14);
    }
}

TEST_CASE("coefficients agree with the dense linear-system oracle", "[coeffs][oracle][property]") {
    const PotentialConfig cfg;
    std::vector<cplx> energies = {5.0, 2.0, 0.3, 3.9, 4.1, 17.0, 250.0, {3, 2}, {3, -2}, {0.5, 0.1}, {8, -0.01}};
    for (int i = 0; i < 40; ++i) energies.emplace_back(uniform(0.05, 30), uniform(-3, 3));
    for (cplx E : energies) {
        CAPTURE(E);
        const auto cs = compute_coefficients(E, cfg);
        const auto J = matching_system_J(E, cfg);
        const auto C = matching_system_J(E, cfg, true);
        const auto Ap = matching_system_A(E, cfg, +1);
        const auto Am = matching_system_A(E, cfg, -1);
        const cplx got_J[] = {cs.J1, cs.J2, cs.J3, cs.J4};
        const cplx got_C[] = {cs.C1, cs.C2, cs.C3, cs.C4};
        const cplx got_Ap[] = {cs.Aplus1, cs.Aplus2, cs.Aplus3, cs.Aplus4};
        const cplx got_Am[] = {cs.Aminus1, cs.Aminus2, cs.Aminus3, cs.Aminus4};
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(got_J[j] - J[j]) < 1e-11 * (1 + std::abs(J[j])));
            CHECK(std::abs(got_C[j] - C[j]) < 1e-11 * (1 + std::abs(C[j])));
            CHECK(std::abs(got_Ap[j] - Ap[j]) < 1e-11 * (1 + std::abs(Ap[j])));
            CHECK(std::abs(got_Am[j] - Am[j]) < 1e-11 * (1 + std::abs(Am[j])));
        }
    }
}

TEST_CASE("coefficient-set invariants", "[coeffs][property]") {
    const PotentialConfig cfg;
    for (int i = 0; i < 200; ++i) {
        const double E = std::pow(10.0, uniform(-3, 3));
        if (std::abs(E - cfg.V0) < 1e-6) continue;
        const auto cs = compute_coefficients(E, cfg);
        CHECK(cs.jost_plus == -2.0 * I * cs.J4);
        CHECK(cs.jost_minus == 2.0 * I * cs.J3);
        CHECK(cs.W == cs.J4 * cs.C3 - cs.J3 * cs.C4);
        // Real matching data: the upper outer amplitudes are conjugate pairs.
        CHECK(rel_err(cs.J3, std::conj(cs.J4)) < 1e-12);
        CHECK(rel_err(cs.C3, std::conj(cs.C4)) < 1e-12);
        CHECK(rel_err(cs.jost_minus, std::conj(cs.jost_plus)) < 1e-12);
    }
}

TEST_CASE("S-matrix is unimodular on a log grid", "[coeffs]") {
    const PotentialConfig cfg;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double E = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
        worst = std::max(worst, std::abs(std::abs(s_matrix(E, cfg)) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("degenerate energies are rejected", "[coeffs]") {
    const PotentialConfig cfg;
    CHECK_THROWS_AS(compute_coefficients(0.0, cfg), DegenerateEnergy);
    CHECK_THROWS_AS(compute_coefficients(1e-13, cfg), DegenerateEnergy);
    CHECK_THROWS_AS(compute_coefficients(cfg.V0, cfg), DegenerateEnergy);
    CHECK_THROWS_AS(compute_coefficients(cfg.V0 + 1e-13, cfg), DegenerateEnergy);
    CHECK_THROWS_AS(s_matrix(-1.0, cfg), DegenerateEnergy);
    CoefficientOptions loose;
    loose.degenerate_threshold = 1e-3;
    CHECK_THROWS_AS(compute_coefficients(cfg.V0 + 1e-4, cfg, loose), DegenerateEnergy);
}

TEST_CASE("removable singularity at E = V0", "[coeffs]") {
    const PotentialConfig cfg;
    // 40-digit kappa -> 0 limit of the matching system.
    const cplx J3_lim{-0.18263698836122903, -0.10686754603980672};
    const cplx C3_lim{0.38628304423873259, -1.1428072750115951};
    const cplx Ap1_lim{0.49315059027853931, 1.3254442633728241};
    const cplx S_lim{-0.48988600345032636, -0.87178650117070913};

    // Coefficients are smooth in E with slopes below 1, so they drift by at most |d|.
    for (double d : {1e-11, -1e-11, 5e-9, -5e-9}) {
        const auto cs = compute_coefficients(cfg.V0 + d, cfg);
        CHECK(cs.limit_rule);
        const double tol = 1e-10 + std::abs(d);
        CHECK(std::abs(cs.J3 - J3_lim) < tol);
        CHECK(std::abs(cs.C3 - C3_lim) < tol);
        CHECK(std::abs(cs.Aplus1 - Ap1_lim) < tol);
    }
    const cplx up = s_matrix(cfg.V0 + 1e-6, cfg);
    const cplx down = s_matrix(cfg.V0 - 1e-6, cfg);
    const cplx mid = s_matrix(cfg.V0 + 1e-10, cfg);
    CHECK(std::abs(up - S_lim) < 1e-5);
    CHECK(std::abs(down - S_lim) < 1e-5);
    CHECK(std::abs(mid - S_lim) < 1e-9);
    // Just outside the window, the closed form still holds its digits.
    const auto outside = compute_coefficients(cfg.V0 + 2e-8, cfg);
    CHECK_FALSE(outside.limit_rule);
    CHECK(std::abs(outside.J3 - J3_lim) < 1e-7);
}

TEST_CASE("weak-potential limit is first order in V0", "[coeffs]") {
    const double E = 3.0;
    double prev = 0.0;
    for (double v0 : {1e-2, 1e-3, 1e-4, 1e-5}) {
        PotentialConfig cfg;
        cfg.V0 = v0;
        const auto cs = compute_coefficients(E, cfg);
        const double err = std::max({std::abs(cs.J1 + 0.5 * I), std::abs(cs.J2 - 0.5 * I),
                                     std::abs(cs.J3 + 0.5 * I), std::abs(cs.J4 - 0.5 * I)});
        CHECK(err < 10.0 * v0);
        if (prev > 0.0) CHECK(err / prev == Catch::Approx(0.1).margin(0.02));
        prev = err;
    }
}

TEST_CASE("phase shift unwrapping across a narrow resonance", "[coeffs]") {
    PotentialConfig cfg;
    cfg.b = 1.2;
    cfg.V0 = 200.0;
    std::vector<double> grid;
    for (int i = 0; i <= 2000; ++i) grid.push_back(8.5 + 0.2 * i / 2000.0);
    const auto unwrapped = phase_shift_grid(grid, cfg);
    double wrapped_jump = 0.0, unwrapped_jump = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        wrapped_jump = std::max(wrapped_jump, std::abs(phase_shift(grid[i], cfg) - phase_shift(grid[i - 1], cfg)));
        unwrapped_jump = std::max(unwrapped_jump, std::abs(unwrapped[i] - unwrapped[i - 1]));
        // Same S-matrix: 2 delta agrees modulo 2 pi.
        const double d = 2.0 * (unwrapped[i] - phase_shift(grid[i], cfg));
        CHECK(std::abs(d - 2.0 * pi * std::round(d / (2.0 * pi))) < 1e-10);
    }
    CHECK(wrapped_jump > 2.5);
    CHECK(unwrapped_jump < 0.5);
    // The resonance adds pi to the phase shift across the window.
    CHECK(unwrapped.back() - unwrapped.front() == Catch::Approx(pi).margin(0.3));
}

TEST_CASE("opaque shells stay finite through the log-scale guard", "[coeffs]") {
    PotentialConfig cfg;
    cfg.V0 = 1e6;
    cfg.b = 1.5;  // |kappa| (b - a) ~ 500
    const auto cs = compute_coefficients(2.0, cfg);
    CHECK(cs.log_scale > 300.0);
    const cplx S = cs.s_matrix();
    CHECK(std::isfinite(S.real()));
    CHECK(std::abs(std::abs(S) - 1.0) < 1e-12);
    // Hard sphere of radius b, corrected by the penetration depth 1/|kappa| ~ 1e-3.
    const double k = std::sqrt(2.0);
    CHECK(std::abs(S - std::exp(-2.0 * I * k * cfg.b)) < 1e-2);
}
