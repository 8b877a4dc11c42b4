#include <catch_amalgamated.hpp>

#include "shellscatter/units.hpp"
#include "helpers.hpp"

using namespace shellscatter;
using test_helpers::uniform;

TEST_CASE("branch_sqrt on the real axis", "[units]") {
    CHECK(branch_sqrt(4.0) == cplx(2.0, 0.0));
    CHECK(branch_sqrt(-4.0) == cplx(0.0, 2.0));
    // Negative zero imaginary part is still the upper lip of the cut.
    CHECK(branch_sqrt(cplx(-4.0, -0.0)) == cplx(0.0, 2.0));
    CHECK(branch_sqrt(0.0) == cplx(0.0, 0.0));
}

TEST_CASE("branch_sqrt is half-open at the cut", "[units]") {
    for (double delta : {1e-3, 1e-8, 1e-14}) {
        const cplx below = branch_sqrt(cplx(-4.0, -delta));
        const cplx above = branch_sqrt(cplx(-4.0, delta));
        CHECK(std::abs(below - cplx(0.0, -2.0)) < 2 * delta);
        CHECK(std::abs(above - cplx(0.0, 2.0)) < 2 * delta);
    }
}

TEST_CASE("branch_sqrt squares back and respects conjugation", "[units][property]") {
    for (int i = 0; i < 2000; ++i) {
        const double mag = std::pow(10.0, uniform(-6, 6));
        const double ang = uniform(-pi, pi);
        cplx z = std::polar(mag, ang);
        if (i % 10 == 0) z = cplx(-mag, (i % 20 == 0 ? 1 : -1) * mag * 1e-9);
        const cplx s = branch_sqrt(z);
        CHECK(std::abs(s * s - z) <= 1e-14 * std::abs(z) * 4);
        CHECK(std::arg(s) > -pi / 2);
        CHECK(std::arg(s) <= pi / 2);
        CHECK(std::abs(std::conj(branch_sqrt(std::conj(z))) - s) <= 1e-15 * std::abs(s) * 4);
    }
}

TEST_CASE("branch_sqrt is continuous off the cut", "[units][property]") {
    for (int i = 0; i < 200; ++i) {
        const cplx z = std::polar(uniform(0.1, 10), uniform(-3.0, 3.0));
        const cplx s = branch_sqrt(z);
        for (double h : {1e-4, 1e-6, 1e-8}) {
            const cplx step = std::polar(h, uniform(-pi, pi));
            CHECK(std::abs(branch_sqrt(z + step) - s) < 10 * h / std::sqrt(std::abs(z)));
        }
    }
}

TEST_CASE("wave numbers", "[units]") {
    PotentialConfig cfg;  // c2 = 1
    REQUIRE(cfg.c2() == 1.0);
    CHECK(wave_number(1.0, cfg) == cplx(1.0, 0.0));
    CHECK(wave_number(0.0, cfg) == cplx(0.0, 0.0));
    CHECK(std::abs(wave_number(5.0, cfg) - std::sqrt(5.0)) < 1e-15);
    CHECK(kappa(cfg.V0, cfg) == cplx(0.0, 0.0));
    CHECK(kappa(cfg.V0 + 1.0, cfg) == cplx(1.0, 0.0));
    CHECK(kappa(cfg.V0 - 1.0, cfg) == cplx(0.0, 1.0));

    PotentialConfig heavy = cfg;
    heavy.mass = 2.0;  // c2 = 4
    CHECK(std::abs(wave_number(1.0, heavy) - 2.0) < 1e-15);
}

TEST_CASE("potential config validation", "[units]") {
    PotentialConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.a = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.V0 = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.hbar = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.a = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("complex energy argument convention", "[units]") {
    CHECK(ComplexEnergy(-1.0).arg() == pi);
    CHECK(ComplexEnergy(cplx(-1.0, -0.0)).arg() == pi);
    CHECK(ComplexEnergy(cplx(-1.0, -1e-300)).arg() < 0.0);
    CHECK(ComplexEnergy(2.0).arg() == 0.0);
}

TEST_CASE("config hash is stable and sensitive", "[units]") {
    PotentialConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.V0 = 4.000000000000001;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash_hex(a).size() == 16);
}
