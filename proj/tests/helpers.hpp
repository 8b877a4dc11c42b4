#pragma once

#include <complex>
#include <random>
#include <vector>

#include "shellscatter/testspace.hpp"
#include "shellscatter/units.hpp"

namespace test_helpers {

using shellscatter::cplx;

inline double rel_err(cplx got, cplx want) {
    const double s = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / s;
}

/// Seeded generator shared by the property tests.
inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(0x5eed5eedULL);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline shellscatter::PotentialConfig default_config() { return {}; }

inline shellscatter::PotentialConfig with_v0(double v0) {
    shellscatter::PotentialConfig c;
    c.V0 = v0;
    return c;
}

/// Random element of Phi: `count` bumps cycling through (0,a), (a,b) and
/// (b, b+4), with halfwidths of at least min_halfwidth.
inline shellscatter::TestFunction random_test_function(const shellscatter::PotentialConfig& cfg, int count,
                                                       double min_halfwidth = 0.2) {
    std::vector<shellscatter::Bump> bumps;
    for (int i = 0; i < count; ++i) {
        const int region = i % 3;
        const double lo = region == 0 ? 0.02 : (region == 1 ? cfg.a + 0.02 : cfg.b + 0.05);
        const double hi = region == 0 ? cfg.a - 0.02 : (region == 1 ? cfg.b - 0.02 : cfg.b + 4.0);
        const double h = uniform(std::min(min_halfwidth, 0.49 * (hi - lo)), 0.49 * (hi - lo));
        const double c = uniform(lo + h, hi - h);
        bumps.push_back({c, h, {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}});
    }
    return shellscatter::make_test_function(bumps, cfg);
}

} // namespace test_helpers
