#pragma once

// Random media and interaction configurations shared by the algebra tests and the acceptance run.

#include <cmath>
#include <random>
#include <vector>

#include "fivec/errors.hpp"
#include "fivec/inversion.hpp"
#include "fivec/symbols.hpp"

namespace randomcfg {

using namespace fivec;

inline MaterialPoint medium(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.2, 3.0), land(-5.0, 5.0), frac(-0.9, 3.0);
    const double mu = pos(rng);
    return MaterialPoint(frac(rng) * mu, mu, land(rng), land(rng), land(rng));
}

inline Vec3 unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Vec3(g(rng), g(rng), g(rng)).normalized();
}

inline cplx amplitude(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return {g(rng), g(rng)};
}

/// A resonant configuration of row c in a random medium, with random 3-D directions and amplitudes.
struct Sample {
    MaterialPoint p;
    InteractionConfig cfg;
};

inline Sample resonant(InteractionCase c, std::mt19937_64& rng) {
    for (;;) {
        const MaterialPoint p = medium(rng);
        const Vec3 d1 = unit(rng), d2 = unit(rng);
        const double ca = d1.dot(d2);
        if (std::abs(ca) > 0.995) continue;
        std::vector<InteractionConfig> cfgs;
        try {
            cfgs = resonant_configs(c, p, d1, d2, amplitude(rng), amplitude(rng));
        } catch (const DegenerateError&) {
            continue;
        }
        if (cfgs.empty()) continue;
        return {p, cfgs[std::uniform_int_distribution<size_t>(0, cfgs.size() - 1)(rng)]};
    }
}

/// Rescales the input polarizations so that the row's natural amplitude scale is one.
inline Sample unit_scale(InteractionCase c, Sample s) {
    const auto [a1, a2] = case_amplitudes(c, s.cfg);
    const double scale = amplitude_scale(c, s.p, magnitudes_of(s.cfg), a1, a2);
    if (scale > 0.0) {
        const double f = 1.0 / std::sqrt(scale);
        s.cfg.pol1 *= f;
        s.cfg.pol2 *= f;
    }
    return s;
}

/// An off-resonance configuration of row c with random angles 0 < psi < alpha < pi.
inline Sample geometric(InteractionCase c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const MaterialPoint p = medium(rng);
    const double alpha = 0.05 + (M_PI - 0.1) * u(rng);
    const double psi = alpha * (0.02 + 0.96 * u(rng));
    return {p, geometric_config(c, p, alpha, psi, amplitude(rng), amplitude(rng))};
}

/// Relative difference measured against the row's natural amplitude scale, so that
/// near-zeros of the angular factor do not inflate the comparison.
inline double rel_diff(InteractionCase c, const Sample& s, cplx a, cplx b) {
    const auto [a1, a2] = case_amplitudes(c, s.cfg);
    const double scale = amplitude_scale(c, s.p, magnitudes_of(s.cfg), a1, a2);
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale});
}

}  // namespace randomcfg
