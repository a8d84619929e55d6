#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fivec/errors.hpp"
#include "fivec/resonance.hpp"
#include "oracles.hpp"

using namespace fivec;

namespace {

InteractionConfig unit_pair(Mode m1, Mode m2, double cos_alpha, const MaterialPoint& p) {
    const double s = std::sqrt(1.0 - cos_alpha * cos_alpha);
    return InteractionConfig::make(forward_covector(Vec3::Zero(), Vec3(1, 0, 0), m1, p),
                                   forward_covector(Vec3::Zero(), Vec3(cos_alpha, s, 0), m2, p));
}

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(SolvePpToS, PerpendicularUnitWaves) {
    const MaterialPoint p(0.0, 1.0);
    const ResonanceResult r = solve_pp_to_s(unit_pair(Mode::P, Mode::P, 0.0, p), p);
    ASSERT_EQ(r.roots.size(), 2u);
    const auto [hi, lo] = oracle::quadratic_roots(1.0, 4.0, 1.0);
    const auto roots = sorted(r.roots);
    EXPECT_NEAR(roots[0], lo, 1e-13);
    EXPECT_NEAR(roots[1], hi, 1e-13);
    for (double res : r.residuals) EXPECT_LT(res, 1e-12);
    for (const auto& out : r.outputs) EXPECT_LT(relative_residual(out, p.moduli()), 1e-12);
}

TEST(SolvePpToS, ObtuseAngle) {
    const MaterialPoint p(1.0, 1.0);
    const ResonanceResult r = solve_pp_to_s(unit_pair(Mode::P, Mode::P, -0.5, p), p);
    const auto roots = sorted(r.roots);
    EXPECT_NEAR(roots[0], (-7.0 - std::sqrt(33.0)) / 4.0, 1e-13);
    EXPECT_NEAR(roots[1], (-7.0 + std::sqrt(33.0)) / 4.0, 1e-13);
    EXPECT_NEAR(roots[0] * roots[1], 1.0, 1e-12);
}

TEST(SolvePpToS, ParallelInputsRejected) {
    const MaterialPoint p(1.0, 1.0);
    const Covector z = forward_covector(Vec3::Zero(), Vec3(1, 0, 0), Mode::P, p);
    EXPECT_THROW(solve_pp_to_s(InteractionConfig::make(z, z), p), Error);
}

TEST(SolvePs, PerpendicularUnitWaves) {
    const MaterialPoint p(0.0, 1.0);
    const auto [rp, rs] = solve_ps(unit_pair(Mode::P, Mode::S, 0.0, p), p);
    ASSERT_EQ(rp.roots.size(), 1u);
    ASSERT_EQ(rs.roots.size(), 1u);
    EXPECT_NEAR(rp.roots[0], 2.0 * std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(rs.roots[0], -1.0 / (2.0 * std::sqrt(2.0)), 1e-13);
    EXPECT_NE(rp.roots[0], 0.0);
}

TEST(SolvePs, RandomConfigsLandOnVariety) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.95, 0.95), pos(0.2, 3.0);
    for (int k = 0; k < 500; ++k) {
        const double mu = pos(rng);
        const MaterialPoint p(pos(rng) - 0.5 * mu, mu);
        const auto [rp, rs] = solve_ps(unit_pair(Mode::P, Mode::S, u(rng), p), p);
        for (const auto* r : {&rp, &rs})
            for (const auto& out : r->outputs) EXPECT_LT(relative_residual(out, p.moduli()), 1e-10);
    }
}

TEST(SolveSsToP, ObtuseAngleRoots) {
    const MaterialPoint p(0.0, 1.0);
    const ResonanceResult r = solve_ss_to_p(unit_pair(Mode::S, Mode::S, -0.75, p), p);
    ASSERT_TRUE(r.interacts);
    const auto roots = sorted(r.roots);
    EXPECT_NEAR(roots[0], (5.0 - std::sqrt(21.0)) / 2.0, 1e-13);
    EXPECT_NEAR(roots[1], (5.0 + std::sqrt(21.0)) / 2.0, 1e-13);
    EXPECT_NEAR(roots[0] * roots[1], 1.0, 1e-12);
}

TEST(SolveSsToP, AcuteAngleHasNoInteraction) {
    const MaterialPoint p(0.0, 1.0);
    const ResonanceResult r = solve_ss_to_p(unit_pair(Mode::S, Mode::S, 0.5, p), p);
    EXPECT_FALSE(r.interacts);
    EXPECT_TRUE(r.roots.empty());
}

TEST(SolveSsToP, ThresholdMatchesInteractionCondition) {
    for (const auto& p : {MaterialPoint(0.0, 1.0), MaterialPoint(1.0, 1.0), MaterialPoint(3.0, 0.5)}) {
        const double expected = -p.lambda() / (p.lambda() + 2.0 * p.mu());
        for (double c = -0.99; c < 0.99; c += 0.01) {
            if (std::abs(c - expected) < 1e-9) {
                EXPECT_THROW(solve_ss_to_p(unit_pair(Mode::S, Mode::S, c, p), p), DegenerateError) << c;
                continue;
            }
            EXPECT_EQ(solve_ss_to_p(unit_pair(Mode::S, Mode::S, c, p), p).interacts, c < expected) << c;
        }
    }
}

TEST(SolveResonances, NoSameModeOutputs) {
    const MaterialPoint p(1.0, 1.0);
    for (double c : {-0.8, -0.3, 0.2, 0.7}) {
        EXPECT_FALSE(scan_for_outputs(unit_pair(Mode::P, Mode::P, c, p), p, Mode::P, -20.0, 20.0, 40001));
        EXPECT_FALSE(scan_for_outputs(unit_pair(Mode::S, Mode::S, c, p), p, Mode::S, -20.0, 20.0, 40001));
    }
}

TEST(SolveResonances, DispatchesByModes) {
    const MaterialPoint p(1.0, 1.0);
    EXPECT_EQ(solve_resonances(unit_pair(Mode::P, Mode::P, 0.3, p), p).size(), 1u);
    EXPECT_EQ(solve_resonances(unit_pair(Mode::P, Mode::S, 0.3, p), p).size(), 2u);
    EXPECT_EQ(solve_resonances(unit_pair(Mode::S, Mode::S, -0.8, p), p).size(), 1u);
}

TEST(BuildFrame, OrthogonalInputs) {
    const Frame f = build_frame(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0));
    EXPECT_NEAR(std::abs(f.v[2]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(f.h_out.dot(Vec3(1, -1, 0).normalized())), 1.0, 1e-15);
    EXPECT_NEAR(f.alpha, M_PI / 2.0, 1e-15);
    EXPECT_NEAR(f.psi, M_PI / 4.0, 1e-15);
}

TEST(BuildFrame, ParallelInputsRejected) {
    EXPECT_THROW(build_frame(Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)), Error);
}

TEST(BuildFrame, OrthonormalForRandomPairs) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int k = 0; k < 1000; ++k) {
        const Vec3 a(g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng));
        const Frame f = build_frame(a, b, a + b);
        Mat3 m;
        m << f.e_out, f.h_out, f.v;
        EXPECT_LT((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT(std::abs(f.h1.dot(a)), 1e-12 * a.norm());
    }
}

TEST(Polarization, AmplitudeRoundTrip) {
    const Vec3 xi(0.3, 0.8, 0.0), n(0, 0, 1);
    const ModeAmplitudes in{cplx(0.5, 0.1), cplx(-0.2, 0.3), cplx(0.7, -0.4)};
    const CVec3 ps = polarization_from(Mode::S, xi, n, in);
    const ModeAmplitudes back = amplitudes_of(ps, xi, n);
    EXPECT_NEAR(std::abs(back.b_h - in.b_h), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(back.b_v - in.b_v), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(back.a), 0.0, 1e-15);
}
