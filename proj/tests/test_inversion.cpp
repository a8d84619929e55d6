#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fivec/errors.hpp"
#include "fivec/inversion.hpp"
#include "fivec/kinematics.hpp"

using namespace fivec;

namespace {

const MaterialPoint kTruth(2.0, 1.0, 0.3, -0.4);

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<Measurement> psv_set(const MaterialPoint& p, int n) {
    std::vector<Measurement> ms;
    for (int k = 0; k < n; ++k) {
        const double alpha = 0.3 + 2.4 * k / std::max(1, n - 1);
        const double psi = alpha * (0.25 + 0.5 * ((k * 7) % n) / n);
        ms.push_back(synthesize_measurement(InteractionCase::PSV_SV, p, alpha, psi));
    }
    return ms;
}

}  // namespace

TEST(RecoverLame, ChordExample) {
    const std::vector<TravelTime> t{{Vec3::Zero(), Vec3(2, 0, 0), Mode::P, 1.0},
                                    {Vec3::Zero(), Vec3(2, 0, 0), Mode::S, 2.0}};
    const LameResult r = recover_lame(t);
    EXPECT_NEAR(r.lambda, 2.0, 1e-14);
    EXPECT_NEAR(r.mu, 1.0, 1e-14);
}

TEST(RecoverLame, ExactTimesFromRayTracing) {
    const MaterialPoint p(1.7, 0.9);
    const ConstantMedium m(p);
    std::vector<TravelTime> t;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int k = 0; k < 6; ++k) {
        const Mode mode = k % 2 ? Mode::S : Mode::P;
        const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
        const RayPath path = trace_ray(forward_covector(Vec3::Zero(), dir, mode, p), m, 1.0 + k);
        t.push_back({Vec3::Zero(), path.back().x, mode, path.back().t});
    }
    const LameResult r = recover_lame(t);
    EXPECT_LT(rel(r.lambda, 1.7), 1e-12);
    EXPECT_LT(rel(r.mu, 0.9), 1e-12);
}

TEST(RecoverLame, ShearFasterThanCompressionIsRejected) {
    const std::vector<TravelTime> t{{Vec3::Zero(), Vec3(2, 0, 0), Mode::P, 2.0},
                                    {Vec3::Zero(), Vec3(2, 0, 0), Mode::S, 1.0}};
    EXPECT_THROW(recover_lame(t), Error);
}

TEST(RecoverAB, NoiselessRoundTrip) {
    const std::vector<Measurement> ms{synthesize_measurement(InteractionCase::PSV_SV, kTruth, 1.0, 0.4),
                                      synthesize_measurement(InteractionCase::PSV_SV, kTruth, 2.2, 0.9)};
    const RecoveryResult r = recover_AB(ms, 2.0, 1.0);
    EXPECT_LT(rel(r.a, 0.3), 1e-10);
    EXPECT_LT(rel(r.b, -0.4), 1e-10);
    EXPECT_NE(r.diag.determinant, 0.0);
}

TEST(RecoverAB, IdenticalAnglesAreDegenerate) {
    const Measurement m = synthesize_measurement(InteractionCase::PSV_SV, kTruth, 1.0, 0.4);
    EXPECT_THROW(recover_AB({m, m}, 2.0, 1.0), DegenerateError);
}

// Expected mean |error| of an efficient estimator under multiplicative noise: the Cramer-Rao covariance
// of the linearized log-amplitude model, scaled by E|N(0,1)| = sqrt(2/pi).
std::pair<double, double> efficient_mean_errors(const std::vector<Measurement>& ms, const MaterialPoint& p,
                                                double noise) {
    Eigen::Matrix2d fisher = Eigen::Matrix2d::Zero();
    for (const auto& m : ms) {
        const double ca = std::cos(m.alpha), cp = std::cos(m.psi), cd = std::cos(m.alpha - m.psi);
        const double f = (p.lambda() + p.b_landau()) * cp + (2.0 * p.mu() + 0.5 * p.a_landau()) * ca * cd;
        const Eigen::Vector2d g(0.5 * ca * cd / f, cp / f);
        fisher += g * g.transpose() / (noise * noise);
    }
    const Eigen::Matrix2d cov = fisher.inverse();
    const double k = std::sqrt(2.0 / M_PI);
    return {k * std::sqrt(cov(0, 0)), k * std::sqrt(cov(1, 1))};
}

TEST(RecoverAB, NoisyRecoveryIsStatisticallyEfficient) {
    const auto ms = psv_set(kTruth, 20);
    const NoiseTrialSummary s = noise_trials(ms, kTruth, 0.05, 2000, 2024);
    const auto [ea, eb] = efficient_mean_errors(ms, kTruth, 0.05);
    EXPECT_NEAR(s.mean_rel_err_a * std::abs(kTruth.a_landau()), ea, 0.1 * ea);
    EXPECT_NEAR(s.mean_rel_err_b * std::abs(kTruth.b_landau()), eb, 0.1 * eb);
    EXPECT_LT(s.mean_rel_err_b, 0.10);
}

TEST(RecoverAB, SmallNoiseRecoveryWithinTenPercent) {
    const NoiseTrialSummary s = noise_trials(psv_set(kTruth, 20), kTruth, 0.02, 500, 2024);
    EXPECT_LT(s.mean_rel_err_a, 0.10);
    EXPECT_LT(s.mean_rel_err_b, 0.10);
}

TEST(RecoverAB, NoiseTrialsAreDeterministic) {
    const auto ms = psv_set(kTruth, 20);
    const NoiseTrialSummary a = noise_trials(ms, kTruth, 0.05, 50, 99);
    const NoiseTrialSummary b = noise_trials(ms, kTruth, 0.05, 50, 99);
    EXPECT_EQ(a.mean_a, b.mean_a);
    EXPECT_EQ(a.max_rel_err, b.max_rel_err);
}

TEST(RecoverAB, ErrorGrowsLinearlyWithNoise) {
    const auto ms = psv_set(kTruth, 20);
    std::vector<double> err;
    for (double noise : {0.01, 0.02, 0.04}) {
        const NoiseTrialSummary s = noise_trials(ms, kTruth, noise, 400, 7);
        err.push_back(s.mean_rel_err_a + s.mean_rel_err_b);
    }
    EXPECT_NEAR(err[1] / err[0], 2.0, 0.3);
    EXPECT_NEAR(err[2] / err[1], 2.0, 0.3);
}

TEST(RecoverABAlt, MatchesRecoverABWhenAnSvRowIsPresent) {
    std::vector<Measurement> ms{synthesize_measurement(InteractionCase::PP_SH, kTruth, 1.0, 0.3),
                                synthesize_measurement(InteractionCase::PSH_SH, kTruth, 1.4, 0.5),
                                synthesize_measurement(InteractionCase::PSH_SH, kTruth, 2.0, 1.2),
                                synthesize_measurement(InteractionCase::SVSV_P, kTruth, 2.6, 1.0)};
    const RecoveryResult alt = recover_AB_alt(ms, 2.0, 1.0);
    const RecoveryResult ab = recover_AB(psv_set(kTruth, 2), 2.0, 1.0);
    EXPECT_NEAR(alt.a, ab.a, 1e-9);
    EXPECT_NEAR(alt.b, ab.b, 1e-9);
}

TEST(RecoverABAlt, InPlaneRowsOnlyDetermineAPlus2B) {
    const std::vector<Measurement> ms{synthesize_measurement(InteractionCase::PP_SH, kTruth, 1.0, 0.3),
                                      synthesize_measurement(InteractionCase::PP_SH, kTruth, 2.0, 0.7),
                                      synthesize_measurement(InteractionCase::PSH_SH, kTruth, 1.4, 0.5),
                                      synthesize_measurement(InteractionCase::PSH_SH, kTruth, 2.0, 1.2)};
    try {
        recover_AB_alt(ms, 2.0, 1.0);
        FAIL() << "expected an identifiability error";
    } catch (const IdentifiabilityError& e) {
        EXPECT_NEAR(e.a_plus_2b(), 0.3 + 2.0 * -0.4, 1e-9);
    }
}

TEST(PshShPair, DeterminantClosedForm) {
    EXPECT_NEAR(det_v(M_PI / 4.0, M_PI / 2.0), 0.5, 1e-15);
    for (int i = 1; i < 60; ++i) {
        for (int j = 1; j < 60; ++j) {
            const double a = M_PI * i / 60.0, b = M_PI * j / 60.0;
            const bool zero = std::abs(det_v(a, b)) < 1e-12;
            EXPECT_EQ(zero, i == j || i + j == 60) << i << "," << j;
        }
    }
}

TEST(PshShPair, EqualAnglesDegenerate) {
    const Measurement m = synthesize_measurement(InteractionCase::PSH_SH, kTruth, 1.4, 0.5);
    EXPECT_THROW(solve_psh_sh_pair(m, m), DegenerateError);
}

TEST(CReport, ZeroSensitivity) {
    const CReport r = c_identifiability_report(kTruth, {0.0, 10.0}, 16, 3);
    EXPECT_EQ(r.per_case.size(), all_cases().size());
    EXPECT_LE(r.max_sensitivity, 1e-14);
}

TEST(EndToEnd, VanishingRowIsNonInformative) {
    const MaterialPoint tuned(1.0, 1.0, -4.0, 0.0);
    Measurement pp = synthesize_measurement(InteractionCase::PP_SH, tuned, 1.0, 0.3);
    pp.noise_level = 1e-6;
    Measurement s1 = synthesize_measurement(InteractionCase::PSV_SV, tuned, 1.0, 0.4);
    Measurement s2 = synthesize_measurement(InteractionCase::PSV_SV, tuned, 2.2, 0.9);
    s1.noise_level = s2.noise_level = 1e-6;
    const RecoveryResult r = end_to_end_recovery({{pp, "pp"}, {s1, "a"}, {s2, "b"}}, 1.0, 1.0);
    EXPECT_EQ(r.diag.measurements_used, 2);
    bool noted = false;
    for (const auto& n : r.diag.notes) noted = noted || n.find("pp") != std::string::npos;
    EXPECT_TRUE(noted);
    EXPECT_NEAR(r.a, -4.0, 1e-9);
}

TEST(EndToEnd, DuplicateExperimentsAreDegenerate) {
    Measurement s1 = synthesize_measurement(InteractionCase::PSV_SV, kTruth, 1.0, 0.4);
    EXPECT_THROW(end_to_end_recovery({{s1, "a"}, {s1, "b"}}, 2.0, 1.0), DegenerateError);
}
