#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "fivec/errors.hpp"
#include "fivec/kinematics.hpp"
#include "oracles.hpp"

using namespace fivec;

namespace {

Covector tangential(double tau, const Vec3& xi) {
    Covector cv;
    cv.tau = tau;
    cv.xi = xi;
    return cv;
}

}  // namespace

TEST(ClassifyBoundary, HyperbolicBoth) {
    const MaterialPoint p(2.0, 1.0);
    const BoundaryClass bc = classify_boundary(tangential(3.0, Vec3(1, 0, 0)), Vec3(0, 0, 1), p);
    EXPECT_EQ(bc.p.tag, BoundaryTag::hyperbolic);
    EXPECT_EQ(bc.s.tag, BoundaryTag::hyperbolic);
    EXPECT_NEAR(bc.p.discriminant, 1.25, 1e-14);
    EXPECT_NEAR(std::abs(bc.p.z_forward), std::sqrt(1.25), 1e-14);
    EXPECT_NEAR(std::abs(bc.s.z_forward), std::sqrt(8.0), 1e-14);
}

TEST(ClassifyBoundary, PEllipticSHyperbolic) {
    const MaterialPoint p(2.0, 1.0);
    const BoundaryClass bc = classify_boundary(tangential(1.5, Vec3(1, 0, 0)), Vec3(0, 0, 1), p);
    EXPECT_EQ(bc.p.tag, BoundaryTag::elliptic);
    EXPECT_EQ(bc.s.tag, BoundaryTag::hyperbolic);
    EXPECT_NEAR(bc.p.z_decaying.imag(), std::sqrt(1.0 - 0.5625), 1e-14);
}

TEST(ClassifyBoundary, PGlancing) {
    const MaterialPoint p(2.0, 1.0);
    const BoundaryClass bc = classify_boundary(tangential(2.0, Vec3(1, 0, 0)), Vec3(0, 0, 1), p);
    EXPECT_EQ(bc.p.tag, BoundaryTag::glancing);
    EXPECT_EQ(bc.p.z_forward, 0.0);
}

TEST(ClassifyBoundary, ForwardRootPointsInward) {
    const MaterialPoint p(2.0, 1.0);
    const Vec3 normal(0, 0, 1);
    const BoundaryClass bc = classify_boundary(tangential(-3.0, Vec3(1, 0, 0)), normal, p);
    Covector full = tangential(-3.0, bc.p.xi_forward);
    full.mode = Mode::P;
    EXPECT_LT(group_velocity(full, p).dot(normal), 0.0);
}

TEST(ClassifyBoundary, RejectsNonTangentialCovector) {
    EXPECT_THROW(classify_boundary(tangential(3.0, Vec3(1, 0, 1)), Vec3(0, 0, 1), MaterialPoint(2.0, 1.0)),
                 ValidationError);
}

TEST(ClassifyBoundary, HyperbolicPImpliesHyperbolicS) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.2, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const double mu = pos(rng);
        const MaterialPoint p(pos(rng) - 0.5 * mu, mu);
        const BoundaryClass bc =
            classify_boundary(tangential(3.0 * u(rng), Vec3(u(rng), u(rng), 0.0)), Vec3(0, 0, 1), p);
        if (bc.p.tag == BoundaryTag::hyperbolic) {
            EXPECT_EQ(bc.s.tag, BoundaryTag::hyperbolic);
        }
        if (bc.s.tag == BoundaryTag::elliptic) {
            EXPECT_EQ(bc.p.tag, BoundaryTag::elliptic);
        }
    }
}

TEST(GroupVelocity, Examples) {
    const MaterialPoint p(2.0, 1.0);
    Covector a = tangential(-2.0, Vec3(1, 0, 0));
    a.mode = Mode::P;
    EXPECT_TRUE(group_velocity(a, p).isApprox(Vec3(2, 0, 0), 1e-15));
    Covector b = tangential(-3.0, Vec3(0, 3, 0));
    b.mode = Mode::S;
    EXPECT_TRUE(group_velocity(b, p).isApprox(Vec3(0, 1, 0), 1e-15));
}

TEST(GroupVelocity, MagnitudeIsModeSpeed) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const MaterialPoint p(1.3, 0.7);
    for (int k = 0; k < 200; ++k) {
        const Mode mode = k % 2 ? Mode::P : Mode::S;
        const Covector cv = forward_covector(Vec3::Zero(), Vec3(g(rng), g(rng), g(rng)), mode, p);
        const double c = std::sqrt(speed_squared(p.moduli(), mode));
        EXPECT_NEAR(group_velocity(cv, p).norm(), c, 1e-12);
    }
}

TEST(GroupVelocity, OffVarietyRejected) {
    Covector cv = tangential(-1.0, Vec3(1, 0, 0));
    cv.mode = Mode::P;
    EXPECT_THROW(group_velocity(cv, MaterialPoint(2.0, 1.0)), ValidationError);
}

TEST(TraceRay, HomogeneousStraightAtModeSpeed) {
    const MaterialPoint p(2.0, 1.0);
    const ConstantMedium m(p);
    const RayPath path = trace_ray(forward_covector(Vec3::Zero(), Vec3(1, 0, 0), Mode::P, p), m, 3.0);
    for (const auto& s : path.samples) {
        EXPECT_NEAR(s.x[0], 2.0 * s.t, 1e-10);
        EXPECT_NEAR(s.x[1], 0.0, 1e-14);
        EXPECT_LT(s.residual, 1e-10);
    }
    EXPECT_NEAR(path.back().t, 3.0, 1e-14);
}

TEST(TraceRay, GradientMediumMatchesFineReference) {
    std::array<Moduli, 3> grad{};
    grad[0].mu = 0.1;
    const LinearGradientMedium m(Moduli{1.0, 1.0}, grad);
    const Vec3 xi0(1.0, 1.0, 0.0);
    const Covector start = forward_covector(Vec3::Zero(), xi0, Mode::S, m.material_at(Vec3::Zero()));
    const RayPath path = trace_ray(start, m, 1.0);
    const Vec3 ref = oracle::rk4_ray_endpoint(m, Mode::S, start, 1.0, 20000);
    EXPECT_LT((path.back().x - ref).norm(), 1e-8);
    EXPECT_LT(path.stats.max_residual, 1e-10);
}

TEST(TraceRay, ForwardThenBackwardReturnsToStart) {
    std::array<Moduli, 3> grad{};
    grad[1].lambda = 0.2;
    grad[0].mu = 0.05;
    const LinearGradientMedium m(Moduli{1.0, 1.0}, grad);
    const Covector start = forward_covector(Vec3(0.1, 0.2, 0.0), Vec3(0.3, 1.0, 0.2), Mode::P,
                                            m.material_at(Vec3(0.1, 0.2, 0.0)));
    const RayPath fwd = trace_ray(start, m, 2.0);
    Covector back;
    back.t = fwd.back().t;
    back.x = fwd.back().x;
    back.tau = fwd.back().tau;
    back.xi = fwd.back().xi;
    back.mode = Mode::P;
    const RayPath rev = trace_ray(back, m, 0.0);
    EXPECT_LT((rev.back().x - start.x).norm(), 1e-9);
}

TEST(TraceRay, ExitOfDomainReportsHitPoint) {
    std::array<Moduli, 3> grad{};
    grad[0].mu = 0.1;
    const LinearGradientMedium m(Moduli{1.0, 1.0}, grad, Vec3::Zero(), Box{Vec3(-1, -1, -1), Vec3(1, 1, 1)});
    const Covector start = forward_covector(Vec3::Zero(), Vec3(1, 0, 0), Mode::P, m.material_at(Vec3::Zero()));
    try {
        trace_ray(start, m, 5.0);
        FAIL() << "expected a domain exit";
    } catch (const DomainExitError& e) {
        EXPECT_NEAR(e.hit_point()[0], 1.0, 1e-6);
    }
}

TEST(TraceRay, RejectsOffVarietyStart) {
    const MaterialPoint p(2.0, 1.0);
    Covector cv = tangential(-1.0, Vec3(1, 0, 0));
    cv.mode = Mode::P;
    EXPECT_THROW(trace_ray(cv, ConstantMedium(p), 1.0), ValidationError);
}
