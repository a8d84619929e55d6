#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "fivec/kinematics.hpp"
#include "fivec/medium.hpp"

namespace oracle {

using fivec::CMat3;
using fivec::CVec3;
using fivec::cplx;
using fivec::Vec3;

/// Full stress of the five-constant model for a displacement gradient F (any scalar type).
template <class M>
M stress(const fivec::Moduli& m, const M& f) {
    const M id = M::Identity();
    const M e = 0.5 * (f + f.transpose() + f.transpose() * f);
    const auto tr = e.trace();
    const M e2 = e * e;
    return m.lambda * tr * (id + f) + 2.0 * m.mu * (e + f * e) + m.a * e2 +
           m.b * (2.0 * tr * e + e2.trace() * id) + m.c * tr * tr * id;
}

/// Terms of the stress that are exactly quadratic in F, written out by hand.
inline CMat3 stress_quadratic(const fivec::Moduli& m, const CMat3& f) {
    const CMat3 id = CMat3::Identity();
    const CMat3 eps = 0.5 * (f + f.transpose());
    const CMat3 q = 0.5 * f.transpose() * f;
    const cplx tr = eps.trace();
    return m.lambda * (q.trace() * id + tr * f) + 2.0 * m.mu * (q + f * eps) + m.a * eps * eps +
           m.b * (2.0 * tr * eps + (eps * eps).trace() * id) + m.c * tr * tr * id;
}

/// i * g * xi_out for two rank-one inputs, by polarizing the quadratic stress.
inline CVec3 symbol_full(const fivec::Moduli& m, const CVec3& pol1, const Vec3& xi1, const CVec3& pol2,
                         const Vec3& xi2) {
    const CMat3 w1 = pol1 * xi1.cast<cplx>().transpose();
    const CMat3 w2 = pol2 * xi2.cast<cplx>().transpose();
    const CMat3 cross = stress_quadratic(m, w1 + w2) - stress_quadratic(m, w1) - stress_quadratic(m, w2);
    const Vec3 out = xi1 + xi2;
    return cplx(0.0, 1.0) * (-cross * out.cast<cplx>());
}

/// Output-mode directions {P, SH, SV} of the plane spanned by xi1, xi2 at the output xi1 + xi2.
struct Directions {
    Vec3 p, sh, sv;
};

inline Directions output_directions(const Vec3& xi1, const Vec3& xi2) {
    Directions d;
    d.sv = xi1.cross(xi2).normalized();
    d.p = (xi1 + xi2).normalized();
    d.sh = d.sv.cross(d.p);
    return d;
}

inline cplx project(const CVec3& v, const Vec3& dir) { return dir.cast<cplx>().dot(v); }

/// Fixed-step RK4 of dx/dt = -c^2 xi / tau, dxi/dt = |xi|^2 grad(c^2) / (2 tau) with tau fixed.
inline Vec3 rk4_ray_endpoint(const fivec::MediumField& med, fivec::Mode mode, const fivec::Covector& start,
                             double t_end, int steps) {
    const double tau = start.tau;
    auto rhs = [&](const Vec3& x, const Vec3& xi, Vec3& dx, Vec3& dxi) {
        const fivec::ModuliSample s = med.sample(x);
        const bool p = mode == fivec::Mode::P;
        const double c2 = p ? s.value.lambda + 2.0 * s.value.mu : s.value.mu;
        Vec3 grad;
        for (int k = 0; k < 3; ++k)
            grad[k] = p ? s.gradient[k].lambda + 2.0 * s.gradient[k].mu : s.gradient[k].mu;
        dx = -c2 * xi / tau;
        dxi = xi.squaredNorm() * grad / (2.0 * tau);
    };
    Vec3 x = start.x, xi = start.xi;
    const double h = (t_end - start.t) / steps;
    for (int n = 0; n < steps; ++n) {
        Vec3 k1x, k1k, k2x, k2k, k3x, k3k, k4x, k4k;
        rhs(x, xi, k1x, k1k);
        rhs(x + 0.5 * h * k1x, xi + 0.5 * h * k1k, k2x, k2k);
        rhs(x + 0.5 * h * k2x, xi + 0.5 * h * k2k, k3x, k3k);
        rhs(x + h * k3x, xi + h * k3k, k4x, k4k);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        xi += h / 6.0 * (k1k + 2.0 * k2k + 2.0 * k3k + k4k);
    }
    return x;
}

/// Roots of a b^2 + c1 b + c0 = 0, larger first; NaN pair when complex.
inline std::pair<double, double> quadratic_roots(double a, double c1, double c0) {
    const double d = c1 * c1 - 4.0 * a * c0;
    if (d < 0.0) return {NAN, NAN};
    return {(-c1 + std::sqrt(d)) / (2.0 * a), (-c1 - std::sqrt(d)) / (2.0 * a)};
}

}  // namespace oracle
