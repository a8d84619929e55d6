#include "fivec/kinematics.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "fivec/errors.hpp"
#include "fivec/format.hpp"

namespace fivec {

namespace odeint = boost::numeric::odeint;

double characteristic_residual(const Covector& cv, const Moduli& m) {
    return cv.tau * cv.tau - speed_squared(m, cv.mode) * cv.xi.squaredNorm();
}

double relative_residual(const Covector& cv, const Moduli& m) {
    const double scale = cv.tau * cv.tau + cv.xi.squaredNorm();
    return std::abs(characteristic_residual(cv, m)) / scale;
}

Covector forward_covector(const Vec3& x, const Vec3& xi, Mode mode, const MaterialPoint& p, double t) {
    const double c2 = speed_squared(p.moduli(), mode);
    return Covector{t, x, -std::sqrt(c2) * xi.norm(), xi, mode};
}

void check_on_variety(const Covector& cv, const Moduli& m, double tol) {
    if (cv.tau == 0.0 && cv.xi.squaredNorm() == 0.0) throw ValidationError("zero covector");
    if (cv.mode == Mode::unclassified) throw ValidationError("covector has no mode");
    const double r = relative_residual(cv, m);
    if (r > tol) {
        std::ostringstream os;
        os << "covector is not on the " << to_string(cv.mode) << " variety (relative residual " << r << ")";
        throw ValidationError(os.str());
    }
}

std::string to_string(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::elliptic: return "elliptic";
        case BoundaryTag::hyperbolic: return "hyperbolic";
        case BoundaryTag::glancing: return "glancing";
    }
    return "elliptic";
}

namespace {

ModeBoundary classify_mode(double tau, const Vec3& xi_bdy, const Vec3& normal, double c2) {
    ModeBoundary mb;
    const double t2 = tau * tau / c2;
    const double x2 = xi_bdy.squaredNorm();
    mb.discriminant = t2 - x2;
    const double scale = t2 + x2;
    if (std::abs(mb.discriminant) <= 1e-9 * scale) {
        mb.tag = BoundaryTag::glancing;
        mb.z_forward = 0.0;
        mb.xi_forward = xi_bdy;
    } else if (mb.discriminant > 0.0) {
        mb.tag = BoundaryTag::hyperbolic;
        // Inward group velocity component is -c^2 z / tau for an outward normal.
        const double root = std::sqrt(mb.discriminant);
        mb.z_forward = tau > 0.0 ? -root : root;
        mb.xi_forward = xi_bdy - mb.z_forward * normal;
    } else {
        mb.tag = BoundaryTag::elliptic;
        mb.z_decaying = {0.0, std::sqrt(-mb.discriminant)};
    }
    return mb;
}

}  // namespace

BoundaryClass classify_boundary(const Covector& cv, const Vec3& normal, const MaterialPoint& p) {
    if (cv.tau == 0.0 && cv.xi.squaredNorm() == 0.0) throw ValidationError("zero boundary covector");
    const double nn = normal.norm();
    if (std::abs(nn - 1.0) > 1e-12) throw ValidationError("boundary normal must be a unit vector");
    if (std::abs(cv.xi.dot(normal)) > 1e-12 * (cv.xi.norm() + 1.0)) {
        throw ValidationError("boundary covector must be tangential (xi . normal = 0)");
    }
    BoundaryClass bc;
    bc.p = classify_mode(cv.tau, cv.xi, normal, speed_squared(p.moduli(), Mode::P));
    bc.s = classify_mode(cv.tau, cv.xi, normal, speed_squared(p.moduli(), Mode::S));
    return bc;
}

void ray_rhs(const MediumField& m, Mode mode, double tau, const double* y, double* dy) {
    const Vec3 x(y[0], y[1], y[2]);
    const Vec3 xi(y[3], y[4], y[5]);
    const ModuliSample smp = m.sample(x);
    const double c2 = speed_squared(smp.value, mode);
    Vec3 grad_c2;
    for (int k = 0; k < 3; ++k) grad_c2[k] = speed_squared(smp.gradient[k], mode);
    const Vec3 dx = -c2 * xi / tau;
    const Vec3 dxi = xi.squaredNorm() * grad_c2 / (2.0 * tau);
    for (int k = 0; k < 3; ++k) {
        dy[k] = dx[k];
        dy[3 + k] = dxi[k];
    }
}

namespace {

using State = std::array<double, 6>;

RaySample make_sample(const MediumField& m, Mode mode, double tau, double t0, double t, const State& y) {
    RaySample s;
    s.t = t;
    s.s = (t - t0) / (-2.0 * tau);
    s.x = Vec3(y[0], y[1], y[2]);
    s.tau = tau;
    s.xi = Vec3(y[3], y[4], y[5]);
    const Covector cv{t, s.x, tau, s.xi, mode};
    s.residual = relative_residual(cv, m.moduli_at(s.x));
    return s;
}

}  // namespace

RayPath trace_ray(const Covector& start, const MediumField& m, double t_end, const StepControl& ctl) {
    if (start.mode == Mode::unclassified) throw ValidationError("ray start needs a P or S mode");
    const Moduli m0 = m.moduli_at(start.x);
    if (auto why = moduli_violation(m0)) throw ValidationError("medium invalid at ray start: " + *why);
    check_on_variety(start, m0, std::max(1e-8, ctl.drift_tol));
    const auto box = m.bounds();
    if (box && !box->contains(start.x)) throw ValidationError("ray start lies outside the medium domain");

    const Mode mode = start.mode;
    const double tau = start.tau;
    long evals = 0;

    RayPath path;
    path.mode = mode;
    State y{start.x[0], start.x[1], start.x[2], start.xi[0], start.xi[1], start.xi[2]};
    path.samples.push_back(make_sample(m, mode, tau, start.t, start.t, y));
    if (t_end == start.t) return path;

    // The stepper runs in elapsed time sigma = |t - t0| so that backward tracing uses positive steps.
    const double dir = t_end > start.t ? 1.0 : -1.0;
    const double sigma_end = std::abs(t_end - start.t);
    auto rhs = [&](const State& y, State& dy, double) {
        ++evals;
        ray_rhs(m, mode, tau, y.data(), dy.data());
        for (double& v : dy) v *= dir;
    };
    auto time_of = [&](double sigma) { return start.t + dir * sigma; };
    auto stepper = odeint::make_dense_output(ctl.abs_tol, ctl.rel_tol, ctl.max_dt,
                                             odeint::runge_kutta_dopri5<State>());
    stepper.initialize(y, 0.0, std::min(ctl.initial_dt, sigma_end));

    auto fail_exit = [&](double s_lo, double s_hi) {
        // Bisect the dense-output interval for the boundary crossing.
        State ys;
        for (int it = 0; it < 80; ++it) {
            const double sm = 0.5 * (s_lo + s_hi);
            stepper.calc_state(sm, ys);
            if (box->contains(Vec3(ys[0], ys[1], ys[2]))) s_lo = sm;
            else s_hi = sm;
        }
        stepper.calc_state(s_hi, ys);
        const Vec3 hit(ys[0], ys[1], ys[2]);
        const double t_hit = time_of(s_hi);
        std::ostringstream os;
        os << "ray exits the medium domain at t = " << t_hit << ", x = (" << hit[0] << ", " << hit[1] << ", "
           << hit[2] << ")";
        throw DomainExitError(os.str(), hit, t_hit);
    };

    const double min_dt = 1e-14 * std::max(1.0, sigma_end);
    while (stepper.current_time() < sigma_end) {
        if (path.stats.steps >= ctl.max_steps) throw NumericError("ray tracing exceeded the step budget");
        const double s_prev = stepper.current_time();
        std::pair<double, double> span;
        try {
            span = stepper.do_step(rhs);
        } catch (const std::exception& e) {
            throw NumericError(std::string("ray integrator step failure: ") + e.what());
        }
        ++path.stats.steps;
        if (std::abs(span.second - span.first) < min_dt) {
            throw NumericError("ray integrator step size collapsed (stiff region)");
        }
        const bool past_end = span.second >= sigma_end;
        const double s_now = past_end ? sigma_end : span.second;
        const double t_now = past_end ? t_end : time_of(s_now);
        State yn;
        stepper.calc_state(s_now, yn);
        for (double v : yn) {
            if (!std::isfinite(v)) throw NumericError("ray integrator produced non-finite state");
        }
        if (box && !box->contains(Vec3(yn[0], yn[1], yn[2]))) fail_exit(s_prev, s_now);
        RaySample s = make_sample(m, mode, tau, start.t, t_now, yn);
        if (s.residual > ctl.drift_tol) {
            std::ostringstream os;
            os << "Hamiltonian drift " << s.residual << " exceeds tolerance " << ctl.drift_tol << " at t = " << t_now;
            throw NumericError(os.str());
        }
        path.samples.push_back(s);
        if (past_end) break;
    }
    for (const auto& s : path.samples) path.stats.max_residual = std::max(path.stats.max_residual, s.residual);
    path.stats.rhs_evaluations = evals;
    return path;
}

void RayPath::write_csv(std::ostream& os) const {
    os << "s,t,x1,x2,x3,tau,xi1,xi2,xi3,hamiltonian_residual\n";
    for (const auto& s : samples) {
        os << fmt_num(s.s) << ',' << fmt_num(s.t) << ',' << fmt_num(s.x[0]) << ',' << fmt_num(s.x[1]) << ','
           << fmt_num(s.x[2]) << ',' << fmt_num(s.tau) << ',' << fmt_num(s.xi[0]) << ',' << fmt_num(s.xi[1]) << ','
           << fmt_num(s.xi[2]) << ',' << fmt_num(s.residual) << '\n';
    }
}

Vec3 group_velocity(const Covector& cv, const MaterialPoint& p) {
    check_on_variety(cv, p.moduli());
    if (cv.tau == 0.0) throw ValidationError("group velocity undefined for tau = 0");
    return -speed_squared(p.moduli(), cv.mode) * cv.xi / cv.tau;
}

}  // namespace fivec
