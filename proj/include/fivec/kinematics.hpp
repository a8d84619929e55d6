#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "fivec/medium.hpp"
#include "fivec/types.hpp"

namespace fivec {

/// A point-attached covector (t, x; tau, xi).
/// Sign convention used everywhere: forward-in-time waves have tau < 0 and xi along propagation,
/// so the phase is x.xi + t.tau and the group velocity is -c^2 xi / tau.
struct Covector {
    double t = 0.0;
    Vec3 x = Vec3::Zero();
    double tau = 0.0;
    Vec3 xi = Vec3::Zero();
    Mode mode = Mode::unclassified;
};

/// p_mode = tau^2 - c_mode^2 |xi|^2.
double characteristic_residual(const Covector& cv, const Moduli& m);

/// |p_mode| / (tau^2 + |xi|^2).
double relative_residual(const Covector& cv, const Moduli& m);

/// Forward covector on the variety of `mode`: tau = -c |xi|.
Covector forward_covector(const Vec3& x, const Vec3& xi, Mode mode, const MaterialPoint& p, double t = 0.0);

/// Throws ValidationError unless cv is nonzero and on its claimed variety within tol.
void check_on_variety(const Covector& cv, const Moduli& m, double tol = 1e-8);

enum class BoundaryTag { elliptic, hyperbolic, glancing };
std::string to_string(BoundaryTag t);

struct ModeBoundary {
    BoundaryTag tag = BoundaryTag::elliptic;
    double discriminant = 0.0;       // z^2 = tau^2/c^2 - |xi_bdy|^2
    double z_forward = 0.0;          // valid for hyperbolic and glancing
    Vec3 xi_forward = Vec3::Zero();  // xi_bdy - z_forward * normal
    std::complex<double> z_decaying; // elliptic root with Im z > 0
};

struct BoundaryClass {
    ModeBoundary p;
    ModeBoundary s;
};

/// Classifies a boundary covector. `normal` is the outward unit normal; the forward root
/// is the one whose group velocity points into the domain.
BoundaryClass classify_boundary(const Covector& cv_tangential, const Vec3& normal, const MaterialPoint& p);

struct StepControl {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double initial_dt = 1e-3;
    double max_dt = 0.1;
    long max_steps = 1000000;
    double drift_tol = 1e-9;
};

struct RaySample {
    double s = 0.0;
    double t = 0.0;
    Vec3 x = Vec3::Zero();
    double tau = 0.0;
    Vec3 xi = Vec3::Zero();
    double residual = 0.0;  // relative Hamiltonian residual
};

struct RayStats {
    long steps = 0;
    long rhs_evaluations = 0;
    double max_residual = 0.0;
};

/// Sampled bicharacteristic. The parameter s advances as dt/ds = -2 tau.
struct RayPath {
    Mode mode = Mode::unclassified;
    std::vector<RaySample> samples;
    RayStats stats;

    const RaySample& back() const { return samples.back(); }
    void write_csv(std::ostream& os) const;
};

/// Integrates the bicharacteristic of p_mode from start.t to t_end (either direction).
RayPath trace_ray(const Covector& start, const MediumField& m, double t_end, const StepControl& ctl = {});

/// Right-hand side of the ray equations in the time parameter: state (x, xi), tau fixed.
void ray_rhs(const MediumField& m, Mode mode, double tau, const double* state, double* dstate);

/// -c^2 xi / tau; throws ValidationError off the variety.
Vec3 group_velocity(const Covector& cv, const MaterialPoint& p);

}  // namespace fivec
