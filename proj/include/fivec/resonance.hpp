#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fivec/kinematics.hpp"
#include "fivec/medium.hpp"
#include "fivec/types.hpp"

namespace fivec {

/// Polarization amplitudes of one incoming wave.
/// a:   P amplitude, polarization = a * xi (xi not normalized).
/// b_h: S amplitude along the in-plane unit vector normal x xi/|xi|.
/// b_v: S amplitude along the plane normal.
struct ModeAmplitudes {
    cplx a{0.0};
    cplx b_h{0.0};
    cplx b_v{0.0};
};

/// Orthonormal description of the interaction plane.
struct Frame {
    Vec3 v = Vec3::Zero();      // unit(xi1 x xi2)
    Vec3 h1 = Vec3::Zero();     // v x xi1/|xi1|
    Vec3 h2 = Vec3::Zero();     // v x xi2/|xi2|
    Vec3 e_out = Vec3::Zero();  // output_xi / |output_xi|
    Vec3 h_out = Vec3::Zero();  // v x e_out
    double alpha = 0.0;         // angle(xi1, xi2)
    double psi = 0.0;           // angle(output_xi, xi2)
};

/// Builds the frame. Inputs must be linearly independent and output_xi nonzero.
/// For mixed P/S pairs pass the P wavevector first, so psi is measured from the S input.
Frame build_frame(const Vec3& xi1, const Vec3& xi2, const Vec3& output_xi);

CVec3 polarization_from(Mode mode, const Vec3& xi, const Vec3& normal, const ModeAmplitudes& amp);
ModeAmplitudes amplitudes_of(const CVec3& polarization, const Vec3& xi, const Vec3& normal);

/// Two incoming characteristic covectors at a common point, with physical polarization vectors.
struct InteractionConfig {
    Covector zeta1;
    Covector zeta2;
    CVec3 pol1 = CVec3::Zero();
    CVec3 pol2 = CVec3::Zero();
    Vec3 normal = Vec3::Zero();  // unit(xi1 x xi2)
    double alpha = 0.0;

    static InteractionConfig make(const Covector& z1, const Covector& z2, const CVec3& pol1 = CVec3::Zero(),
                                  const CVec3& pol2 = CVec3::Zero());
    static InteractionConfig from_amplitudes(const Covector& z1, const Covector& z2, const ModeAmplitudes& a1,
                                             const ModeAmplitudes& a2);

    ModeAmplitudes amplitudes1() const { return amplitudes_of(pol1, zeta1.xi, normal); }
    ModeAmplitudes amplitudes2() const { return amplitudes_of(pol2, zeta2.xi, normal); }

    /// Config with zeta2 replaced by b*zeta2. For b < 0 the second polarization is conjugated
    /// (a real wave carries the conjugate symbol on the opposite cone).
    InteractionConfig scaled_second(double b) const;

    /// Same waves with the inputs swapped.
    InteractionConfig swapped() const;
};

enum class ResonanceCase { PP_S, PS_P, PS_S, SP_P, SP_S, SS_P };
std::string to_string(ResonanceCase c);

/// Outputs zeta = zeta1 + b zeta2 on the variety of out_mode. Roots refer to the covectors as given.
struct ResonanceResult {
    ResonanceCase tag = ResonanceCase::PP_S;
    Mode out_mode = Mode::S;
    bool interacts = true;
    double discriminant = 0.0;  // normalized quarter-discriminant (quadratic cases)
    std::vector<double> roots;
    std::vector<Covector> outputs;
    std::vector<double> residuals;  // relative variety residual of each output
};

/// Normalized quarter-discriminant of the S+S -> P quadratic as a function of cos(alpha).
double ss_discriminant(double cos_alpha, const MaterialPoint& p);

ResonanceResult solve_pp_to_s(const InteractionConfig& cfg, const MaterialPoint& p);
std::pair<ResonanceResult, ResonanceResult> solve_ps(const InteractionConfig& cfg, const MaterialPoint& p);
ResonanceResult solve_ss_to_p(const InteractionConfig& cfg, const MaterialPoint& p);

/// Dispatches on the input modes and returns every resonant output family.
std::vector<ResonanceResult> solve_resonances(const InteractionConfig& cfg, const MaterialPoint& p);

/// True if some b in [b_lo, b_hi] other than b = 0 puts zeta1 + b zeta2 on the variety of `mode`.
/// Scans a uniform grid for sign changes of the residual.
bool scan_for_outputs(const InteractionConfig& cfg, const MaterialPoint& p, Mode mode, double b_lo, double b_hi,
                      int samples);

}  // namespace fivec
