#include "fivec/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fivec/errors.hpp"

namespace fivec {

namespace {

constexpr double kTransversalTol = 1e-10;
constexpr double kTieTol = 1e-9;

double angle_between(const Vec3& a, const Vec3& b) {
    // atan2 form keeps accuracy near 0 and pi.
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

Frame build_frame(const Vec3& xi1, const Vec3& xi2, const Vec3& output_xi) {
    const double n1 = xi1.norm(), n2 = xi2.norm(), no = output_xi.norm();
    if (n1 == 0.0 || n2 == 0.0) throw ValidationError("frame: zero wavevector");
    const Vec3 cr = xi1.cross(xi2);
    if (cr.norm() <= kTransversalTol * n1 * n2) throw ValidationError("frame: wavevectors are parallel");
    if (no == 0.0) throw ValidationError("frame: zero output wavevector");
    Frame f;
    f.v = cr.normalized();
    f.h1 = f.v.cross(xi1 / n1);
    f.h2 = f.v.cross(xi2 / n2);
    f.e_out = output_xi / no;
    f.h_out = f.v.cross(f.e_out);
    f.alpha = angle_between(xi1, xi2);
    f.psi = angle_between(output_xi, xi2);
    return f;
}

CVec3 polarization_from(Mode mode, const Vec3& xi, const Vec3& normal, const ModeAmplitudes& amp) {
    if (mode == Mode::P) return amp.a * xi.cast<cplx>();
    if (mode == Mode::S) {
        const Vec3 h = normal.cross(xi.normalized());
        return amp.b_h * h.cast<cplx>() + amp.b_v * normal.cast<cplx>();
    }
    throw ValidationError("polarization requested for an unclassified mode");
}

ModeAmplitudes amplitudes_of(const CVec3& pol, const Vec3& xi, const Vec3& normal) {
    ModeAmplitudes out;
    const Vec3 h = normal.cross(xi.normalized());
    out.a = (pol.transpose() * xi.cast<cplx>())(0) / xi.squaredNorm();
    out.b_h = (pol.transpose() * h.cast<cplx>())(0);
    out.b_v = (pol.transpose() * normal.cast<cplx>())(0);
    return out;
}

InteractionConfig InteractionConfig::make(const Covector& z1, const Covector& z2, const CVec3& pol1,
                                          const CVec3& pol2) {
    if (z1.mode == Mode::unclassified || z2.mode == Mode::unclassified) {
        throw ValidationError("interaction inputs need P or S modes");
    }
    const double n1 = z1.xi.norm(), n2 = z2.xi.norm();
    if (n1 == 0.0 || n2 == 0.0) throw ValidationError("interaction inputs need nonzero wavevectors");
    const Vec3 cr = z1.xi.cross(z2.xi);
    if (cr.norm() <= kTransversalTol * n1 * n2) {
        throw ValidationError("non-transversal interaction: wavevectors are linearly dependent");
    }
    InteractionConfig cfg;
    cfg.zeta1 = z1;
    cfg.zeta2 = z2;
    cfg.pol1 = pol1;
    cfg.pol2 = pol2;
    cfg.normal = cr.normalized();
    cfg.alpha = angle_between(z1.xi, z2.xi);
    return cfg;
}

InteractionConfig InteractionConfig::from_amplitudes(const Covector& z1, const Covector& z2,
                                                     const ModeAmplitudes& a1, const ModeAmplitudes& a2) {
    InteractionConfig cfg = make(z1, z2);
    cfg.pol1 = polarization_from(z1.mode, z1.xi, cfg.normal, a1);
    cfg.pol2 = polarization_from(z2.mode, z2.xi, cfg.normal, a2);
    return cfg;
}

InteractionConfig InteractionConfig::scaled_second(double b) const {
    if (b == 0.0) throw ValidationError("scaling factor must be nonzero");
    Covector z2 = zeta2;
    z2.tau *= b;
    z2.xi *= b;
    return make(zeta1, z2, pol1, b > 0.0 ? pol2 : CVec3(pol2.conjugate()));
}

InteractionConfig InteractionConfig::swapped() const { return make(zeta2, zeta1, pol2, pol1); }

std::string to_string(ResonanceCase c) {
    switch (c) {
        case ResonanceCase::PP_S: return "PP->S";
        case ResonanceCase::PS_P: return "PS->P";
        case ResonanceCase::PS_S: return "PS->S";
        case ResonanceCase::SP_P: return "SP->P";
        case ResonanceCase::SP_S: return "SP->S";
        case ResonanceCase::SS_P: return "SS->P";
    }
    return "?";
}

namespace {

/// Inputs rescaled to unit wavevectors and forward (tau < 0) orientation.
struct Normalized {
    double cos_alpha;
    double to_given;  // b_given = b_normalized * to_given
};

Normalized normalize(const InteractionConfig& cfg, const MaterialPoint& p) {
    check_on_variety(cfg.zeta1, p.moduli());
    check_on_variety(cfg.zeta2, p.moduli());
    const double s1 = cfg.zeta1.tau < 0.0 ? 1.0 : -1.0;
    const double s2 = cfg.zeta2.tau < 0.0 ? 1.0 : -1.0;
    const double r1 = cfg.zeta1.xi.norm(), r2 = cfg.zeta2.xi.norm();
    const double c = s1 * s2 * cfg.zeta1.xi.dot(cfg.zeta2.xi) / (r1 * r2);
    return {std::clamp(c, -1.0, 1.0), s1 * s2 * r1 / r2};
}

/// Roots of q2 b^2 + 2 q1 b + q0 = 0 without cancellation; requires qd = q1^2 - q2 q0 >= 0.
std::pair<double, double> stable_roots(double q2, double q1, double q0, double qd) {
    const double sq = std::sqrt(std::max(qd, 0.0));
    const double q = -(q1 + std::copysign(sq, q1));
    double r1 = q / q2, r2 = q0 / q;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

void attach_outputs(ResonanceResult& res, const InteractionConfig& cfg, const MaterialPoint& p,
                    const std::vector<double>& roots_normalized, double to_given) {
    for (double bn : roots_normalized) {
        const double b = bn * to_given;
        Covector out;
        out.t = cfg.zeta1.t;
        out.x = cfg.zeta1.x;
        out.tau = cfg.zeta1.tau + b * cfg.zeta2.tau;
        out.xi = cfg.zeta1.xi + b * cfg.zeta2.xi;
        out.mode = res.out_mode;
        res.roots.push_back(b);
        res.outputs.push_back(out);
        res.residuals.push_back(relative_residual(out, p.moduli()));
    }
}

void require_modes(const InteractionConfig& cfg, Mode m1, Mode m2, const char* op) {
    if (cfg.zeta1.mode != m1 || cfg.zeta2.mode != m2) {
        throw ValidationError(std::string(op) + ": input modes do not match (" + to_string(cfg.zeta1.mode) + ", " +
                              to_string(cfg.zeta2.mode) + ")");
    }
}

}  // namespace

double ss_discriminant(double c, const MaterialPoint& p) {
    const double lp = p.lambda() + 2.0 * p.mu();
    const double lm = p.lambda() + p.mu();
    const double q1 = lp * c - p.mu();
    return (q1 * q1 - lm * lm) / (lp * lp);
}

ResonanceResult solve_pp_to_s(const InteractionConfig& cfg, const MaterialPoint& p) {
    require_modes(cfg, Mode::P, Mode::P, "solve_pp_to_s");
    const Normalized nz = normalize(cfg, p);
    if (nz.cos_alpha >= 1.0) throw ValidationError("non-transversal P+P input");
    const double lm = p.lambda() + p.mu();
    const double q1 = (p.lambda() + 2.0 * p.mu()) - p.mu() * nz.cos_alpha;
    const double qd = q1 * q1 - lm * lm;
    ResonanceResult res;
    res.tag = ResonanceCase::PP_S;
    res.out_mode = Mode::S;
    res.discriminant = qd / (q1 * q1 + lm * lm);
    if (std::abs(res.discriminant) < kTieTol) throw DegenerateError("P+P resonance roots coincide");
    const auto [r1, r2] = stable_roots(lm, q1, lm, qd);
    attach_outputs(res, cfg, p, {r1, r2}, nz.to_given);
    return res;
}

std::pair<ResonanceResult, ResonanceResult> solve_ps(const InteractionConfig& cfg, const MaterialPoint& p) {
    const bool p_first = cfg.zeta1.mode == Mode::P;
    if (!((cfg.zeta1.mode == Mode::P && cfg.zeta2.mode == Mode::S) ||
          (cfg.zeta1.mode == Mode::S && cfg.zeta2.mode == Mode::P))) {
        throw ValidationError("solve_ps: needs one P and one S input");
    }
    const InteractionConfig c = p_first ? cfg : cfg.swapped();
    const Normalized nz = normalize(c, p);
    if (std::abs(nz.cos_alpha) >= 1.0) throw ValidationError("non-transversal P+S input");
    const double lp = p.lambda() + 2.0 * p.mu();
    const double lm = p.lambda() + p.mu();
    const double cpcs = std::sqrt(p.mu() * lp);

    ResonanceResult rp, rs;
    rp.tag = p_first ? ResonanceCase::PS_P : ResonanceCase::SP_P;
    rp.out_mode = Mode::P;
    rs.tag = p_first ? ResonanceCase::PS_S : ResonanceCase::SP_S;
    rs.out_mode = Mode::S;

    // b^2 (lambda+mu) + 2b ((lambda+2mu) cos - c_P c_S) = 0, root b = 0 discarded.
    const double bp = 2.0 * (cpcs - lp * nz.cos_alpha) / lm;
    // 2b (c_P c_S - mu cos) + (lambda + mu) = 0.
    const double lin = 2.0 * (cpcs - p.mu() * nz.cos_alpha);
    if (std::abs(lin) < kTieTol * (cpcs + p.mu())) {
        throw DegenerateError("P+S resonance: vanishing linear coefficient for the S output");
    }
    const double bs = -lm / lin;
    if (std::abs(bp) < kTieTol) throw DegenerateError("P+S resonance: P-output root coincides with b = 0");

    attach_outputs(rp, c, p, {bp}, nz.to_given);
    attach_outputs(rs, c, p, {bs}, nz.to_given);
    if (!p_first) {
        // zeta_P + b zeta_S = b (zeta_S + zeta_P / b): report roots for the given order.
        for (auto* r : {&rp, &rs}) {
            for (size_t i = 0; i < r->roots.size(); ++i) {
                const double b = 1.0 / r->roots[i];
                r->roots[i] = b;
                Covector& o = r->outputs[i];
                o.tau = cfg.zeta1.tau + b * cfg.zeta2.tau;
                o.xi = cfg.zeta1.xi + b * cfg.zeta2.xi;
                r->residuals[i] = relative_residual(o, p.moduli());
            }
        }
    }
    return {rp, rs};
}

ResonanceResult solve_ss_to_p(const InteractionConfig& cfg, const MaterialPoint& p) {
    require_modes(cfg, Mode::S, Mode::S, "solve_ss_to_p");
    const Normalized nz = normalize(cfg, p);
    if (nz.cos_alpha >= 1.0) throw ValidationError("non-transversal S+S input");
    const double lp = p.lambda() + 2.0 * p.mu();
    const double lm = p.lambda() + p.mu();
    const double q1 = lp * nz.cos_alpha - p.mu();
    const double qd = q1 * q1 - lm * lm;
    ResonanceResult res;
    res.tag = ResonanceCase::SS_P;
    res.out_mode = Mode::P;
    res.discriminant = ss_discriminant(nz.cos_alpha, p);
    if (std::abs(res.discriminant) < kTieTol) {
        throw DegenerateError("S+S resonance at the interaction threshold (double root)");
    }
    if (qd < 0.0) {
        res.interacts = false;
        return res;
    }
    const auto [r1, r2] = stable_roots(lm, q1, lm, qd);
    attach_outputs(res, cfg, p, {r1, r2}, nz.to_given);
    return res;
}

std::vector<ResonanceResult> solve_resonances(const InteractionConfig& cfg, const MaterialPoint& p) {
    const Mode m1 = cfg.zeta1.mode, m2 = cfg.zeta2.mode;
    if (m1 == Mode::P && m2 == Mode::P) return {solve_pp_to_s(cfg, p)};
    if (m1 == Mode::S && m2 == Mode::S) return {solve_ss_to_p(cfg, p)};
    auto [a, b] = solve_ps(cfg, p);
    return {a, b};
}

bool scan_for_outputs(const InteractionConfig& cfg, const MaterialPoint& p, Mode mode, double b_lo, double b_hi,
                      int samples) {
    auto resid = [&](double b) {
        Covector o{0.0, Vec3::Zero(), cfg.zeta1.tau + b * cfg.zeta2.tau, cfg.zeta1.xi + b * cfg.zeta2.xi, mode};
        return characteristic_residual(o, p.moduli());
    };
    const double guard = 1e-6 * std::max(std::abs(b_lo), std::abs(b_hi));
    double prev_b = b_lo, prev = resid(b_lo);
    for (int i = 1; i <= samples; ++i) {
        const double b = b_lo + (b_hi - b_lo) * i / samples;
        const double r = resid(b);
        const bool near_zero_root = std::abs(b) < guard || std::abs(prev_b) < guard || (prev_b < 0.0) != (b < 0.0);
        if (!near_zero_root && ((prev < 0.0) != (r < 0.0) || r == 0.0)) return true;
        prev = r;
        prev_b = b;
    }
    return false;
}

}  // namespace fivec
