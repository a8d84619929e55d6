#include "fivec/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fivec/errors.hpp"

namespace fivec {

LameResult recover_lame(const std::vector<TravelTime>& times) {
    double lt[2] = {0, 0}, ll[2] = {0, 0};
    int count[2] = {0, 0};
    for (const auto& tt : times) {
        const int k = tt.mode == Mode::P ? 0 : tt.mode == Mode::S ? 1 : -1;
        if (k < 0) throw ValidationError("travel time needs a P or S mode");
        const double len = (tt.end - tt.start).norm();
        if (!(tt.time > 0.0) || !(len > 0.0)) throw ValidationError("travel times and chord lengths must be positive");
        lt[k] += len * tt.time;
        ll[k] += len * len;
        ++count[k];
    }
    if (count[0] == 0 || count[1] == 0) throw ValidationError("need at least one P and one S traversal");
    LameResult r;
    r.c_p = ll[0] / lt[0];
    r.c_s = ll[1] / lt[1];
    r.mu = r.c_s * r.c_s;
    r.lambda = r.c_p * r.c_p - 2.0 * r.mu;
    if (!(r.c_s < r.c_p)) {
        std::ostringstream os;
        os << "inconsistent travel times: c_S = " << r.c_s << " is not below c_P = " << r.c_p
           << " (lambda + mu <= 0)";
        throw ValidationError(os.str());
    }
    double sq[2] = {0, 0};
    for (const auto& tt : times) {
        const int k = tt.mode == Mode::P ? 0 : 1;
        const double pred = (tt.end - tt.start).norm() / (k == 0 ? r.c_p : r.c_s);
        sq[k] += (tt.time - pred) * (tt.time - pred);
    }
    r.rms_residual_p = std::sqrt(sq[0] / count[0]);
    r.rms_residual_s = std::sqrt(sq[1] / count[1]);
    return r;
}

Measurement synthesize_measurement(InteractionCase c, const MaterialPoint& p, double alpha, double psi,
                                   const Magnitudes& mags, cplx amp1, cplx amp2) {
    Measurement m;
    m.kase = c;
    m.alpha = alpha;
    m.psi = psi;
    m.mags = mags;
    m.amp1 = amp1;
    m.amp2 = amp2;
    m.measured = closed_form_amplitude(c, p, mags, amp1, amp2, alpha, psi);
    return m;
}

double det_v(double psi1, double psi2) {
    const double c1 = std::cos(psi1), s1 = std::sin(psi1), c2 = std::cos(psi2), s2 = std::sin(psi2);
    return c1 * c1 * s2 * s2 - s1 * s1 * c2 * c2;
}

namespace {

constexpr double kRankTol = 1e-9;
constexpr double kRidgeTol = 1e-6;

/// Measured amplitude divided by phase, amplitudes and prefactor: an estimate of the angular factor.
cplx normalized(const Measurement& m) {
    const cplx scale = case_phase(m.kase) * m.amp1 * m.amp2 * case_prefactor(m.kase, m.mags);
    if (std::abs(scale) == 0.0) throw ValidationError("measurement has zero incoming amplitude");
    return m.measured / scale;
}

double normalized_noise(const Measurement& m) {
    const double scale = std::abs(m.amp1 * m.amp2) * case_prefactor(m.kase, m.mags);
    return m.noise_level / scale;
}

void check_measurement(const Measurement& m) {
    if (!(m.alpha > 0.0 && m.alpha < M_PI) || !(m.psi > 0.0 && m.psi < M_PI)) {
        throw ValidationError("measurement angles must lie in (0, pi)");
    }
    if (m.kase == InteractionCase::SHSV) throw ValidationError("SH+SV measurements carry no information");
    if (!(m.mags.xi1 > 0.0 && m.mags.xi2 > 0.0 && m.mags.out > 0.0)) {
        throw ValidationError("measurement magnitudes must be positive");
    }
}

struct LsSolution {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov_unit = Eigen::Matrix2d::Zero();  // (M^T M)^-1
    double determinant = 0.0;
    double condition = 0.0;
    double rel_sigma = 0.0;
    bool ridge = false;
    double ridge_value = 0.0;
    Eigen::VectorXd residuals;
    bool weighted = false;
};

/// Least squares for two unknowns; throws DegenerateError on rank deficiency. When every row has a
/// positive noise level the rows are weighted by 1/noise (generalized least squares).
LsSolution solve_two(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, const Eigen::VectorXd& noise,
                     const char* what) {
    if (M.rows() < 2) throw DegenerateError(std::string(what) + ": need at least two measurements");
    LsSolution out;
    out.weighted = noise.size() == M.rows() && noise.minCoeff() > 0.0;
    const Eigen::VectorXd w = out.weighted ? Eigen::VectorXd(noise.cwiseInverse())
                                           : Eigen::VectorXd::Ones(M.rows());
    const Eigen::MatrixXd Mw = w.asDiagonal() * M;
    const Eigen::VectorXd yw = w.asDiagonal() * y;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Mw);
    const auto sv = svd.singularValues();
    out.rel_sigma = sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
    if (out.rel_sigma < kRankTol) {
        std::ostringstream os;
        os << what << ": degenerate measurement set (rank-deficient angle system, sigma_min/sigma_max = "
           << out.rel_sigma << ")";
        throw DegenerateError(os.str());
    }
    out.condition = 1.0 / out.rel_sigma;
    out.determinant = M.rows() == 2 ? M.determinant() : sv(0) * sv(1);
    Eigen::Matrix2d normal = Mw.transpose() * Mw;
    if (out.rel_sigma < kRidgeTol) {
        out.ridge = true;
        out.ridge_value = 1e-12 * sv(0) * sv(0);
        normal += out.ridge_value * Eigen::Matrix2d::Identity();
    }
    out.cov_unit = normal.inverse();
    out.x = out.cov_unit * (Mw.transpose() * yw);
    out.residuals = y - M * out.x;
    return out;
}

/// Standard deviations of the unknowns. Weighted fits use the propagated noise covariance; unweighted
/// fits use the residual scatter (if over-determined) plus any propagated noise.
Eigen::Vector2d uncertainty(const LsSolution& s, const Eigen::MatrixXd& M, const Eigen::VectorXd& noise) {
    if (s.weighted) return {std::sqrt(s.cov_unit(0, 0)), std::sqrt(s.cov_unit(1, 1))};
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    const long n = M.rows();
    if (n > 2) cov += s.cov_unit * (s.residuals.squaredNorm() / static_cast<double>(n - 2));
    if (noise.size() == n && noise.squaredNorm() > 0.0) {
        const Eigen::MatrixXd W = noise.cwiseAbs2().asDiagonal();
        cov += s.cov_unit * M.transpose() * W * M * s.cov_unit;
    }
    return {std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1))};
}

void fill_common(RecoveryDiagnostics& d, const LsSolution& s) {
    d.determinant = s.determinant;
    d.condition = s.condition;
    d.ridge_used = s.ridge;
    d.ridge = s.ridge_value;
    d.residual_norm = s.residuals.norm();
    d.residuals.assign(s.residuals.data(), s.residuals.data() + s.residuals.size());
}

}  // namespace

PairSolution solve_psh_sh_pair(const Measurement& m1, const Measurement& m2) {
    if (m1.kase != InteractionCase::PSH_SH || m2.kase != InteractionCase::PSH_SH) {
        throw ValidationError("pair solve needs two P+SH->SH measurements");
    }
    PairSolution ps;
    ps.determinant = det_v(m1.psi, m2.psi);
    if (std::abs(ps.determinant) < kRankTol) {
        throw DegenerateError("degenerate P+SH->SH angle pair: det(v(psi1), v(psi2)) vanishes (psi1 = psi2 or "
                              "psi1 + psi2 = pi)");
    }
    const double y1 = normalized(m1).real(), y2 = normalized(m2).real();
    const double c1 = std::pow(std::cos(m1.psi), 2), s1 = std::pow(std::sin(m1.psi), 2);
    const double c2 = std::pow(std::cos(m2.psi), 2), s2 = std::pow(std::sin(m2.psi), 2);
    // s_a c^2 - s_b s^2 = y; the system matrix has determinant -det_v.
    ps.s_a = (y1 * s2 - y2 * s1) / ps.determinant;
    ps.s_b = (y1 * c2 - y2 * c1) / ps.determinant;
    return ps;
}

RecoveryResult recover_AB(const std::vector<Measurement>& ms, double lambda, double mu) {
    const MaterialPoint lame(lambda, mu);
    const long n = static_cast<long>(ms.size());
    Eigen::MatrixXd M(n, 2);
    Eigen::VectorXd y(n), noise(n);
    double imag = 0.0;
    for (long i = 0; i < n; ++i) {
        const Measurement& m = ms[i];
        check_measurement(m);
        if (m.kase != InteractionCase::PSV_SV) throw ValidationError("recover_AB takes P+SV->SV measurements only");
        const cplx yn = normalized(m);
        M(i, 0) = std::cos(m.psi);
        M(i, 1) = std::cos(m.alpha) * std::cos(m.alpha - m.psi);
        y(i) = yn.real();
        noise(i) = normalized_noise(m);
        imag = std::max(imag, std::abs(yn.imag()));
    }
    const LsSolution s = solve_two(M, y, noise, "recover_AB");
    RecoveryResult r;
    r.lambda = lame.lambda();
    r.mu = lame.mu();
    r.b = s.x(0) - lambda;
    r.a = 2.0 * (s.x(1) - 2.0 * mu);
    r.a_plus_2b = r.a + 2.0 * r.b;
    const Eigen::Vector2d sig = uncertainty(s, M, noise);
    r.sigma_b = sig(0);
    r.sigma_a = 2.0 * sig(1);
    r.diag.system = "P+SV->SV: (lambda + B) cos(psi) + (2 mu + A/2) cos(alpha) cos(alpha - psi)";
    r.diag.measurements_used = static_cast<int>(n);
    r.diag.imag_residual = imag;
    fill_common(r.diag, s);
    return r;
}

RecoveryResult recover_AB_alt(const std::vector<Measurement>& ms, double lambda, double mu) {
    const MaterialPoint lame(lambda, mu);
    const Moduli base{lambda, mu, 0.0, 0.0, 0.0};
    const Moduli unit_a{0.0, 0.0, 1.0, 0.0, 0.0};
    const Moduli unit_b{0.0, 0.0, 0.0, 1.0, 0.0};

    RecoveryResult r;
    r.lambda = lambda;
    r.mu = mu;
    std::vector<const Measurement*> pair;
    for (const auto& m : ms) {
        check_measurement(m);
        if (m.kase == InteractionCase::PSH_SH) pair.push_back(&m);
    }
    if (pair.size() >= 2) {
        r.diag.pair = solve_psh_sh_pair(*pair[0], *pair[1]);
        r.diag.has_pair = true;
        const double gap = r.diag.pair.s_a - r.diag.pair.s_b - (lambda + mu);
        std::ostringstream os;
        os << "P+SH->SH pair: s_a - s_b - (lambda + mu) = " << gap;
        r.diag.notes.push_back(os.str());
    }

    const long n = static_cast<long>(ms.size());
    Eigen::MatrixXd M(n, 2);
    Eigen::VectorXd y(n), noise(n);
    double imag = 0.0;
    bool only_in_plane = true;
    for (long i = 0; i < n; ++i) {
        const Measurement& m = ms[i];
        const cplx yn = normalized(m);
        const double r0 = angular_factor(m.kase, base, m.alpha, m.psi);
        M(i, 0) = angular_factor(m.kase, unit_a, m.alpha, m.psi);
        M(i, 1) = angular_factor(m.kase, unit_b, m.alpha, m.psi);
        y(i) = yn.real() - r0;
        noise(i) = normalized_noise(m);
        imag = std::max(imag, std::abs(yn.imag()));
        const double rn = std::hypot(M(i, 0), M(i, 1));
        only_in_plane = only_in_plane && std::abs(2.0 * M(i, 0) - M(i, 1)) <= 1e-12 * std::max(rn, 1e-300);
    }
    if (only_in_plane && n > 0) {
        // Every row is proportional to (1, 2): only A + 2B is determined.
        double num = 0.0, den = 0.0;
        for (long i = 0; i < n; ++i) {
            num += M(i, 0) * y(i);
            den += M(i, 0) * M(i, 0);
        }
        const double a2b = den > 0.0 ? num / den : std::nan("");
        std::ostringstream os;
        os << "recover_AB_alt: in-plane rows (P+P->SH, P+SH->P, P+SH->SH, SH+SH->P) depend on A and B only "
              "through A + 2B = "
           << a2b << "; add an SV row (P+SV->SV or SV+SV->P) to separate A and B";
        throw IdentifiabilityError(os.str(), a2b);
    }
    const LsSolution s = solve_two(M, y, noise, "recover_AB_alt");
    r.a = s.x(0);
    r.b = s.x(1);
    r.a_plus_2b = r.a + 2.0 * r.b;
    const Eigen::Vector2d sig = uncertainty(s, M, noise);
    r.sigma_a = sig(0);
    r.sigma_b = sig(1);
    r.diag.system = "multi-row least squares in (A, B)";
    r.diag.measurements_used = static_cast<int>(n);
    r.diag.imag_residual = imag;
    fill_common(r.diag, s);
    if (r.diag.has_pair) r.diag.determinant = r.diag.pair.determinant;
    return r;
}

std::vector<InteractionConfig> resonant_configs(InteractionCase c, const MaterialPoint& p, const Vec3& d1,
                                                const Vec3& d2, cplx amp1, cplx amp2) {
    const CaseInfo info = case_info(c);
    const Covector z1 = forward_covector(Vec3::Zero(), d1.normalized(), info.in1, p);
    const Covector z2 = forward_covector(Vec3::Zero(), d2.normalized(), info.in2, p);
    ModeAmplitudes m1, m2;
    (info.in1 == Mode::P ? m1.a : (c == InteractionCase::SVSV_P ? m1.b_v : m1.b_h)) = amp1;
    const bool v2 = c == InteractionCase::PSV_SV || c == InteractionCase::SVSV_P || c == InteractionCase::SHSV;
    (info.in2 == Mode::P ? m2.a : (v2 ? m2.b_v : m2.b_h)) = amp2;
    const InteractionConfig cfg = InteractionConfig::from_amplitudes(z1, z2, m1, m2);

    ResonanceResult res;
    switch (c) {
        case InteractionCase::PP_SH: res = solve_pp_to_s(cfg, p); break;
        case InteractionCase::PSH_P: res = solve_ps(cfg, p).first; break;
        case InteractionCase::PSH_SH:
        case InteractionCase::PSV_SV: res = solve_ps(cfg, p).second; break;
        default: res = solve_ss_to_p(cfg, p); break;
    }
    std::vector<InteractionConfig> out;
    if (!res.interacts) return out;
    for (double b : res.roots) out.push_back(cfg.scaled_second(b));
    return out;
}

CReport c_identifiability_report(const MaterialPoint& p, const std::vector<double>& perturbations,
                                 int configs_per_case, uint64_t seed) {
    CReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double threshold = -p.lambda() / (p.lambda() + 2.0 * p.mu());
    for (InteractionCase c : all_cases()) {
        CSensitivity cs{c, 0.0, 0};
        const CaseInfo info = case_info(c);
        int made = 0;
        for (int attempt = 0; made < configs_per_case && attempt < 100 * configs_per_case; ++attempt) {
            const Vec3 d1 = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
            const Vec3 d2 = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
            const double ca = d1.dot(d2);
            if (std::abs(ca) > 0.999) continue;
            if (info.needs_interaction_condition && ca > threshold - 1e-3) continue;
            std::vector<InteractionConfig> cfgs;
            try {
                cfgs = resonant_configs(c, p, d1, d2, cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng)));
            } catch (const DegenerateError&) {
                continue;
            }
            if (cfgs.empty()) continue;
            ++made;
            for (const auto& cfg : cfgs) {
                const RankOneSymbol s1{cfg.pol1, cfg.zeta1.xi}, s2{cfg.pol2, cfg.zeta2.xi};
                std::vector<OutputMode> outs{info.out};
                if (c == InteractionCase::PP_SH) outs = {OutputMode::SH, OutputMode::SV};
                for (OutputMode om : outs) {
                    const cplx ref = symbol_at(p, s1, s2, om).amplitude();
                    const auto [a1, a2] = case_amplitudes(c, cfg);
                    const double unit = std::abs(a1 * a2) * case_prefactor(c, magnitudes_of(cfg));
                    for (double dc : perturbations) {
                        if (dc == 0.0) continue;
                        const MaterialPoint q = p.with_landau(p.a_landau(), p.b_landau(), p.c_landau() + dc);
                        const cplx v = symbol_at(q, s1, s2, om).amplitude();
                        cs.max_change = std::max(cs.max_change, std::abs(v - ref));
                        cs.max_sensitivity = std::max(cs.max_sensitivity, std::abs(v - ref) / (std::abs(dc) * unit));
                        ++cs.evaluations;
                    }
                }
            }
        }
        report.max_change = std::max(report.max_change, cs.max_change);
        report.max_sensitivity = std::max(report.max_sensitivity, cs.max_sensitivity);
        report.per_case.push_back(cs);
    }
    return report;
}

RecoveryResult end_to_end_recovery(const std::vector<ExperimentOutcome>& outcomes, double lambda, double mu) {
    std::vector<Measurement> used;
    std::vector<std::string> notes;
    for (const auto& o : outcomes) {
        const Measurement& m = o.m;
        if (m.noise_level > 0.0 && std::abs(m.measured) < 3.0 * m.noise_level) {
            std::ostringstream os;
            os << "non-informative measurement '" << o.label << "' (" << to_string(m.kase)
               << "): amplitude " << std::abs(m.measured) << " is below 3x its noise floor " << m.noise_level;
            notes.push_back(os.str());
            continue;
        }
        used.push_back(m);
    }
    if (used.size() < 2) {
        std::string msg = "end_to_end_recovery: insufficient informative experiments (" +
                          std::to_string(used.size()) + " usable)";
        for (const auto& n : notes) msg += "; " + n;
        throw DegenerateError(msg);
    }
    const bool all_sv = std::all_of(used.begin(), used.end(),
                                    [](const Measurement& m) { return m.kase == InteractionCase::PSV_SV; });
    RecoveryResult r = all_sv ? recover_AB(used, lambda, mu) : recover_AB_alt(used, lambda, mu);
    r.diag.notes.insert(r.diag.notes.end(), notes.begin(), notes.end());
    return r;
}

NoiseTrialSummary noise_trials(const std::vector<Measurement>& clean, const MaterialPoint& truth, double noise,
                               int trials, uint64_t seed) {
    const bool all_sv = std::all_of(clean.begin(), clean.end(),
                                    [](const Measurement& m) { return m.kase == InteractionCase::PSV_SV; });
    std::vector<double> ea(trials), eb(trials), va(trials), vb(trials);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < trials; ++k) {
        std::mt19937_64 rng(seed + static_cast<uint64_t>(k));
        std::normal_distribution<double> gauss(0.0, noise);
        std::vector<Measurement> ms = clean;
        for (auto& m : ms) {
            m.measured *= 1.0 + gauss(rng);
            m.noise_level = noise * std::abs(m.measured);
        }
        const RecoveryResult r = all_sv ? recover_AB(ms, truth.lambda(), truth.mu())
                                        : recover_AB_alt(ms, truth.lambda(), truth.mu());
        va[k] = r.a;
        vb[k] = r.b;
        ea[k] = std::abs(r.a - truth.a_landau()) / std::abs(truth.a_landau());
        eb[k] = std::abs(r.b - truth.b_landau()) / std::abs(truth.b_landau());
    }
    NoiseTrialSummary s;
    s.trials = trials;
    for (int k = 0; k < trials; ++k) {
        s.mean_rel_err_a += ea[k] / trials;
        s.mean_rel_err_b += eb[k] / trials;
        s.mean_a += va[k] / trials;
        s.mean_b += vb[k] / trials;
        s.max_rel_err = std::max({s.max_rel_err, ea[k], eb[k]});
    }
    return s;
}

}  // namespace fivec
