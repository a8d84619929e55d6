#include "fivec/symbols.hpp"

#include <cmath>
#include <ostream>

#include "fivec/errors.hpp"
#include "fivec/format.hpp"

namespace fivec {

namespace {

const cplx I(0.0, 1.0);

cplx trace(const CMat3& m) { return m.trace(); }
cplx frob(const CMat3& a, const CMat3& b) { return a.cwiseProduct(b).sum(); }
cplx tdot(const CVec3& a, const Vec3& b) { return (a.transpose() * b.cast<cplx>())(0); }

}  // namespace

CMat3 quadratic_form(const Moduli& m, const CMat3& w1, const CMat3& w2) {
    const CMat3 u1 = 0.5 * (w1 + w1.transpose());
    const CMat3 u2 = 0.5 * (w2 + w2.transpose());
    const CMat3 id = CMat3::Identity();
    const cplx tr1 = trace(u1), tr2 = trace(u2);
    CMat3 g = m.lambda * tr1 * w2;
    g += 0.5 * m.lambda * frob(w1, w2) * id;
    g += 2.0 * m.mu * w2 * u1.transpose();
    g += m.mu * w1.transpose() * w2;
    g += m.a * u1 * u2.transpose();
    g += m.b * (2.0 * tr1 * u2 + frob(u1, u2) * id);
    g += m.c * tr1 * tr2 * id;
    return g;
}

CMat3 g_form(const MaterialPoint& p, const RankOneSymbol& s1, const RankOneSymbol& s2) {
    const CMat3 w1 = s1.polarization * s1.xi.cast<cplx>().transpose();
    const CMat3 w2 = s2.polarization * s2.xi.cast<cplx>().transpose();
    return -(quadratic_form(p.moduli(), w1, w2) + quadratic_form(p.moduli(), w2, w1));
}

cplx strain_trace(const RankOneSymbol& s) { return tdot(s.polarization, s.xi); }

std::string to_string(OutputMode m) {
    switch (m) {
        case OutputMode::P: return "P";
        case OutputMode::SH: return "SH";
        case OutputMode::SV: return "SV";
    }
    return "?";
}

OutputMode output_mode_from_string(const std::string& s) {
    if (s == "P") return OutputMode::P;
    if (s == "SH") return OutputMode::SH;
    if (s == "SV") return OutputMode::SV;
    throw ValidationError("unknown output mode '" + s + "' (expected P, SH or SV)");
}

cplx SymbolVector::amplitude() const {
    switch (mode) {
        case OutputMode::P: return amp_p;
        case OutputMode::SH: return amp_h;
        case OutputMode::SV: return amp_v;
    }
    return 0.0;
}

CVec3 SymbolVector::recombined() const {
    return amp_p * e_p.cast<cplx>() + amp_h * e_h.cast<cplx>() + amp_v * e_v.cast<cplx>();
}

SymbolVector symbol_at(const MaterialPoint& p, const RankOneSymbol& s1, const RankOneSymbol& s2, OutputMode mode) {
    const Vec3 xi_out = s1.xi + s2.xi;
    const Frame f = build_frame(s1.xi, s2.xi, xi_out);
    SymbolVector sv;
    sv.mode = mode;
    sv.at.xi = xi_out;
    sv.full = I * (g_form(p, s1, s2) * xi_out.cast<cplx>());
    sv.e_p = f.e_out;
    sv.e_h = f.h_out;
    sv.e_v = f.v;
    sv.amp_p = tdot(sv.full, sv.e_p);
    sv.amp_h = tdot(sv.full, sv.e_h);
    sv.amp_v = tdot(sv.full, sv.e_v);
    const Vec3& dir = mode == OutputMode::P ? sv.e_p : mode == OutputMode::SH ? sv.e_h : sv.e_v;
    sv.value = sv.amplitude() * dir.cast<cplx>();
    return sv;
}

SymbolVector interaction_symbol(const MaterialPoint& p, const InteractionConfig& cfg, const Covector& out,
                                OutputMode mode) {
    const Vec3 xi_sum = cfg.zeta1.xi + cfg.zeta2.xi;
    const double tau_sum = cfg.zeta1.tau + cfg.zeta2.tau;
    const double scale = std::abs(cfg.zeta1.tau) + std::abs(cfg.zeta2.tau) + cfg.zeta1.xi.norm() + cfg.zeta2.xi.norm();
    if ((out.xi - xi_sum).norm() + std::abs(out.tau - tau_sum) > 1e-9 * scale) {
        throw ValidationError("output covector is not zeta1 + zeta2 of the configuration");
    }
    Covector probe = out;
    probe.mode = mode == OutputMode::P ? Mode::P : Mode::S;
    if (relative_residual(probe, p.moduli()) > 1e-8) {
        throw ValidationError("non-resonant output covector for mode " + to_string(mode));
    }
    SymbolVector sv = symbol_at(p, {cfg.pol1, cfg.zeta1.xi}, {cfg.pol2, cfg.zeta2.xi}, mode);
    sv.at = probe;
    return sv;
}

std::string to_string(InteractionCase c) {
    switch (c) {
        case InteractionCase::PP_SH: return "P+P->SH";
        case InteractionCase::PSH_P: return "P+SH->P";
        case InteractionCase::PSH_SH: return "P+SH->SH";
        case InteractionCase::PSV_SV: return "P+SV->SV";
        case InteractionCase::SHSH_P: return "SH+SH->P";
        case InteractionCase::SHSV: return "SH+SV->none";
        case InteractionCase::SVSV_P: return "SV+SV->P";
    }
    return "?";
}

const std::vector<InteractionCase>& all_cases() {
    static const std::vector<InteractionCase> cases = {
        InteractionCase::PP_SH,  InteractionCase::PSH_P, InteractionCase::PSH_SH, InteractionCase::PSV_SV,
        InteractionCase::SHSH_P, InteractionCase::SHSV,  InteractionCase::SVSV_P};
    return cases;
}

InteractionCase case_from_string(const std::string& s) {
    std::string k;
    for (char ch : s) {
        if (ch != '+' && ch != '-' && ch != '>' && ch != '_' && ch != ' ') k += static_cast<char>(std::toupper(ch));
    }
    if (k == "PPSH" || k == "PPS") return InteractionCase::PP_SH;
    if (k == "PSHP") return InteractionCase::PSH_P;
    if (k == "PSHSH") return InteractionCase::PSH_SH;
    if (k == "PSVSV") return InteractionCase::PSV_SV;
    if (k == "SHSHP") return InteractionCase::SHSH_P;
    if (k == "SHSV" || k == "SHSVNONE" || k == "SHSV0") return InteractionCase::SHSV;
    if (k == "SVSVP") return InteractionCase::SVSV_P;
    throw ValidationError("unknown interaction case '" + s + "'");
}

CaseInfo case_info(InteractionCase c) {
    switch (c) {
        case InteractionCase::PP_SH: return {Mode::P, Mode::P, OutputMode::SH, false};
        case InteractionCase::PSH_P: return {Mode::P, Mode::S, OutputMode::P, false};
        case InteractionCase::PSH_SH: return {Mode::P, Mode::S, OutputMode::SH, false};
        case InteractionCase::PSV_SV: return {Mode::P, Mode::S, OutputMode::SV, false};
        case InteractionCase::SHSH_P: return {Mode::S, Mode::S, OutputMode::P, true};
        case InteractionCase::SHSV: return {Mode::S, Mode::S, OutputMode::P, true};
        case InteractionCase::SVSV_P: return {Mode::S, Mode::S, OutputMode::P, true};
    }
    throw ValidationError("unknown interaction case");
}

cplx case_phase(InteractionCase c) { return c == InteractionCase::PSH_P ? I : -I; }

double case_prefactor(InteractionCase c, const Magnitudes& g) {
    switch (c) {
        case InteractionCase::PP_SH: return g.xi1 * g.xi1 * g.xi2 * g.xi2 * g.out;
        case InteractionCase::PSH_P:
        case InteractionCase::PSH_SH:
        case InteractionCase::PSV_SV: return g.xi1 * g.xi1 * g.xi2 * g.out;
        default: return g.xi1 * g.xi2 * g.out;
    }
}

std::vector<double> case_coefficients(InteractionCase c, const Moduli& m) {
    const double l = m.lambda, mu = m.mu, A = m.a, B = m.b;
    switch (c) {
        case InteractionCase::PP_SH:
        case InteractionCase::PSH_P: return {l + 3.0 * mu + A + 2.0 * B};
        case InteractionCase::PSH_SH:
        case InteractionCase::SHSH_P: return {l + 2.0 * mu + B + 0.5 * A, mu + B + 0.5 * A};
        case InteractionCase::PSV_SV:
        case InteractionCase::SVSV_P: return {l + B, 2.0 * mu + 0.5 * A};
        case InteractionCase::SHSV: return {};
    }
    return {};
}

double angular_factor(InteractionCase c, const Moduli& m, double alpha, double psi) {
    const auto k = case_coefficients(c, m);
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cp = std::cos(psi), sp = std::sin(psi);
    switch (c) {
        case InteractionCase::PP_SH: return k[0] * ca * std::sin(2.0 * psi - alpha);
        case InteractionCase::PSH_P: return k[0] * std::cos(alpha - psi) * std::sin(alpha + psi);
        case InteractionCase::PSH_SH: return k[0] * cp * cp - k[1] * sp * sp;
        case InteractionCase::PSV_SV: return k[0] * cp + k[1] * ca * std::cos(alpha - psi);
        case InteractionCase::SHSH_P: return k[0] * ca * ca - k[1] * sa * sa;
        case InteractionCase::SHSV: return 0.0;
        case InteractionCase::SVSV_P: return k[0] * ca + k[1] * cp * std::cos(alpha - psi);
    }
    return 0.0;
}

cplx closed_form_amplitude(InteractionCase c, const MaterialPoint& p, const Magnitudes& mags, cplx amp1, cplx amp2,
                           double alpha, double psi) {
    return case_phase(c) * amp1 * amp2 * case_prefactor(c, mags) * angular_factor(c, p.moduli(), alpha, psi);
}

double amplitude_scale(InteractionCase c, const MaterialPoint& p, const Magnitudes& mags, cplx amp1, cplx amp2) {
    const Moduli& m = p.moduli();
    const double moduli = std::abs(m.lambda) + std::abs(m.mu) + std::abs(m.a) + std::abs(m.b);
    return std::abs(amp1) * std::abs(amp2) * case_prefactor(c, mags) * moduli;
}

Magnitudes magnitudes_of(const InteractionConfig& cfg) {
    return {cfg.zeta1.xi.norm(), cfg.zeta2.xi.norm(), (cfg.zeta1.xi + cfg.zeta2.xi).norm()};
}

std::pair<cplx, cplx> case_amplitudes(InteractionCase c, const InteractionConfig& cfg) {
    const ModeAmplitudes a1 = cfg.amplitudes1(), a2 = cfg.amplitudes2();
    switch (c) {
        case InteractionCase::PP_SH: return {a1.a, a2.a};
        case InteractionCase::PSH_P:
        case InteractionCase::PSH_SH: return {a1.a, a2.b_h};
        case InteractionCase::PSV_SV: return {a1.a, a2.b_v};
        case InteractionCase::SHSH_P: return {a1.b_h, a2.b_h};
        case InteractionCase::SHSV: return {a1.b_h, a2.b_v};
        case InteractionCase::SVSV_P: return {a1.b_v, a2.b_v};
    }
    return {0.0, 0.0};
}

cplx closed_form_for(InteractionCase c, const MaterialPoint& p, const InteractionConfig& cfg) {
    const Frame f = build_frame(cfg.zeta1.xi, cfg.zeta2.xi, cfg.zeta1.xi + cfg.zeta2.xi);
    const auto [a1, a2] = case_amplitudes(c, cfg);
    return closed_form_amplitude(c, p, magnitudes_of(cfg), a1, a2, f.alpha, f.psi);
}

cplx tensor_form_for(InteractionCase c, const MaterialPoint& p, const InteractionConfig& cfg) {
    return symbol_at(p, {cfg.pol1, cfg.zeta1.xi}, {cfg.pol2, cfg.zeta2.xi}, case_info(c).out).amplitude();
}

std::string to_string(InteractionClass c) {
    switch (c) {
        case InteractionClass::vanishing: return "vanishing";
        case InteractionClass::generically_nonvanishing: return "generically-nonvanishing";
        case InteractionClass::requires_interaction_condition: return "requires-interaction-condition";
    }
    return "?";
}

InteractionClass classify_interaction(InteractionCase c, const MaterialPoint& p) {
    if (c == InteractionCase::SHSV) return InteractionClass::vanishing;
    const Moduli& m = p.moduli();
    const double scale = std::abs(m.lambda) + std::abs(m.mu) + std::abs(m.a) + std::abs(m.b);
    bool any = false;
    for (double k : case_coefficients(c, m)) any = any || std::abs(k) > 1e-12 * scale;
    if (!any) return InteractionClass::vanishing;
    return case_info(c).needs_interaction_condition ? InteractionClass::requires_interaction_condition
                                                    : InteractionClass::generically_nonvanishing;
}

InteractionConfig geometric_config(InteractionCase c, const MaterialPoint& p, double alpha, double psi, cplx amp1,
                                   cplx amp2) {
    if (!(0.0 < psi && psi < alpha && alpha < M_PI)) {
        throw ValidationError("geometric configuration needs 0 < psi < alpha < pi");
    }
    const CaseInfo info = case_info(c);
    const Vec3 xi2(std::sin(alpha - psi) / std::sin(psi), 0.0, 0.0);
    const Vec3 xi1(std::cos(alpha), std::sin(alpha), 0.0);
    const Covector z1 = forward_covector(Vec3::Zero(), xi1, info.in1, p);
    const Covector z2 = forward_covector(Vec3::Zero(), xi2, info.in2, p);
    auto amps = [&](Mode mode, bool vertical, cplx a) {
        ModeAmplitudes m;
        if (mode == Mode::P) m.a = a;
        else if (vertical) m.b_v = a;
        else m.b_h = a;
        return m;
    };
    const bool v1 = c == InteractionCase::SVSV_P;
    const bool v2 = c == InteractionCase::PSV_SV || c == InteractionCase::SVSV_P || c == InteractionCase::SHSV;
    return InteractionConfig::from_amplitudes(z1, z2, amps(info.in1, v1, amp1), amps(info.in2, v2, amp2));
}

namespace {

SweepRow sweep_point(InteractionCase c, const MaterialPoint& p, double alpha, double psi) {
    const InteractionConfig cfg = geometric_config(c, p, alpha, psi);
    const cplx cf = closed_form_for(c, p, cfg);
    const cplx tf = tensor_form_for(c, p, cfg);
    const auto [a1, a2] = case_amplitudes(c, cfg);
    const double ref = std::max({std::abs(cf), std::abs(tf), amplitude_scale(c, p, magnitudes_of(cfg), a1, a2)});
    const cplx ph = case_phase(c);
    return {c, alpha, psi, tf, (cf / ph).real(), (tf / ph).real(), ref > 0.0 ? std::abs(cf - tf) / ref : 0.0};
}

std::vector<std::pair<double, double>> sweep_grid(const std::vector<double>& alphas, const std::vector<double>& psis) {
    std::vector<std::pair<double, double>> pts;
    for (double a : alphas) {
        for (double s : psis) {
            if (0.0 < s && s < a && a < M_PI) pts.emplace_back(a, s);
        }
    }
    return pts;
}

}  // namespace

std::vector<SweepRow> symbol_sweep_serial(InteractionCase c, const MaterialPoint& p,
                                          const std::vector<double>& alphas, const std::vector<double>& psis) {
    const auto pts = sweep_grid(alphas, psis);
    std::vector<SweepRow> rows;
    rows.reserve(pts.size());
    for (const auto& [a, s] : pts) rows.push_back(sweep_point(c, p, a, s));
    return rows;
}

std::vector<SweepRow> symbol_sweep(InteractionCase c, const MaterialPoint& p, const std::vector<double>& alphas,
                                   const std::vector<double>& psis) {
    const auto pts = sweep_grid(alphas, psis);
    std::vector<SweepRow> rows(pts.size());
    const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) rows[i] = sweep_point(c, p, pts[i].first, pts[i].second);
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "case,alpha,psi,amplitude_re,amplitude_im,closed_form,tensor_form,rel_err\n";
    for (const auto& r : rows) {
        os << to_string(r.kase) << ',' << fmt_num(r.alpha) << ',' << fmt_num(r.psi) << ','
           << fmt_num(r.amplitude.real()) << ',' << fmt_num(r.amplitude.imag()) << ',' << fmt_num(r.closed_form)
           << ',' << fmt_num(r.tensor_form) << ',' << fmt_num(r.rel_err) << '\n';
    }
}

}  // namespace fivec
