#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fivec/medium.hpp"
#include "fivec/resonance.hpp"
#include "fivec/types.hpp"

namespace fivec {

/// sigma(du_m/dx_n) = i * polarization_m * xi_n
struct RankOneSymbol {
    CVec3 polarization = CVec3::Zero();
    Vec3 xi = Vec3::Zero();
};

/// Quadratic form G(W1, W2) of the five-constant stress, evaluated on gradient matrices.
CMat3 quadratic_form(const Moduli& m, const CMat3& w1, const CMat3& w2);

/// Principal symbol of the symmetrized quadratic form: -(G(W1,W2) + G(W2,W1)), W = pol xi^T.
CMat3 g_form(const MaterialPoint& p, const RankOneSymbol& s1, const RankOneSymbol& s2);

/// Trace of the symmetric part of W = pol xi^T (zero for S-mode symbols).
cplx strain_trace(const RankOneSymbol& s);

enum class OutputMode { P, SH, SV };
std::string to_string(OutputMode m);
OutputMode output_mode_from_string(const std::string& s);

/// i g xi_out decomposed along {e_out (P), v x e_out (SH), v (SV)} of the interaction plane.
struct SymbolVector {
    CVec3 full = CVec3::Zero();   // unprojected i g xi_out
    CVec3 value = CVec3::Zero();  // projection onto the requested mode
    Covector at;
    OutputMode mode = OutputMode::P;
    cplx amp_p{0.0}, amp_h{0.0}, amp_v{0.0};
    Vec3 e_p = Vec3::Zero(), e_h = Vec3::Zero(), e_v = Vec3::Zero();

    cplx amplitude() const;
    CVec3 recombined() const;
};

/// Pure algebra: symbol of div G at xi_out = s1.xi + s2.xi (resonance not checked).
SymbolVector symbol_at(const MaterialPoint& p, const RankOneSymbol& s1, const RankOneSymbol& s2, OutputMode mode);

/// Symbol at a resonant output covector out = zeta1 + zeta2 of cfg.
SymbolVector interaction_symbol(const MaterialPoint& p, const InteractionConfig& cfg, const Covector& out,
                                OutputMode mode);

/// Rows of the interaction table.
enum class InteractionCase { PP_SH, PSH_P, PSH_SH, PSV_SV, SHSH_P, SHSV, SVSV_P };
std::string to_string(InteractionCase c);
InteractionCase case_from_string(const std::string& s);
const std::vector<InteractionCase>& all_cases();

struct CaseInfo {
    Mode in1, in2;
    OutputMode out;
    bool needs_interaction_condition;
};
CaseInfo case_info(InteractionCase c);

struct Magnitudes {
    double xi1 = 1.0, xi2 = 1.0, out = 1.0;
};

/// Closed-form amplitude along the case's output direction.
/// amp1/amp2: a (P) or b_H / b_V (S) of the first/second input, P first for mixed rows.
cplx closed_form_amplitude(InteractionCase c, const MaterialPoint& p, const Magnitudes& mags, cplx amp1, cplx amp2,
                           double alpha, double psi);

/// Same closed form with magnitudes, amplitudes and angles read from cfg (inputs at the resonant scaling).
cplx closed_form_for(InteractionCase c, const MaterialPoint& p, const InteractionConfig& cfg);

/// Tensor-path amplitude for the same row, projected on the case's output direction.
cplx tensor_form_for(InteractionCase c, const MaterialPoint& p, const InteractionConfig& cfg);

/// closed form = case_phase * amp1 * amp2 * case_prefactor * angular_factor.
double case_prefactor(InteractionCase c, const Magnitudes& mags);

/// Real angular factor of a row; linear in (lambda, mu, A, B), never depends on C.
double angular_factor(InteractionCase c, const Moduli& m, double alpha, double psi);

/// Moduli combinations multiplying each angle factor of the row.
std::vector<double> case_coefficients(InteractionCase c, const Moduli& m);

enum class InteractionClass { vanishing, generically_nonvanishing, requires_interaction_condition };
std::string to_string(InteractionClass c);
InteractionClass classify_interaction(InteractionCase c, const MaterialPoint& p);

struct SweepRow {
    InteractionCase kase;
    double alpha, psi;
    cplx amplitude;       // tensor path
    double closed_form;   // closed form divided by its phase factor
    double tensor_form;   // tensor path divided by the same phase factor
    double rel_err;
};

/// Unit-magnitude configuration with angle(xi1, xi2) = alpha and angle(xi1 + xi2, xi2) = psi.
/// Requires 0 < psi < alpha < pi. Used for off-resonance algebraic sweeps.
InteractionConfig geometric_config(InteractionCase c, const MaterialPoint& p, double alpha, double psi,
                                   cplx amp1 = 1.0, cplx amp2 = 1.0);

/// Phase factor of a row's closed form (-i or +i).
cplx case_phase(InteractionCase c);

/// Natural magnitude of a row's amplitude: prefactor times the sum of |moduli|.
double amplitude_scale(InteractionCase c, const MaterialPoint& p, const Magnitudes& mags, cplx amp1, cplx amp2);

/// Magnitudes and case amplitudes read from a config.
Magnitudes magnitudes_of(const InteractionConfig& cfg);
std::pair<cplx, cplx> case_amplitudes(InteractionCase c, const InteractionConfig& cfg);

std::vector<SweepRow> symbol_sweep(InteractionCase c, const MaterialPoint& p, const std::vector<double>& alphas,
                                   const std::vector<double>& psis);
std::vector<SweepRow> symbol_sweep_serial(InteractionCase c, const MaterialPoint& p,
                                          const std::vector<double>& alphas, const std::vector<double>& psis);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace fivec
