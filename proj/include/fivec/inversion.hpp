#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fivec/medium.hpp"
#include "fivec/symbols.hpp"

namespace fivec {

struct TravelTime {
    Vec3 start = Vec3::Zero();
    Vec3 end = Vec3::Zero();
    Mode mode = Mode::P;
    double time = 0.0;
};

struct LameResult {
    double lambda = 0.0;
    double mu = 0.0;
    double c_p = 0.0;
    double c_s = 0.0;
    double rms_residual_p = 0.0;  // time residual of the straight-ray fit
    double rms_residual_s = 0.0;
};

/// Straight-ray speed fit for a homogeneous medium: slowness = sum(L t) / sum(L^2) per mode.
LameResult recover_lame(const std::vector<TravelTime>& times);

/// One measured generated-mode amplitude.
struct Measurement {
    InteractionCase kase = InteractionCase::PSV_SV;
    double alpha = 0.0;
    double psi = 0.0;
    Magnitudes mags;
    cplx amp1{1.0};
    cplx amp2{1.0};
    cplx measured{0.0};
    double noise_level = 0.0;  // absolute noise floor of `measured`; 0 if unknown
    std::string label;
};

/// Forward model: the closed-form amplitude for the given parameters.
Measurement synthesize_measurement(InteractionCase c, const MaterialPoint& p, double alpha, double psi,
                                   const Magnitudes& mags = {}, cplx amp1 = 1.0, cplx amp2 = 1.0);

/// det(v(psi1), v(psi2)) with v(psi) = [cos^2 psi, sin^2 psi].
double det_v(double psi1, double psi2);

struct PairSolution {
    double s_a = 0.0;  // lambda + 2mu + B + A/2
    double s_b = 0.0;  // mu + B + A/2
    double determinant = 0.0;
};

/// Solves the P+SH->SH cos^2/sin^2 system from two measurements.
PairSolution solve_psh_sh_pair(const Measurement& m1, const Measurement& m2);

struct RecoveryDiagnostics {
    std::string system;
    int measurements_used = 0;
    double determinant = 0.0;  // 2x2 angle-system determinant (Gram root for > 2 rows)
    double condition = 0.0;
    bool ridge_used = false;
    double ridge = 0.0;
    double residual_norm = 0.0;
    double imag_residual = 0.0;  // quadrature component left after removing the expected phase
    std::vector<double> residuals;
    std::vector<std::string> notes;
    bool has_pair = false;
    PairSolution pair;
};

struct RecoveryResult {
    double lambda = 0.0;
    double mu = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma_a = 0.0;
    double sigma_b = 0.0;
    double a_plus_2b = 0.0;
    RecoveryDiagnostics diag;
};

/// (A, B) from P+SV->SV measurements via the (lambda + B, 2mu + A/2) angle system.
RecoveryResult recover_AB(const std::vector<Measurement>& ms, double lambda, double mu);

/// (A, B) by least squares over any mix of table rows. Throws IdentifiabilityError when all rows
/// are in-plane (they determine only A + 2B) and DegenerateError for rank-deficient angle sets.
RecoveryResult recover_AB_alt(const std::vector<Measurement>& ms, double lambda, double mu);

struct CSensitivity {
    InteractionCase kase;
    double max_change = 0.0;       // max |h(C + dC) - h(C)|
    // max |h(C + dC) - h(C)| / (|dC| |a1 a2| prefactor): the dimensionless |dh/dC| (h is affine in C)
    double max_sensitivity = 0.0;
    int evaluations = 0;
};

struct CReport {
    std::vector<CSensitivity> per_case;
    double max_change = 0.0;
    double max_sensitivity = 0.0;
};

/// Evaluates every table row on resonant configurations under C -> C + dC (dC = 0 entries are skipped).
CReport c_identifiability_report(const MaterialPoint& p, const std::vector<double>& perturbations,
                                 int configs_per_case = 32, uint64_t seed = 7);

/// Resonant configurations of a row for incoming directions d1, d2 (unit |xi1|), one per root.
/// Empty when the row's resonance does not exist for these directions.
std::vector<InteractionConfig> resonant_configs(InteractionCase c, const MaterialPoint& p, const Vec3& d1,
                                                const Vec3& d2, cplx amp1 = 1.0, cplx amp2 = 1.0);

struct ExperimentOutcome {
    Measurement m;
    std::string label;
};

/// Recovery from simulator-measured amplitudes. Measurements whose magnitude is below three times
/// their noise floor are dropped and reported as non-informative.
RecoveryResult end_to_end_recovery(const std::vector<ExperimentOutcome>& outcomes, double lambda, double mu);

struct NoiseTrialSummary {
    double mean_rel_err_a = 0.0;
    double mean_rel_err_b = 0.0;
    double max_rel_err = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    int trials = 0;
};

/// Monte-Carlo: multiplicative Gaussian noise on synthetic measurements, recovered with recover_AB
/// (P+SV->SV sets) or recover_AB_alt. Each noisy row carries noise_level = noise * |measured|, so the
/// fits are weighted. Trials run in parallel; trial k uses seed + k.
NoiseTrialSummary noise_trials(const std::vector<Measurement>& clean, const MaterialPoint& truth, double noise,
                               int trials, uint64_t seed);

}  // namespace fivec
