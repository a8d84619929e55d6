#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fivec/inversion.hpp"
#include "fivec/medium.hpp"
#include "fivec/symbols.hpp"

namespace fivec {

/// Periodic N1 x N2 grid with square cells; node (i, j) sits at (i*dx, j*dx). Index = i*N2 + j.
struct GridSpec {
    int n1 = 256;
    int n2 = 256;
    double dx = 1.0;

    size_t cells() const { return static_cast<size_t>(n1) * static_cast<size_t>(n2); }
    size_t spectral_cells() const { return static_cast<size_t>(n1) * static_cast<size_t>(n2 / 2 + 1); }
    double length1() const { return n1 * dx; }
    double length2() const { return n2 * dx; }
    double area() const { return length1() * length2(); }
    double dk1() const;
    double dk2() const;
};

/// Three displacement components (u1, u2 in plane; u3 out of plane) on the grid; d/dx3 = 0.
using Field3 = std::array<std::vector<double>, 3>;
Field3 make_field(const GridSpec& g);
using ComplexField3 = std::array<std::vector<std::complex<double>>, 3>;

enum class Nonlinearity { full, linear_only };
enum class KernelBackend { openmp, serial };

/// Largest stable Courant number c_max*dt/dx for velocity Verlet with the 2/3-rule cutoff.
double verlet_cfl_limit();

struct SolverOptions {
    double cfl = 0.25;  // c_P,max * dt / dx
    Nonlinearity nonlinearity = Nonlinearity::full;
    KernelBackend backend = KernelBackend::openmp;
    double max_strain = 0.5;  // blow-up threshold on |grad u| for nonlinear runs; non-finite fields always abort
};

/// Pointwise stress kernel: gradient components F[m][n] = du_m/dx_n (n = 0, 1) in, S[m][n] out.
struct StressKernelIO {
    size_t count = 0;
    const double* grad[3][2] = {};
    double* stress[3][2] = {};
    // Either per-cell moduli arrays or a single constant record.
    const double* lambda = nullptr;
    const double* mu = nullptr;
    const double* a = nullptr;
    const double* b = nullptr;
    const double* c = nullptr;
    Moduli constant;
};

/// Returns max |grad u| over the cells, or +inf if a non-finite value was seen.
double stress_kernel_serial(const StressKernelIO& io, Nonlinearity nl);
double stress_kernel_openmp(const StressKernelIO& io, Nonlinearity nl);

/// Stress at a single point, S_mn for m = 0..2, n = 0..1 given F_mn = du_m/dx_n.
void point_stress(const double f[3][2], const Moduli& m, Nonlinearity nl, double s[3][2]);

/// Pseudospectral solver for u_tt = div S(x, grad u), rho = 1, on a periodic grid.
/// State is kept in Fourier space with 2/3-rule dealiasing; time stepping is velocity Verlet
/// (kick-drift-kick) with one stress evaluation per step.
class SpectralSolver {
public:
    SpectralSolver(const GridSpec& grid, const MediumField& medium, const SolverOptions& opt);
    ~SpectralSolver();
    SpectralSolver(const SpectralSolver&) = delete;
    SpectralSolver& operator=(const SpectralSolver&) = delete;

    const GridSpec& grid() const { return grid_; }
    double dt() const { return dt_; }
    double time() const { return time_; }
    long steps() const { return step_; }
    double c_max() const { return c_max_; }
    bool constant_medium() const { return constant_; }

    void set_state(const Field3& u, const Field3& v, double t0 = 0.0);

    /// One time step of the configured system. Throws BlowUpError on runaway or non-finite fields.
    void step_nonlinear();
    void advance_to(double t);

    Field3 displacement() const;
    Field3 velocity() const;

    /// Energy of the linearized system: 1/2 |v|^2 + 1/2 (lambda (div u)^2 + 2 mu e:e), summed over cells.
    double linear_energy() const;

    /// Acceleration div S(grad u) for a physical-space displacement (testing hook).
    Field3 acceleration(const Field3& u);

private:
    void compute_acceleration();

    GridSpec grid_;
    SolverOptions opt_;
    double dt_ = 0.0;
    double time_ = 0.0;
    long step_ = 0;
    double c_max_ = 0.0;
    bool constant_ = true;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class PacketMode { P, SH, SV };
std::string to_string(PacketMode m);
PacketMode packet_mode_from_string(const std::string& s);

/// Gaussian wave packet used as initial data, propagating forward along `direction`.
struct PacketSource {
    std::array<double, 2> center{0.0, 0.0};
    std::array<double, 2> direction{1.0, 0.0};
    double k0 = 0.5;
    double sigma_par = 20.0;   // envelope width along direction (amplitude e^{-s^2 / (2 sigma^2)})
    double sigma_perp = 20.0;  // envelope width across direction
    PacketMode mode = PacketMode::P;
    double amplitude = 1e-3;   // epsilon
    double phase = 0.0;
};

/// Unit polarization of a mode at in-plane wavevector q: P -> q/|q|, SH -> z x q/|q|, SV -> z.
Vec3 packet_polarization(PacketMode mode, double q1, double q2);

/// Throws ValidationError unless the packet is resolved (k0 dx < pi/4) and inside the domain.
void validate_packet(const PacketSource& p, const GridSpec& g);

/// Complex scalar envelope-times-carrier field with unit peak, on the periodic grid.
std::vector<std::complex<double>> packet_scalar(const PacketSource& p, const GridSpec& g);

/// Real initial displacement and velocity of a forward-propagating packet (modal projection in Fourier space).
void packet_initial_state(const PacketSource& p, const GridSpec& g, const Moduli& m, Field3& u, Field3& v,
                          double scale = 1.0);

/// Fourier amplitude per unit area of a field at wavevector k, projected on a unit polarization.
/// A complex plane wave a*e*exp(i k.x) returns a; a real field returns half its complex amplitude.
/// `window` (may be empty = whole domain) weights cells; normalization is by the full domain area.
std::complex<double> project_at(const Field3& f, const GridSpec& g, const std::array<double, 2>& k, const Vec3& pol,
                                const std::vector<double>& window = {});

std::complex<double> project_at(const ComplexField3& f, const GridSpec& g, const std::array<double, 2>& k,
                                const Vec3& pol, const std::vector<double>& window = {});

/// Mode projection with the polarization taken from the wavevector: P, SH (z x k) or SV (z).
std::complex<double> measure_mode_amplitude(const Field3& f, const GridSpec& g, const std::array<double, 2>& k,
                                            PacketMode mode, const std::vector<double>& window = {});
std::complex<double> measure_mode_amplitude(const ComplexField3& f, const GridSpec& g, const std::array<double, 2>& k,
                                            PacketMode mode, const std::vector<double>& window = {});

/// Smooth circular window (1 inside radius, cosine taper of width `taper`) with periodic distance.
std::vector<double> disk_window(const GridSpec& g, const std::array<double, 2>& center, double radius,
                                double taper = 0.0);

/// Snapshot of a run.
struct WavefieldRecord {
    GridSpec grid;
    std::vector<double> times;
    std::vector<Field3> snapshots;
    double eps1 = 0.0;
    double eps2 = 0.0;
    nlohmann::json meta;  // sources, medium, nonlinearity

    void write(const std::filesystem::path& stem) const;  // stem.bin + stem.json
    static WavefieldRecord read(const std::filesystem::path& stem);
};

/// (run12 - run1 - run2) / (eps1 eps2) at every recorded time.
WavefieldRecord extract_bilinear_response(const WavefieldRecord& run12, const WavefieldRecord& run1,
                                          const WavefieldRecord& run2);

/// Peak of sum_m |FFT(u_m)|^2 over the lattice, excluding q = 0. Returns the wavevector (k1 >= 0 half).
std::array<double, 2> spectral_peak(const Field3& f, const GridSpec& g);

/// Runs one simulation from packets and records snapshots at the given times.
WavefieldRecord run_packets(const GridSpec& g, const MediumField& m, const SolverOptions& opt,
                            const std::vector<PacketSource>& packets, const std::vector<double>& record_times,
                            double eps1, double eps2);

struct ExperimentConfig {
    GridSpec grid{512, 512, 1.0};
    SolverOptions solver;
    Moduli medium{1.0, 1.0, 0.0, 0.0, 0.0};
    InteractionCase kase = InteractionCase::PP_SH;
    double k1 = 0.75;                 // |k| of the first packet
    double direction1_deg = -30.0;    // direction of the first packet
    double angle_deg = 60.0;          // angle between the two propagation directions
    double sigma = 25.0;              // envelope width of both packets
    double eps1 = 1e-3;
    double eps2 = 1e-3;
    std::array<double, 2> target{-1.0, -1.0};  // interaction point; negative = domain centre
    double separation_sigmas = 6.0;   // initial centre separation in envelope widths
    double measure_factor = 2.0;      // measurement at measure_factor * overlap time
    std::vector<double> eps1_ladder;  // optional scaling diagnostics
    double model_error = 0.01;        // relative model floor added to the measurement noise level
    bool write_snapshots = false;
    std::string label;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& c);

/// Geometry derived from a config: aimed packets, output wavevector and mode, times.
struct ExperimentPlan {
    PacketSource packet1, packet2;
    double root_b = 0.0;  // resonance root relative to packet 2's unit forward covector
    bool difference = true;  // output = k1 - k2 (true) or k1 + k2
    std::array<double, 2> k_out{0.0, 0.0};      // exact resonant output wavevector
    std::array<double, 2> k_measure{0.0, 0.0};  // nearest lattice wavevector, where amplitudes are read
    double omega_out = 0.0;                     // c_out |k_measure|
    PacketMode out_mode = PacketMode::SH;
    double t_overlap = 0.0;
    double t_measure = 0.0;
    double t_probe = 0.0;  // second time for the temporal-frequency check
    double dt = 0.0;
    InteractionConfig symbol_cfg;  // unit-polarization inputs at the resonant scaling
    Vec3 out_pol = Vec3::Zero();   // unit polarization the amplitude is projected on
    double steps_estimate = 0.0;
};

ExperimentPlan plan_experiment(const ExperimentConfig& c);
nlohmann::json plan_to_json(const ExperimentPlan& p);

/// Born overlap of the linear packets at the lattice wavevector plan.k_measure:
/// I = int_0^t_end dt e^{i w t} (1/Area) sum_x U1 U2' e^{-i k.x} dA, with U2' = conj(U2) for difference
/// interactions. Packets and output evolve with the velocity-Verlet discrete dispersion for step dt,
/// so the time integral is exact per Fourier mode.
std::complex<double> born_overlap(const ExperimentPlan& plan, const GridSpec& g, const Moduli& m, double dt,
                                  double t_end);

struct ExperimentReport {
    ExperimentConfig config;
    ExperimentPlan plan;
    std::complex<double> symbol_closed{0.0};  // closed-form amplitude along out_pol
    std::complex<double> symbol_tensor{0.0};  // tensor-path amplitude
    std::complex<double> overlap{0.0};
    std::complex<double> geometry{0.0};       // predicted amplitude per unit symbol amplitude
    std::complex<double> predicted{0.0};      // geometry * symbol_closed
    std::complex<double> measured{0.0};       // measured output-mode amplitude of u12 at k_out
    std::complex<double> measured_other{0.0}; // the orthogonal mode at k_out (P for S outputs, S for P)
    double noise_floor = 0.0;                 // background of u12 around k_out
    double snr_db = 0.0;
    double mode_purity_db = 0.0;              // 20 log10 |measured| / |measured_other|
    double omega_measured = 0.0;
    double dispersion_rel_err = 0.0;
    std::array<double, 2> peak{0.0, 0.0};
    double peak_offset = 0.0;                 // |peak - (+/-)k_out| in grid wavenumbers
    struct LadderPoint {
        double eps1;
        std::complex<double> raw;             // eps1 eps2 * measured
    };
    std::vector<LadderPoint> ladder;
    double runtime_s = 0.0;
    long steps = 0;

    double noise_level = 0.0;                 // uncertainty of the inferred symbol amplitude
    std::optional<WavefieldRecord> u12;       // kept when config.write_snapshots is set

    /// Symbol amplitude along the measured polarization: measured / geometry.
    std::complex<double> inferred_symbol() const;
    Measurement to_measurement() const;
    nlohmann::json to_json() const;
};

ExperimentReport run_interaction_experiment(const ExperimentConfig& c, const MediumField* medium_override = nullptr);

/// Reads a report JSON back into an inversion outcome.
ExperimentOutcome outcome_from_report_json(const nlohmann::json& j);

}  // namespace fivec
