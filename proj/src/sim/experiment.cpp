#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "fftw_util.hpp"
#include "fivec/errors.hpp"
#include "fivec/kinematics.hpp"
#include "fivec/medium_io.hpp"
#include "fivec/simulator.hpp"

namespace fivec {

using nlohmann::json;
using cd = std::complex<double>;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

json cjson(cd z) { return json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

cd cfrom(const json& j) {
    if (j.is_number()) return cd(j.get<double>(), 0.0);
    return cd(j.at("re").get<double>(), j.value("im", 0.0));
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

std::pair<PacketMode, PacketMode> input_modes(InteractionCase c) {
    switch (c) {
        case InteractionCase::PP_SH: return {PacketMode::P, PacketMode::P};
        case InteractionCase::PSH_P:
        case InteractionCase::PSH_SH: return {PacketMode::P, PacketMode::SH};
        case InteractionCase::PSV_SV: return {PacketMode::P, PacketMode::SV};
        case InteractionCase::SHSH_P: return {PacketMode::SH, PacketMode::SH};
        case InteractionCase::SVSV_P: return {PacketMode::SV, PacketMode::SV};
        case InteractionCase::SHSV: break;
    }
    throw ValidationError("SH+SV has no resonant output; nothing to simulate");
}

PacketMode packet_mode_of(OutputMode m) {
    switch (m) {
        case OutputMode::P: return PacketMode::P;
        case OutputMode::SH: return PacketMode::SH;
        case OutputMode::SV: return PacketMode::SV;
    }
    return PacketMode::P;
}

Mode kinematic_mode(PacketMode m) { return m == PacketMode::P ? Mode::P : Mode::S; }

double mode_speed(const Moduli& m, PacketMode mode) { return std::sqrt(speed_squared(m, kinematic_mode(mode))); }

double discrete_omega(double c, double q, double dt) {
    const double x = 0.5 * c * q * dt;
    return 2.0 / dt * std::asin(std::min(1.0, x));
}

Vec3 frame_direction(const Frame& f, OutputMode m) {
    switch (m) {
        case OutputMode::P: return f.e_out;
        case OutputMode::SH: return f.h_out;
        case OutputMode::SV: return f.v;
    }
    return f.e_out;
}

json packet_json(const PacketSource& p) {
    return json{{"center", p.center},       {"direction", p.direction}, {"k0", p.k0},
                {"sigma_par", p.sigma_par}, {"sigma_perp", p.sigma_perp}, {"mode", to_string(p.mode)},
                {"amplitude", p.amplitude}, {"phase", p.phase}};
}

std::string nonlinearity_name(Nonlinearity n) { return n == Nonlinearity::full ? "full" : "linear-only"; }

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
    try {
        reject_unknown(j,
                       {"grid", "solver", "medium", "case", "k1", "direction1_deg", "angle_deg", "sigma", "eps1",
                        "eps2", "target", "separation_sigmas", "measure_factor", "eps1_ladder", "write_snapshots",
                        "label", "model_error"},
                       "experiment config");
        ExperimentConfig c;
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            reject_unknown(g, {"n1", "n2", "dx"}, "grid");
            c.grid.n1 = g.value("n1", c.grid.n1);
            c.grid.n2 = g.value("n2", c.grid.n2);
            c.grid.dx = g.value("dx", c.grid.dx);
        }
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            reject_unknown(s, {"cfl", "nonlinearity", "backend", "max_strain"}, "solver");
            c.solver.cfl = s.value("cfl", c.solver.cfl);
            c.solver.max_strain = s.value("max_strain", c.solver.max_strain);
            const std::string nl = s.value("nonlinearity", std::string("full"));
            if (nl == "full")
                c.solver.nonlinearity = Nonlinearity::full;
            else if (nl == "linear-only" || nl == "linear")
                c.solver.nonlinearity = Nonlinearity::linear_only;
            else
                throw ValidationError("unknown nonlinearity '" + nl + "' (expected full or linear-only)");
            const std::string be = s.value("backend", std::string("openmp"));
            if (be == "openmp")
                c.solver.backend = KernelBackend::openmp;
            else if (be == "serial")
                c.solver.backend = KernelBackend::serial;
            else
                throw ValidationError("unknown backend '" + be + "' (expected openmp or serial)");
        }
        if (j.contains("medium")) c.medium = moduli_from_json(j.at("medium"));
        if (j.contains("case")) c.kase = case_from_string(j.at("case").get<std::string>());
        c.k1 = j.value("k1", c.k1);
        c.direction1_deg = j.value("direction1_deg", c.direction1_deg);
        c.angle_deg = j.value("angle_deg", c.angle_deg);
        c.sigma = j.value("sigma", c.sigma);
        c.eps1 = j.value("eps1", c.eps1);
        c.eps2 = j.value("eps2", c.eps2);
        if (j.contains("target")) c.target = j.at("target").get<std::array<double, 2>>();
        c.separation_sigmas = j.value("separation_sigmas", c.separation_sigmas);
        c.measure_factor = j.value("measure_factor", c.measure_factor);
        if (j.contains("eps1_ladder")) c.eps1_ladder = j.at("eps1_ladder").get<std::vector<double>>();
        c.write_snapshots = j.value("write_snapshots", c.write_snapshots);
        c.model_error = j.value("model_error", c.model_error);
        c.label = j.value("label", c.label);
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
}

json experiment_to_json(const ExperimentConfig& c) {
    return json{{"grid", {{"n1", c.grid.n1}, {"n2", c.grid.n2}, {"dx", c.grid.dx}}},
                {"solver",
                 {{"cfl", c.solver.cfl},
                  {"nonlinearity", nonlinearity_name(c.solver.nonlinearity)},
                  {"backend", c.solver.backend == KernelBackend::openmp ? "openmp" : "serial"},
                  {"max_strain", c.solver.max_strain}}},
                {"medium", moduli_to_json(c.medium)},
                {"case", to_string(c.kase)},
                {"k1", c.k1},
                {"direction1_deg", c.direction1_deg},
                {"angle_deg", c.angle_deg},
                {"sigma", c.sigma},
                {"eps1", c.eps1},
                {"eps2", c.eps2},
                {"target", c.target},
                {"separation_sigmas", c.separation_sigmas},
                {"measure_factor", c.measure_factor},
                {"eps1_ladder", c.eps1_ladder},
                {"write_snapshots", c.write_snapshots},
                {"model_error", c.model_error},
                {"label", c.label}};
}

ExperimentPlan plan_experiment(const ExperimentConfig& c) {
    const GridSpec& g = c.grid;
    if (g.n1 < 8 || g.n2 < 8 || g.n1 % 2 || g.n2 % 2) throw ValidationError("grid dimensions must be even and >= 8");
    if (!(g.dx > 0.0)) throw ValidationError("grid spacing must be positive");
    if (!(c.solver.cfl > 0.0) || c.solver.cfl >= verlet_cfl_limit())
        throw ValidationError(fmt("cfl %.4g outside (0, %.4g)", c.solver.cfl, verlet_cfl_limit()));
    if (!(c.eps1 > 0.0) || !(c.eps2 > 0.0) || !std::isfinite(c.eps1) || !std::isfinite(c.eps2))
        throw ValidationError("eps1 and eps2 must be positive and finite");
    for (double e : c.eps1_ladder)
        if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("eps1_ladder entries must be positive");
    if (!(c.sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (!(c.k1 > 0.0)) throw ValidationError("k1 must be positive");
    if (c.separation_sigmas < 4.0) throw ValidationError("separation_sigmas must be at least 4");
    if (!(c.measure_factor > 1.0)) throw ValidationError("measure_factor must exceed 1");
    if (!(c.model_error >= 0.0)) throw ValidationError("model_error must be non-negative");

    const MaterialPoint p(c.medium);
    const CaseInfo info = case_info(c.kase);
    const auto [mode1, mode2] = input_modes(c.kase);
    const PacketMode out_mode = packet_mode_of(info.out);

    const double th1 = c.direction1_deg * kDeg, th2 = (c.direction1_deg + c.angle_deg) * kDeg;
    const Vec3 d1(std::cos(th1), std::sin(th1), 0.0), d2(std::cos(th2), std::sin(th2), 0.0);
    const Vec3 x0(0.0, 0.0, 0.0);
    const Covector z1 = forward_covector(x0, c.k1 * d1, kinematic_mode(mode1), p);
    const Covector z2 = forward_covector(x0, d2, kinematic_mode(mode2), p);
    const Vec3 pol1 = packet_polarization(mode1, d1[0], d1[1]);
    const Vec3 pol2 = packet_polarization(mode2, d2[0], d2[1]);
    const InteractionConfig cfg = InteractionConfig::make(z1, z2, pol1.cast<cplx>(), pol2.cast<cplx>());

    const Mode want = info.out == OutputMode::P ? Mode::P : Mode::S;
    std::vector<double> roots;
    for (const auto& r : solve_resonances(cfg, p))
        if (r.out_mode == want && r.interacts)
            for (double b : r.roots) roots.push_back(b);
    if (roots.empty())
        throw DegenerateError("no resonant " + to_string(info.out) + " output for " + to_string(c.kase) +
                              fmt(" at an angle of %.6g degrees", c.angle_deg));
    std::sort(roots.begin(), roots.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

    const double kcut = 2.0 * std::numbers::pi / (3.0 * g.dx);
    const double spread = 4.0 / c.sigma;
    ExperimentPlan plan;
    bool found = false;
    std::string why;
    for (double b : roots) {
        const double k2 = std::abs(b);
        const Vec3 kout = c.k1 * d1 + b * d2;
        if (k2 * g.dx >= std::numbers::pi / 4.0) {
            why = fmt("second packet wavenumber %.4g is under-resolved (k dx >= pi/4)", k2);
            continue;
        }
        if (k2 * c.sigma < 2.0) {
            why = fmt("second packet wavenumber %.4g is too small for sigma %.4g", k2, c.sigma);
            continue;
        }
        if (std::abs(kout[0]) + spread > kcut || std::abs(kout[1]) + spread > kcut) {
            why = fmt("output wavevector |k| = %.4g lies beyond the dealiasing cutoff %.4g", kout.norm(), kcut);
            continue;
        }
        if (kout.norm() * c.sigma < 2.0) {
            why = fmt("output wavevector |k| = %.4g is not resolved by the packet bandwidth", kout.norm());
            continue;
        }
        plan.root_b = b;
        plan.k_out = {kout[0], kout[1]};
        found = true;
        break;
    }
    if (!found) throw ValidationError("under-resolved experiment: " + why);

    plan.difference = plan.root_b < 0.0;
    plan.out_mode = out_mode;
    plan.symbol_cfg = cfg.scaled_second(plan.root_b);
    const long m1 = std::lround(plan.k_out[0] / g.dk1());
    const long m2 = std::lround(plan.k_out[1] / g.dk2());
    plan.k_measure = {m1 * g.dk1(), m2 * g.dk2()};
    const double c_out = mode_speed(c.medium, out_mode);
    plan.omega_out = c_out * std::hypot(plan.k_measure[0], plan.k_measure[1]);
    plan.out_pol = packet_polarization(out_mode, plan.k_measure[0], plan.k_measure[1]);

    // Aim both packets at the target so their centres coincide at t_overlap.
    const Vec3 v1 = group_velocity(z1, p);
    const Vec3 v2 = group_velocity(forward_covector(x0, std::abs(plan.root_b) * d2, kinematic_mode(mode2), p), p);
    const double rel = (v1 - v2).norm();
    if (rel < 1e-9 * std::max(v1.norm(), v2.norm()))
        throw ValidationError("packets never overlap: equal group velocities");
    plan.t_overlap = c.separation_sigmas * c.sigma / rel;
    const double lmin = std::min(g.length1(), g.length2());
    if (c.separation_sigmas * c.sigma * std::max(1.0, c.measure_factor - 1.0) > lmin - 6.0 * c.sigma)
        throw ValidationError("packets would meet a periodic image before the measurement time; enlarge the grid");

    std::array<double, 2> target = c.target;
    if (target[0] < 0.0 || target[1] < 0.0) target = {0.5 * g.length1(), 0.5 * g.length2()};
    if (target[0] >= g.length1() || target[1] >= g.length2())
        throw ValidationError("interaction target lies outside the domain");

    auto make_packet = [&](PacketMode mode, const Vec3& d, double k, const Vec3& vel, double eps) {
        PacketSource s;
        s.center = {target[0] - vel[0] * plan.t_overlap, target[1] - vel[1] * plan.t_overlap};
        for (int a = 0; a < 2; ++a) {
            const double l = a == 0 ? g.length1() : g.length2();
            s.center[a] -= l * std::floor(s.center[a] / l);
        }
        s.direction = {d[0], d[1]};
        s.k0 = k;
        s.sigma_par = s.sigma_perp = c.sigma;
        s.mode = mode;
        s.amplitude = eps;
        return s;
    };
    plan.packet1 = make_packet(mode1, d1, c.k1, v1, c.eps1);
    plan.packet2 = make_packet(mode2, d2, std::abs(plan.root_b), v2, c.eps2);
    validate_packet(plan.packet1, g);
    validate_packet(plan.packet2, g);

    plan.dt = c.solver.cfl * g.dx / wave_speeds(p).c_p;
    const long n_measure = std::lround(c.measure_factor * plan.t_overlap / plan.dt);
    const long n_probe = std::max(1L, std::lround(1.0 / (plan.omega_out * plan.dt)));
    plan.t_measure = n_measure * plan.dt;
    plan.t_probe = (n_measure + n_probe) * plan.dt;
    plan.steps_estimate = static_cast<double>(n_measure + n_probe);
    return plan;
}

json plan_to_json(const ExperimentPlan& p) {
    const Frame f = build_frame(p.symbol_cfg.zeta1.xi, p.symbol_cfg.zeta2.xi,
                                p.symbol_cfg.zeta1.xi + p.symbol_cfg.zeta2.xi);
    return json{{"packet1", packet_json(p.packet1)},
                {"packet2", packet_json(p.packet2)},
                {"root_b", p.root_b},
                {"interaction", p.difference ? "difference" : "sum"},
                {"k_out", p.k_out},
                {"k_measure", p.k_measure},
                {"omega_out", p.omega_out},
                {"out_mode", to_string(p.out_mode)},
                {"out_polarization", {p.out_pol[0], p.out_pol[1], p.out_pol[2]}},
                {"alpha_deg", f.alpha / kDeg},
                {"psi_deg", f.psi / kDeg},
                {"t_overlap", p.t_overlap},
                {"t_measure", p.t_measure},
                {"t_probe", p.t_probe},
                {"dt", p.dt},
                {"steps_per_run", p.steps_estimate}};
}

cd born_overlap(const ExperimentPlan& plan, const GridSpec& g, const Moduli& m, double dt, double t_end) {
    const size_t n = g.cells();
    detail::ComplexFft2 fft(g.n1, g.n2);
    detail::ComplexBuffer a(n), s1(n), s2(n);
    auto spectrum = [&](const PacketSource& p, detail::ComplexBuffer& out) {
        const auto f = packet_scalar(p, g);
        for (size_t i = 0; i < n; ++i) a[i] = f[i];
        fft.forward(a, out);
        for (size_t i = 0; i < n; ++i) out[i] /= static_cast<double>(n);
    };
    spectrum(plan.packet1, s1);
    spectrum(plan.packet2, s2);

    const double c1 = mode_speed(m, plan.packet1.mode), c2 = mode_speed(m, plan.packet2.mode);
    const double c_out = mode_speed(m, plan.out_mode);
    const double w_out = discrete_omega(c_out, std::hypot(plan.k_measure[0], plan.k_measure[1]), dt);
    const long m1 = std::lround(plan.k_measure[0] / g.dk1());
    const long m2 = std::lround(plan.k_measure[1] / g.dk2());
    auto wrap = [](long i, long nn) { return ((i % nn) + nn) % nn; };

    cd total = 0.0;
    for (long i = 0; i < g.n1; ++i) {
        const long qi = detail::signed_index(i, g.n1);
        for (long j = 0; j < g.n2; ++j) {
            const long qj = detail::signed_index(j, g.n2);
            const cd a1 = s1[static_cast<size_t>(i) * g.n2 + j];
            if (std::abs(a1) < 1e-300) continue;
            const long ri = plan.difference ? qi - m1 : m1 - qi;
            const long rj = plan.difference ? qj - m2 : m2 - qj;
            const cd a2 = s2[static_cast<size_t>(wrap(ri, g.n1)) * g.n2 + wrap(rj, g.n2)];
            const double w1 = discrete_omega(c1, std::hypot(qi * g.dk1(), qj * g.dk2()), dt);
            const double w2 = discrete_omega(c2, std::hypot(ri * g.dk1(), rj * g.dk2()), dt);
            const cd term = plan.difference ? a1 * std::conj(a2) : a1 * a2;
            const double detune = plan.difference ? w_out - w1 + w2 : w_out - w1 - w2;
            const double x = detune * t_end;
            const cd integral = std::abs(x) < 1e-8 ? cd(t_end, 0.5 * x * t_end)
                                                   : (std::polar(1.0, x) - 1.0) / cd(0.0, detune);
            total += term * integral;
        }
    }
    return total;
}

WavefieldRecord run_packets(const GridSpec& g, const MediumField& m, const SolverOptions& opt,
                            const std::vector<PacketSource>& packets, const std::vector<double>& record_times,
                            double eps1, double eps2) {
    SpectralSolver solver(g, m, opt);
    Field3 u = make_field(g), v = make_field(g);
    json sources = json::array();
    for (const auto& p : packets) {
        const Vec3 at(p.center[0], p.center[1], 0.0);
        packet_initial_state(p, g, m.moduli_at(at), u, v);
        sources.push_back(packet_json(p));
    }
    solver.set_state(u, v);
    WavefieldRecord rec;
    rec.grid = g;
    rec.eps1 = eps1;
    rec.eps2 = eps2;
    rec.meta["sources"] = sources;
    rec.meta["nonlinearity"] = nonlinearity_name(opt.nonlinearity);
    rec.meta["dt"] = solver.dt();
    if (m.is_constant()) rec.meta["medium"] = moduli_to_json(m.moduli_at(Vec3::Zero()));
    std::vector<double> times = record_times;
    std::sort(times.begin(), times.end());
    for (double t : times) {
        solver.advance_to(t);
        rec.times.push_back(solver.time());
        rec.snapshots.push_back(solver.displacement());
    }
    return rec;
}

cd ExperimentReport::inferred_symbol() const {
    if (std::abs(geometry) == 0.0) throw NumericError("experiment has a zero geometry factor");
    return measured / geometry;
}

Measurement ExperimentReport::to_measurement() const {
    const InteractionConfig& cfg = plan.symbol_cfg;
    const Frame f = build_frame(cfg.zeta1.xi, cfg.zeta2.xi, cfg.zeta1.xi + cfg.zeta2.xi);
    const double sign = plan.out_pol.dot(frame_direction(f, case_info(config.kase).out)) < 0.0 ? -1.0 : 1.0;
    Measurement m;
    m.kase = config.kase;
    m.alpha = f.alpha;
    m.psi = f.psi;
    m.mags = magnitudes_of(cfg);
    const auto [a1, a2] = case_amplitudes(config.kase, cfg);
    m.amp1 = a1;
    m.amp2 = a2;
    m.measured = sign * inferred_symbol();
    m.noise_level = noise_level;
    m.label = config.label;
    return m;
}

json ExperimentReport::to_json() const {
    json ladder_j = json::array();
    for (const auto& l : ladder) ladder_j.push_back({{"eps1", l.eps1}, {"raw", cjson(l.raw)}});
    const Measurement m = to_measurement();
    const cd ratio = std::abs(predicted) > 0.0 ? measured / predicted : cd(0.0);
    return json{
        {"config", experiment_to_json(config)},
        {"plan", plan_to_json(plan)},
        {"symbol", {{"closed_form", cjson(symbol_closed)}, {"tensor", cjson(symbol_tensor)}}},
        {"overlap", cjson(overlap)},
        {"geometry", cjson(geometry)},
        {"predicted", cjson(predicted)},
        {"measured", cjson(measured)},
        {"measured_over_predicted", cjson(ratio)},
        {"measured_other_mode", cjson(measured_other)},
        {"noise_floor", noise_floor},
        {"snr_db", snr_db},
        {"mode_purity_db", mode_purity_db},
        {"omega_measured", omega_measured},
        {"omega_expected", plan.omega_out},
        {"dispersion_rel_err", dispersion_rel_err},
        {"spectral_peak", peak},
        {"peak_offset_grid_units", peak_offset},
        {"ladder", ladder_j},
        {"steps", steps},
        {"measurement",
         {{"case", to_string(m.kase)},
          {"alpha", m.alpha},
          {"psi", m.psi},
          {"mags", {{"xi1", m.mags.xi1}, {"xi2", m.mags.xi2}, {"out", m.mags.out}}},
          {"amp1", cjson(m.amp1)},
          {"amp2", cjson(m.amp2)},
          {"measured", cjson(m.measured)},
          {"noise_level", m.noise_level},
          {"label", m.label}}}};
}

ExperimentOutcome outcome_from_report_json(const json& j) {
    try {
        const json& r = j.contains("measurement") ? j.at("measurement") : j;
        Measurement m;
        m.kase = case_from_string(r.at("case").get<std::string>());
        m.alpha = r.at("alpha").get<double>();
        m.psi = r.at("psi").get<double>();
        if (r.contains("mags")) {
            const json& g = r.at("mags");
            m.mags = Magnitudes{g.value("xi1", 1.0), g.value("xi2", 1.0), g.value("out", 1.0)};
        }
        m.amp1 = r.contains("amp1") ? cfrom(r.at("amp1")) : cd(1.0);
        m.amp2 = r.contains("amp2") ? cfrom(r.at("amp2")) : cd(1.0);
        m.measured = cfrom(r.at("measured"));
        m.noise_level = r.value("noise_level", 0.0);
        m.label = r.value("label", std::string());
        if (!(m.alpha > 0.0 && m.alpha < std::numbers::pi) || !(m.psi > 0.0 && m.psi < std::numbers::pi))
            throw ValidationError("measurement angles must lie in (0, pi)");
        return ExperimentOutcome{m, m.label};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed measurement record: ") + e.what());
    }
}

ExperimentReport run_interaction_experiment(const ExperimentConfig& c, const MediumField* medium_override) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.config = c;
    rep.plan = plan_experiment(c);
    const ExperimentPlan& plan = rep.plan;
    const GridSpec& g = c.grid;

    ConstantMedium fallback{MaterialPoint(c.medium)};
    const MediumField& medium = medium_override ? *medium_override : fallback;
    const std::vector<double> times{plan.t_measure, plan.t_probe};

    PacketSource p1 = plan.packet1, p2 = plan.packet2;
    const WavefieldRecord r12 = run_packets(g, medium, c.solver, {p1, p2}, times, c.eps1, c.eps2);
    const WavefieldRecord r1 = run_packets(g, medium, c.solver, {p1}, times, c.eps1, 0.0);
    const WavefieldRecord r2 = run_packets(g, medium, c.solver, {p2}, times, 0.0, c.eps2);
    WavefieldRecord u12 = extract_bilinear_response(r12, r1, r2);
    rep.steps = 3 * std::lround(plan.steps_estimate);
    const double dt = r12.meta.at("dt").get<double>();
    const double t_m = u12.times[0], t_p = u12.times[1];

    const Field3& f = u12.snapshots[0];
    rep.measured = project_at(f, g, plan.k_measure, plan.out_pol);
    const PacketMode other = plan.out_mode == PacketMode::P ? PacketMode::SH : PacketMode::P;
    rep.measured_other = measure_mode_amplitude(f, g, plan.k_measure, other);
    const cd later = project_at(u12.snapshots[1], g, plan.k_measure, plan.out_pol);
    rep.omega_measured = std::abs(rep.measured) > 0.0 ? -std::arg(later / rep.measured) / (t_p - t_m) : 0.0;
    rep.dispersion_rel_err = std::abs(rep.omega_measured - plan.omega_out) / plan.omega_out;

    rep.peak = spectral_peak(f, g);
    const double dk = std::min(g.dk1(), g.dk2());
    const double off_plus = std::hypot(rep.peak[0] - plan.k_out[0], rep.peak[1] - plan.k_out[1]);
    const double off_minus = std::hypot(rep.peak[0] + plan.k_out[0], rep.peak[1] + plan.k_out[1]);
    rep.peak_offset = std::min(off_plus, off_minus) / dk;

    const double radius = 6.0 / c.sigma;
    for (int k = 0; k < 8; ++k) {
        const double ang = 2.0 * std::numbers::pi * k / 8.0;
        const std::array<double, 2> q{plan.k_measure[0] + radius * std::cos(ang),
                                      plan.k_measure[1] + radius * std::sin(ang)};
        double total = 0.0;
        for (PacketMode pm : {PacketMode::P, PacketMode::SH, PacketMode::SV})
            total += std::norm(measure_mode_amplitude(f, g, q, pm));
        rep.noise_floor = std::max(rep.noise_floor, std::sqrt(total));
    }
    auto db = [](double a, double b) {
        if (b <= 0.0) return 999.0;
        if (a <= 0.0) return -999.0;
        return std::clamp(20.0 * std::log10(a / b), -999.0, 999.0);
    };
    rep.snr_db = db(std::abs(rep.measured), rep.noise_floor);
    rep.mode_purity_db = db(std::abs(rep.measured), std::abs(rep.measured_other));

    const Vec3 at(plan.packet1.center[0], plan.packet1.center[1], 0.0);
    const Moduli local = medium.moduli_at(at);
    const MaterialPoint mp(c.medium);
    rep.overlap = born_overlap(plan, g, local, dt, t_m);
    const double w_num = discrete_omega(mode_speed(local, plan.out_mode),
                                        std::hypot(plan.k_measure[0], plan.k_measure[1]), dt);
    rep.geometry = cd(0.0, 1.0) * rep.overlap * std::polar(1.0, -w_num * t_m) / (8.0 * w_num);

    const InteractionConfig& cfg = plan.symbol_cfg;
    const Frame fr = build_frame(cfg.zeta1.xi, cfg.zeta2.xi, cfg.zeta1.xi + cfg.zeta2.xi);
    const double sign = plan.out_pol.dot(frame_direction(fr, case_info(c.kase).out)) < 0.0 ? -1.0 : 1.0;
    rep.symbol_closed = sign * closed_form_for(c.kase, mp, cfg);
    const SymbolVector sv = symbol_at(mp, {cfg.pol1, cfg.zeta1.xi}, {cfg.pol2, cfg.zeta2.xi}, case_info(c.kase).out);
    rep.symbol_tensor = plan.out_pol.cast<cplx>().dot(sv.full);
    rep.predicted = rep.geometry * rep.symbol_closed;

    rep.ladder.push_back({c.eps1, c.eps1 * c.eps2 * rep.measured});
    for (double e : c.eps1_ladder) {
        PacketSource q1 = p1;
        q1.amplitude = e;
        const WavefieldRecord a12 = run_packets(g, medium, c.solver, {q1, p2}, times, e, c.eps2);
        const WavefieldRecord a1 = run_packets(g, medium, c.solver, {q1}, times, e, 0.0);
        const WavefieldRecord w = extract_bilinear_response(a12, a1, r2);
        rep.ladder.push_back({e, e * c.eps2 * project_at(w.snapshots[0], g, plan.k_measure, plan.out_pol)});
        rep.steps += 2 * std::lround(plan.steps_estimate);
    }

    const MaterialPoint lame(c.medium.lambda, c.medium.mu);
    const auto [amp1, amp2] = case_amplitudes(c.kase, cfg);
    const double scale = amplitude_scale(c.kase, lame, magnitudes_of(cfg), amp1, amp2);
    rep.noise_level = std::hypot(rep.noise_floor / std::abs(rep.geometry), c.model_error * scale);

    if (c.write_snapshots) rep.u12 = std::move(u12);
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace fivec
