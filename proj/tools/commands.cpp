#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "fivec/errors.hpp"
#include "fivec/format.hpp"
#include "fivec/inversion.hpp"
#include "fivec/kinematics.hpp"
#include "fivec/medium_io.hpp"
#include "fivec/resonance.hpp"
#include "fivec/simulator.hpp"
#include "fivec/symbols.hpp"

namespace fivec::cli {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

json cjson(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

json vjson(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

void emit(const RunConfig& rc, const std::string& name, const std::string& content) {
    write_text_file(rc.out_dir / name, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Prints the planned computation and reports success without touching the filesystem.
int dry_run(const RunConfig& rc, std::ostream& out, const json& plan) {
    out << dump(json{{"subcommand", rc.subcommand}, {"dry_run", true}, {"plan", plan}});
    return 0;
}

const json& medium_block(const json& p) {
    if (!p.contains("medium")) throw ValidationError("config needs a 'medium' block");
    return p.at("medium");
}

Mode mode_from_json(const json& j) {
    const Mode m = mode_from_string(j.get<std::string>());
    if (m == Mode::unclassified) throw ValidationError("mode must be P or S");
    return m;
}

/// Values from a scalar, a list, or {"start", "stop", "count"} (inclusive endpoints).
std::vector<double> value_grid(const json& j, const std::string& what) {
    std::vector<double> v;
    if (j.is_number()) {
        v.push_back(j.get<double>());
    } else if (j.is_array()) {
        for (const auto& x : j) v.push_back(x.get<double>());
    } else if (j.is_object()) {
        require_keys_within(j, {"start", "stop", "count"}, what);
        const double a = j.at("start").get<double>(), b = j.at("stop").get<double>();
        const int n = j.at("count").get<int>();
        if (n < 1) throw ValidationError(what + ".count must be positive");
        for (int k = 0; k < n; ++k) v.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
    } else {
        throw ValidationError(what + " must be a number, a list or {start, stop, count}");
    }
    if (v.empty()) throw ValidationError(what + " is empty");
    return v;
}

std::string angle_text(InteractionCase c) {
    switch (c) {
        case InteractionCase::PP_SH: return "(lambda+3mu+A+2B) cos(alpha) sin(2psi-alpha)";
        case InteractionCase::PSH_P: return "(lambda+3mu+A+2B) cos(alpha-psi) sin(alpha+psi)";
        case InteractionCase::PSH_SH: return "(lambda+2mu+B+A/2) cos^2(psi) - (mu+B+A/2) sin^2(psi)";
        case InteractionCase::PSV_SV: return "(lambda+B) cos(psi) + (2mu+A/2) cos(alpha) cos(alpha-psi)";
        case InteractionCase::SHSH_P: return "(lambda+2mu+B+A/2) cos^2(alpha) - (mu+B+A/2) sin^2(alpha)";
        case InteractionCase::SHSV: return "0";
        case InteractionCase::SVSV_P: return "(lambda+B) cos(alpha) + (2mu+A/2) cos(psi) cos(alpha-psi)";
    }
    return "";
}

Measurement measurement_from_json(const json& j) {
    json r = j;
    if (r.contains("alpha_deg")) r["alpha"] = r.at("alpha_deg").get<double>() * kDeg, r.erase("alpha_deg");
    if (r.contains("psi_deg")) r["psi"] = r.at("psi_deg").get<double>() * kDeg, r.erase("psi_deg");
    return outcome_from_report_json(r).m;
}

json measurement_to_json(const Measurement& m) {
    return json{{"case", to_string(m.kase)},
                {"alpha", m.alpha},
                {"psi", m.psi},
                {"mags", {{"xi1", m.mags.xi1}, {"xi2", m.mags.xi2}, {"out", m.mags.out}}},
                {"amp1", cjson(m.amp1)},
                {"amp2", cjson(m.amp2)},
                {"measured", cjson(m.measured)},
                {"noise_level", m.noise_level},
                {"label", m.label}};
}

json recovery_to_json(const RecoveryResult& r) {
    const auto& d = r.diag;
    json diag{{"system", d.system},
              {"measurements_used", d.measurements_used},
              {"determinant", d.determinant},
              {"condition", d.condition},
              {"ridge_used", d.ridge_used},
              {"ridge", d.ridge},
              {"residual_norm", d.residual_norm},
              {"imag_residual", d.imag_residual},
              {"residuals", d.residuals},
              {"notes", d.notes}};
    if (d.has_pair)
        diag["psh_sh_pair"] = {{"lambda_2mu_B_halfA", d.pair.s_a},
                               {"mu_B_halfA", d.pair.s_b},
                               {"determinant", d.pair.determinant}};
    return json{{"lambda", r.lambda}, {"mu", r.mu},           {"A", r.a},
                {"B", r.b},           {"sigma_A", r.sigma_a}, {"sigma_B", r.sigma_b},
                {"A_plus_2B", r.a_plus_2b}, {"diagnostics", diag}};
}

}  // namespace

int cmd_speeds(const RunConfig& rc, std::ostream& out) {
    json p = rc.params;
    if (!p.contains("medium") && p.contains("lambda")) {
        json m = json::object();
        for (const char* k : {"lambda", "mu", "A", "B", "C"})
            if (p.contains(k)) m[k] = p[k], p.erase(k);
        p["medium"] = m;
    }
    require_keys_within(p, {"medium", "points"}, "speeds config");
    const json& mj = medium_block(p);
    std::vector<Vec3> points;
    if (p.contains("points"))
        for (const auto& x : p.at("points")) points.push_back(vec3_from(x, "points entry"));
    if (points.empty()) points.push_back(Vec3::Zero());

    MediumPtr medium;
    if (mj.contains("type") && mj.at("type") != "constant")
        medium = medium_from_config(mj, rc.base_dir);
    else
        medium = ConstantMedium::unchecked(moduli_from_json(mj));
    if (rc.dry_run) return dry_run(rc, out, json{{"medium", mj}, {"points", points.size()}});

    const MediumReport report = validate_medium(*medium, points);
    json result{{"medium", mj}, {"violations", report_to_json(report)}};
    if (!report.ok()) {
        emit(rc, "speeds.json", dump(result));
        std::ostringstream os;
        os << "medium violates mu > 0, lambda + mu > 0 at " << report.violations.size() << " location(s); first: "
           << report.violations.front().where << " (" << report.violations.front().reason << ")";
        throw ValidationError(os.str());
    }
    json rows = json::array();
    for (const auto& x : points) {
        const WaveSpeeds w = wave_speeds(medium->material_at(x));
        rows.push_back({{"x", vjson(x)}, {"c_P", w.c_p}, {"c_S", w.c_s}});
        if (points.size() > 1) out << "x=(" << fmt_num(x[0]) << "," << fmt_num(x[1]) << "," << fmt_num(x[2]) << ") ";
        out << "c_P=" << fmt_num(w.c_p) << " c_S=" << fmt_num(w.c_s) << "\n";
    }
    result["speeds"] = rows;
    emit(rc, "speeds.json", dump(result));
    return 0;
}

int cmd_classify(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p, {"medium", "tau", "xi", "normal", "x", "t"}, "classify config");
    const MaterialPoint mp = material_from_config(medium_block(p));
    if (!p.contains("tau") || !p.contains("xi") || !p.contains("normal"))
        throw ValidationError("classify needs tau, xi (tangential) and normal");
    Covector cv;
    cv.t = p.value("t", 0.0);
    cv.x = p.contains("x") ? vec3_from(p.at("x"), "x") : Vec3::Zero();
    cv.tau = p.at("tau").get<double>();
    cv.xi = vec3_from(p.at("xi"), "xi");
    cv.mode = Mode::unclassified;
    const Vec3 normal = vec3_from(p.at("normal"), "normal");
    if (rc.dry_run) return dry_run(rc, out, json{{"tau", cv.tau}, {"xi", vjson(cv.xi)}, {"normal", vjson(normal)}});

    const BoundaryClass bc = classify_boundary(cv, normal, mp);
    auto mode_json = [](const ModeBoundary& m) {
        json j{{"tag", to_string(m.tag)}, {"discriminant", m.discriminant}};
        if (m.tag != BoundaryTag::elliptic) {
            j["z_forward"] = m.z_forward;
            j["xi_forward"] = vjson(m.xi_forward);
        } else {
            j["z_decaying"] = cjson(m.z_decaying);
        }
        return j;
    };
    const json result{{"P", mode_json(bc.p)}, {"S", mode_json(bc.s)}};
    emit(rc, "classify.json", dump(result));
    for (const auto& [name, m] : {std::pair<const char*, const ModeBoundary*>{"P", &bc.p}, {"S", &bc.s}}) {
        out << name << ": " << to_string(m->tag);
        if (m->tag != BoundaryTag::elliptic) out << " z=" << fmt_num(m->z_forward);
        out << "\n";
    }
    return 0;
}

int cmd_trace(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p, {"medium", "start", "t_end", "step_control"}, "trace config");
    const MediumPtr medium = medium_from_config(medium_block(p), rc.base_dir);
    if (!p.contains("start") || !p.contains("t_end")) throw ValidationError("trace needs 'start' and 't_end'");
    const json& s = p.at("start");
    require_keys_within(s, {"x", "xi", "mode", "t"}, "start");
    const Vec3 x = s.contains("x") ? vec3_from(s.at("x"), "start.x") : Vec3::Zero();
    const Vec3 xi = vec3_from(s.at("xi"), "start.xi");
    const Mode mode = mode_from_json(s.at("mode"));
    const double t0 = s.value("t", 0.0);
    const double t_end = p.at("t_end").get<double>();
    const StepControl ctl = step_control_from(p.contains("step_control") ? p.at("step_control") : json());
    const Covector start = forward_covector(x, xi, mode, medium->material_at(x), t0);
    if (rc.dry_run)
        return dry_run(rc, out, json{{"start_tau", start.tau}, {"t0", t0}, {"t_end", t_end}, {"mode", to_string(mode)}});

    const RayPath path = trace_ray(start, *medium, t_end, ctl);
    std::ostringstream csv;
    path.write_csv(csv);
    emit(rc, "ray.csv", csv.str());
    const RaySample& end = path.back();
    emit(rc, "ray.json",
         dump(json{{"mode", to_string(path.mode)},
                   {"samples", path.samples.size()},
                   {"steps", path.stats.steps},
                   {"rhs_evaluations", path.stats.rhs_evaluations},
                   {"max_hamiltonian_residual", path.stats.max_residual},
                   {"end", {{"t", end.t}, {"x", vjson(end.x)}, {"tau", end.tau}, {"xi", vjson(end.xi)}}}}));
    out << "ray " << to_string(path.mode) << ": " << path.samples.size() << " samples, end x=(" << fmt_num(end.x[0])
        << "," << fmt_num(end.x[1]) << "," << fmt_num(end.x[2]) << ") at t=" << fmt_num(end.t)
        << ", max residual " << fmt_num(path.stats.max_residual) << "\n";
    return 0;
}

int cmd_resonance(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p, {"medium", "modes", "xi1", "xi2", "alpha_deg"}, "resonance config");
    const MaterialPoint mp = material_from_config(medium_block(p));
    if (!p.contains("modes") || p.at("modes").size() != 2) throw ValidationError("resonance needs modes: [m1, m2]");
    const Mode m1 = mode_from_json(p.at("modes")[0]), m2 = mode_from_json(p.at("modes")[1]);

    std::vector<std::pair<Vec3, Vec3>> pairs;
    if (p.contains("alpha_deg")) {
        for (double a : value_grid(p.at("alpha_deg"), "alpha_deg")) {
            if (!(a > 0.0 && a < 180.0)) throw ValidationError("alpha_deg values must lie in (0, 180)");
            pairs.push_back({Vec3(1.0, 0.0, 0.0), Vec3(std::cos(a * kDeg), std::sin(a * kDeg), 0.0)});
        }
    } else {
        if (!p.contains("xi1") || !p.contains("xi2")) throw ValidationError("resonance needs xi1/xi2 or alpha_deg");
        pairs.push_back({vec3_from(p.at("xi1"), "xi1"), vec3_from(p.at("xi2"), "xi2")});
    }
    std::vector<InteractionConfig> cfgs;
    for (const auto& [a, b] : pairs)
        cfgs.push_back(InteractionConfig::make(forward_covector(Vec3::Zero(), a, m1, mp),
                                               forward_covector(Vec3::Zero(), b, m2, mp)));
    if (rc.dry_run) return dry_run(rc, out, json{{"configurations", cfgs.size()}});

    std::ostringstream csv;
    csv << "alpha,family,out_mode,interacts,root,residual,discriminant\n";
    json rows = json::array();
    for (const auto& cfg : cfgs) {
        for (const auto& r : solve_resonances(cfg, mp)) {
            const std::string fam = to_string(r.tag);
            if (!r.interacts || r.roots.empty()) {
                csv << fmt_num(cfg.alpha) << ',' << fam << ',' << to_string(r.out_mode) << ",no-interaction,,,"
                    << fmt_num(r.discriminant) << '\n';
                rows.push_back({{"alpha", cfg.alpha}, {"family", fam}, {"out_mode", to_string(r.out_mode)},
                                {"interacts", false}, {"discriminant", r.discriminant}});
                out << fam << " alpha=" << short_num(cfg.alpha / kDeg) << "deg: no-interaction\n";
                continue;
            }
            for (size_t k = 0; k < r.roots.size(); ++k) {
                csv << fmt_num(cfg.alpha) << ',' << fam << ',' << to_string(r.out_mode) << ",yes,"
                    << fmt_num(r.roots[k]) << ',' << fmt_num(r.residuals[k]) << ',' << fmt_num(r.discriminant)
                    << '\n';
                rows.push_back({{"alpha", cfg.alpha},
                                {"family", fam},
                                {"out_mode", to_string(r.out_mode)},
                                {"interacts", true},
                                {"root", r.roots[k]},
                                {"output_tau", r.outputs[k].tau},
                                {"output_xi", vjson(r.outputs[k].xi)},
                                {"residual", r.residuals[k]},
                                {"discriminant", r.discriminant}});
                out << fam << " alpha=" << short_num(cfg.alpha / kDeg) << "deg: b=" << fmt_num(r.roots[k])
                    << " residual=" << fmt_num(r.residuals[k]) << "\n";
            }
        }
    }
    emit(rc, "resonance.csv", csv.str());
    emit(rc, "resonance.json", dump(json{{"rows", rows}}));
    return 0;
}

int cmd_symbol(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p, {"medium", "case", "alpha_deg", "psi_deg", "psi_count"}, "symbol config");
    const MaterialPoint mp = material_from_config(medium_block(p));
    if (!p.contains("case") || !p.contains("alpha_deg")) throw ValidationError("symbol needs 'case' and 'alpha_deg'");
    const InteractionCase kase = case_from_string(p.at("case").get<std::string>());
    const std::vector<double> alphas_deg = value_grid(p.at("alpha_deg"), "alpha_deg");
    const int psi_count = p.value("psi_count", 181);
    std::vector<SweepRow> rows;
    std::vector<std::pair<double, std::vector<double>>> grid;
    for (double a : alphas_deg) {
        if (!(a > 0.0 && a < 180.0)) throw ValidationError("alpha_deg values must lie in (0, 180)");
        std::vector<double> psis;
        if (p.contains("psi_deg")) {
            for (double s : value_grid(p.at("psi_deg"), "psi_deg")) {
                if (!(s > 0.0 && s < a)) throw ValidationError("psi_deg values must lie in (0, alpha_deg)");
                psis.push_back(s * kDeg);
            }
        } else {
            if (psi_count < 1) throw ValidationError("psi_count must be positive");
            for (int k = 1; k <= psi_count; ++k) psis.push_back(a * kDeg * k / (psi_count + 1));
        }
        grid.push_back({a * kDeg, psis});
    }
    if (rc.dry_run) {
        size_t n = 0;
        for (const auto& g : grid) n += g.second.size();
        return dry_run(rc, out, json{{"case", to_string(kase)}, {"evaluations", n}});
    }
    for (const auto& [a, psis] : grid) {
        const auto part = symbol_sweep(kase, mp, {a}, psis);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    emit(rc, "symbol_sweep.csv", csv.str());
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.rel_err);
    out << to_string(kase) << ": " << rows.size() << " evaluations, max closed-form/tensor relative error "
        << fmt_num(worst) << "\n";
    return 0;
}

int cmd_table(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p, {"medium", "alpha_deg"}, "table config");
    const MaterialPoint mp = material_from_config(medium_block(p));
    const double alpha = p.value("alpha_deg", 60.0) * kDeg;
    if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw ValidationError("alpha_deg must lie in (0, 180)");
    if (rc.dry_run) return dry_run(rc, out, json{{"rows", all_cases().size()}});

    struct Row {
        std::string name, cls, factor, coeffs, sample;
    };
    std::vector<Row> rows;
    json jrows = json::array();
    for (InteractionCase c : all_cases()) {
        const CaseInfo info = case_info(c);
        const InteractionClass cls = classify_interaction(c, mp);
        std::string coeffs;
        for (double k : case_coefficients(c, mp.moduli())) coeffs += (coeffs.empty() ? "" : ", ") + fmt_num(k);
        if (coeffs.empty()) coeffs = "-";
        // Sample amplitude on a resonant configuration: packets at the requested angle, first root.
        const Vec3 d1(1.0, 0.0, 0.0), d2(std::cos(alpha), std::sin(alpha), 0.0);
        std::string sample = "no resonance at this angle";
        json jsample = nullptr;
        if (c == InteractionCase::SHSV) {
            sample = "0 (vanishing)";
            jsample = 0.0;
        } else {
            const auto cfgs = resonant_configs(c, mp, d1, d2);
            if (!cfgs.empty()) {
                const cplx h = closed_form_for(c, mp, cfgs.front());
                sample = short_num(std::abs(h));
                jsample = std::abs(h);
            }
        }
        const std::string cls_name = c == InteractionCase::SHSV ? "vanishing" : to_string(cls);
        rows.push_back({to_string(c), cls_name, angle_text(c), coeffs, sample});
        jrows.push_back({{"case", to_string(c)},
                         {"output", to_string(info.out)},
                         {"class", cls_name},
                         {"vanishing", c == InteractionCase::SHSV || cls == InteractionClass::vanishing},
                         {"needs_interaction_condition", info.needs_interaction_condition},
                         {"angular_factor", angle_text(c)},
                         {"coefficients", case_coefficients(c, mp.moduli())},
                         {"sample_abs_amplitude", jsample}});
    }
    std::vector<std::string> head{"interaction", "class", "angular dependence", "moduli combinations",
                                  "|h| at alpha"};
    std::vector<size_t> w(head.size());
    for (size_t k = 0; k < head.size(); ++k) w[k] = head[k].size();
    for (const auto& r : rows) {
        w[0] = std::max(w[0], r.name.size());
        w[1] = std::max(w[1], r.cls.size());
        w[2] = std::max(w[2], r.factor.size());
        w[3] = std::max(w[3], r.coeffs.size());
        w[4] = std::max(w[4], r.sample.size());
    }
    std::ostringstream txt;
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t k = 0; k < cells.size(); ++k)
            txt << (k ? " | " : "") << std::left << std::setw(static_cast<int>(w[k])) << cells[k];
        txt << "\n";
    };
    txt << "medium: lambda=" << fmt_num(mp.lambda()) << " mu=" << fmt_num(mp.mu()) << " A=" << fmt_num(mp.a_landau())
        << " B=" << fmt_num(mp.b_landau()) << " C=" << fmt_num(mp.c_landau())
        << "; sample amplitudes use unit amplitudes, |xi1| = 1 and alpha = " << short_num(alpha / kDeg) << " deg\n";
    line(head);
    size_t total = 0;
    for (size_t k : w) total += k;
    txt << std::string(total + 3 * (w.size() - 1), '-') << "\n";
    for (const auto& r : rows) line({r.name, r.cls, r.factor, r.coeffs, r.sample});
    out << txt.str();
    emit(rc, "table.txt", txt.str());
    emit(rc, "table.json", dump(json{{"medium", moduli_to_json(mp.moduli())}, {"alpha", alpha}, {"rows", jrows}}));
    return 0;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
    const ExperimentConfig cfg = experiment_from_json(rc.params);
    const ExperimentPlan plan = plan_experiment(cfg);
    if (rc.dry_run) {
        const int runs = 3 + 2 * static_cast<int>(cfg.eps1_ladder.size());
        return dry_run(rc, out, json{{"experiment", plan_to_json(plan)}, {"runs", runs}});
    }
    const ExperimentReport rep = run_interaction_experiment(cfg);
    emit(rc, "report.json", dump(rep.to_json()));

    std::ostringstream csv;
    csv << "quantity,value\n";
    auto row = [&](const std::string& k, double v) { csv << k << ',' << fmt_num(v) << '\n'; };
    row("predicted_re", rep.predicted.real());
    row("predicted_im", rep.predicted.imag());
    row("measured_re", rep.measured.real());
    row("measured_im", rep.measured.imag());
    row("measured_other_re", rep.measured_other.real());
    row("measured_other_im", rep.measured_other.imag());
    row("noise_floor", rep.noise_floor);
    row("snr_db", rep.snr_db);
    row("mode_purity_db", rep.mode_purity_db);
    row("omega_measured", rep.omega_measured);
    row("omega_expected", rep.plan.omega_out);
    row("dispersion_rel_err", rep.dispersion_rel_err);
    row("peak_offset_grid_units", rep.peak_offset);
    for (size_t k = 0; k < rep.ladder.size(); ++k) {
        row("ladder" + std::to_string(k) + "_eps1", rep.ladder[k].eps1);
        row("ladder" + std::to_string(k) + "_abs", std::abs(rep.ladder[k].raw));
    }
    emit(rc, "report.csv", csv.str());
    if (rep.u12) rep.u12->write(rc.out_dir / "u12");

    out << to_string(cfg.kase) << ": measured |u12| = " << fmt_num(std::abs(rep.measured)) << ", predicted "
        << fmt_num(std::abs(rep.predicted)) << ", SNR " << std::fixed << std::setprecision(1) << rep.snr_db
        << " dB, mode purity " << rep.mode_purity_db << " dB, dispersion error " << std::setprecision(3)
        << 100.0 * rep.dispersion_rel_err << "%, runtime " << std::setprecision(1) << rep.runtime_s << " s\n";
    return 0;
}

int cmd_invert(const RunConfig& rc, std::ostream& out) {
    const json& p = rc.params;
    require_keys_within(p,
                        {"lambda", "mu", "travel_times", "method", "measurements", "reports", "noise_trials",
                         "truth", "c_report"},
                        "invert config");
    const std::string method = p.value("method", std::string("auto"));
    if (method != "auto" && method != "recover_AB" && method != "recover_AB_alt" && method != "end_to_end")
        throw ValidationError("method must be auto, recover_AB, recover_AB_alt or end_to_end");

    std::vector<TravelTime> times;
    if (p.contains("travel_times")) {
        for (const auto& t : p.at("travel_times")) {
            require_keys_within(t, {"start", "end", "mode", "time"}, "travel_times entry");
            times.push_back(TravelTime{vec3_from(t.at("start"), "start"), vec3_from(t.at("end"), "end"),
                                       mode_from_json(t.at("mode")), t.at("time").get<double>()});
        }
    } else if (!p.contains("lambda") || !p.contains("mu")) {
        throw ValidationError("invert needs lambda and mu, or travel_times to recover them");
    }

    std::vector<Measurement> ms;
    if (p.contains("measurements"))
        for (const auto& m : p.at("measurements")) ms.push_back(measurement_from_json(m));
    std::vector<ExperimentOutcome> outcomes;
    if (p.contains("reports")) {
        for (const auto& r : p.at("reports")) {
            std::filesystem::path path = r.get<std::string>();
            if (path.is_relative()) path = rc.base_dir / path;
            std::ifstream is(path);
            if (!is) throw IoError("cannot read experiment report " + path.string());
            json j;
            try {
                j = json::parse(is);
            } catch (const json::parse_error& e) {
                throw ValidationError("report " + path.string() + " is not valid JSON: " + e.what());
            }
            outcomes.push_back(outcome_from_report_json(j));
        }
    }
    if (ms.empty() && outcomes.empty()) throw ValidationError("invert needs 'measurements' or 'reports'");
    if (rc.dry_run)
        return dry_run(rc, out,
                       json{{"method", method},
                            {"travel_times", times.size()},
                            {"measurements", ms.size()},
                            {"reports", outcomes.size()}});

    json result;
    double lambda = p.value("lambda", 0.0), mu = p.value("mu", 0.0);
    if (!times.empty()) {
        const LameResult lr = recover_lame(times);
        lambda = lr.lambda;
        mu = lr.mu;
        result["lame"] = {{"lambda", lr.lambda},
                          {"mu", lr.mu},
                          {"c_P", lr.c_p},
                          {"c_S", lr.c_s},
                          {"rms_residual_P", lr.rms_residual_p},
                          {"rms_residual_S", lr.rms_residual_s}};
    }
    for (const auto& o : outcomes) ms.push_back(o.m);

    RecoveryResult r;
    const bool all_sv = std::all_of(ms.begin(), ms.end(), [](const Measurement& m) {
        return m.kase == InteractionCase::PSV_SV;
    });
    if (method == "end_to_end" || (method == "auto" && !outcomes.empty())) {
        std::vector<ExperimentOutcome> all;
        for (const auto& m : ms) all.push_back({m, m.label});
        r = end_to_end_recovery(all, lambda, mu);
    } else if (method == "recover_AB" || (method == "auto" && all_sv)) {
        r = recover_AB(ms, lambda, mu);
    } else {
        r = recover_AB_alt(ms, lambda, mu);
    }
    result["recovery"] = recovery_to_json(r);
    result["method"] = method;
    if (p.contains("truth")) {
        const MaterialPoint truth = material_from_config(p.at("truth"));
        auto rel = [](double got, double want) {
            return want != 0.0 ? json(std::abs(got - want) / std::abs(want)) : json(std::abs(got));
        };
        result["truth"] = {{"A", truth.a_landau()},
                           {"B", truth.b_landau()},
                           {"rel_err_A", rel(r.a, truth.a_landau())},
                           {"rel_err_B", rel(r.b, truth.b_landau())}};
    }

    if (p.contains("noise_trials")) {
        const json& nt = p.at("noise_trials");
        require_keys_within(nt, {"level", "trials"}, "noise_trials");
        if (!p.contains("truth")) throw ValidationError("noise_trials needs a 'truth' medium");
        const MaterialPoint truth = material_from_config(p.at("truth"));
        std::vector<Measurement> clean;
        for (const auto& m : ms)
            clean.push_back(synthesize_measurement(m.kase, truth, m.alpha, m.psi, m.mags, m.amp1, m.amp2));
        const NoiseTrialSummary s =
            noise_trials(clean, truth, nt.value("level", 0.05), nt.value("trials", 200), rc.seed);
        result["noise_trials"] = {{"level", nt.value("level", 0.05)},
                                  {"trials", s.trials},
                                  {"seed", rc.seed},
                                  {"mean_rel_err_A", s.mean_rel_err_a},
                                  {"mean_rel_err_B", s.mean_rel_err_b},
                                  {"max_rel_err", s.max_rel_err},
                                  {"mean_A", s.mean_a},
                                  {"mean_B", s.mean_b}};
    }
    if (p.contains("c_report")) {
        const json& cr = p.at("c_report");
        require_keys_within(cr, {"perturbations", "configs_per_case"}, "c_report");
        const MaterialPoint base(lambda, mu, r.a, r.b, 0.0);
        const CReport rep = c_identifiability_report(base, cr.value("perturbations", std::vector<double>{10.0}),
                                                     cr.value("configs_per_case", 32), rc.seed);
        json per = json::array();
        for (const auto& c : rep.per_case)
            per.push_back({{"case", to_string(c.kase)}, {"max_change", c.max_change},
                           {"max_sensitivity", c.max_sensitivity}, {"evaluations", c.evaluations}});
        result["c_report"] = {
            {"max_change", rep.max_change}, {"max_sensitivity", rep.max_sensitivity}, {"per_case", per}};
    }
    json used = json::array();
    for (const auto& m : ms) used.push_back(measurement_to_json(m));
    result["measurements"] = used;
    emit(rc, "recovery.json", dump(result));
    out << "lambda=" << fmt_num(lambda) << " mu=" << fmt_num(mu) << " A=" << fmt_num(r.a) << " B=" << fmt_num(r.b)
        << " (" << r.diag.system << ", " << r.diag.measurements_used << " measurements, determinant "
        << fmt_num(r.diag.determinant) << ")\n";
    return 0;
}

}  // namespace fivec::cli
