#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fivec/errors.hpp"
#include "fivec/medium_io.hpp"

namespace fivec::cli {

using nlohmann::json;

json load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config file '" + path.string() + "' not found or unreadable");
    try {
        json j = json::parse(is);
        if (!j.is_object()) throw ValidationError("config file '" + path.string() + "' must hold a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("override '" + assignment + "' must have the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ValidationError("override '" + key + "' descends into a non-object");
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ValidationError("override '" + key + "' descends into a non-object");
    (*node)[parts.back()] = value;
}

std::filesystem::path resolve_output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FIVEC_OUTPUT_DIR"); env && *env) return env;
    return "fivec_out";
}

Vec3 vec3_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() < 1 || j.size() > 3)
        throw ValidationError(what + " must be an array of 1 to 3 numbers");
    Vec3 v = Vec3::Zero();
    for (size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) throw ValidationError(what + " must contain numbers");
        v[static_cast<int>(k)] = j[k].get<double>();
    }
    return v;
}

MediumPtr medium_from_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ValidationError("medium must be a JSON object");
    if (j.contains("type")) return medium_from_json(j, base_dir);
    return std::make_shared<ConstantMedium>(MaterialPoint(moduli_from_json(j)));
}

MaterialPoint material_from_config(const json& j) {
    if (!j.is_object()) throw ValidationError("medium must be a JSON object");
    if (j.contains("type") && j.at("type") != "constant")
        throw ValidationError("this subcommand needs a constant medium");
    return MaterialPoint(moduli_from_json(j.contains("moduli") ? j.at("moduli") : j));
}

StepControl step_control_from(const json& j) {
    StepControl c;
    if (j.is_null()) return c;
    require_keys_within(j, {"abs_tol", "rel_tol", "initial_dt", "max_dt", "max_steps", "drift_tol"}, "step_control");
    c.abs_tol = j.value("abs_tol", c.abs_tol);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.initial_dt = j.value("initial_dt", c.initial_dt);
    c.max_dt = j.value("max_dt", c.max_dt);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.drift_tol = j.value("drift_tol", c.drift_tol);
    if (!(c.abs_tol > 0.0) || !(c.rel_tol > 0.0) || !(c.initial_dt > 0.0) || !(c.max_dt > 0.0) || c.max_steps <= 0)
        throw ValidationError("step_control tolerances and step sizes must be positive");
    return c;
}

void require_keys_within(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace fivec::cli
