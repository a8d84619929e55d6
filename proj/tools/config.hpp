#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fivec/kinematics.hpp"
#include "fivec/medium.hpp"

namespace fivec::cli {

/// Parsed subcommand configuration plus the shared run options.
struct RunConfig {
    std::string subcommand;
    nlohmann::json params = nlohmann::json::object();
    std::filesystem::path base_dir = ".";
    std::filesystem::path out_dir;
    uint64_t seed = 12345;
    int jobs = 0;
    bool dry_run = false;
};

/// Reads a JSON config; a missing or unparsable file is a usage error.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Applies "a.b.c=value" to a JSON object. The value is parsed as JSON when possible, else kept as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// --out, then $FIVEC_OUTPUT_DIR, then ./fivec_out.
std::filesystem::path resolve_output_dir(const std::string& flag);

Vec3 vec3_from(const nlohmann::json& j, const std::string& what);

/// Either a bare moduli record {"lambda", "mu", ...} or a typed medium description.
MediumPtr medium_from_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Constant moduli; rejects non-constant media where a single material point is required.
MaterialPoint material_from_config(const nlohmann::json& j);

StepControl step_control_from(const nlohmann::json& j);

/// Rejects keys outside `allowed` so typos fail before any computation starts.
void require_keys_within(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace fivec::cli
