#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fivec/medium.hpp"

namespace fivec {

/// Grid file layout (little-endian):
///   char[8]   magic "FIVECGRD"
///   uint32    version (1)
///   uint32    ndim (1..3)
///   uint32[3] dims (unused trailing dims = 1)
///   float64[3] spacing
///   float64[3] origin
///   uint32    channel count (5), uint32 reserved (0)
///   float64   data[5][dims2][dims1][dims0], channels lambda, mu, A, B, C; x fastest
void write_grid_file(const std::filesystem::path& path, const GridMedium& g);
std::shared_ptr<GridMedium> read_grid_file(const std::filesystem::path& path);

Moduli moduli_from_json(const nlohmann::json& j);
nlohmann::json moduli_to_json(const Moduli& m);

/// Parses {"type": "constant" | "linear_gradient" | "grid", ...}. Relative grid paths resolve
/// against base_dir. Constant media are validated at parse time; grids are validated by validate_medium.
MediumPtr medium_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

nlohmann::json report_to_json(const MediumReport& r);

}  // namespace fivec
