#pragma once

#include <string>

namespace fivec {

/// Round-trip decimal formatting with 17 significant digits (deterministic across runs).
std::string fmt_num(double v);

}  // namespace fivec
