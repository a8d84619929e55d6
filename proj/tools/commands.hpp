#pragma once

#include <iosfwd>

#include "config.hpp"

namespace fivec::cli {

/// Each subcommand validates its whole config before computing, writes its files under
/// rc.out_dir, prints a short summary to `out`, and returns the process exit code.
int cmd_speeds(const RunConfig& rc, std::ostream& out);
int cmd_classify(const RunConfig& rc, std::ostream& out);
int cmd_trace(const RunConfig& rc, std::ostream& out);
int cmd_resonance(const RunConfig& rc, std::ostream& out);
int cmd_symbol(const RunConfig& rc, std::ostream& out);
int cmd_table(const RunConfig& rc, std::ostream& out);
int cmd_simulate(const RunConfig& rc, std::ostream& out);
int cmd_invert(const RunConfig& rc, std::ostream& out);

}  // namespace fivec::cli
