#pragma once

// Config-driven pipeline commands shared by the C API and the CLI. Each one
// writes its outputs and a resolved-config snapshot under out_dir.

#include <iosfwd>
#include <string>
#include <vector>

#include "pfa/config.hpp"
#include "pfa/data.hpp"

namespace pfa {

const std::vector<std::string>& command_names();

/// train | forecast | attack | backtest | synth | grad-check
void run_command(const std::string& name, const RunConfig& config, std::ostream& log);

SyntheticSpec synthetic_spec(const RunConfig& config);

}  // namespace pfa
