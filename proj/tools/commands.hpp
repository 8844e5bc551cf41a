#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ep3/io.hpp"

namespace ep3::cli {

/// Default configuration of a subcommand (keys, types and values) and the
/// subset of keys holding rates that the units flag rescales.
RunConfig make_config(const std::string& command);

void run_phase_diagram(const RunConfig& cfg, std::ostream& log);
void run_eigen_sweep(const RunConfig& cfg, std::ostream& log);
void run_braid(const RunConfig& cfg, std::ostream& log);
void run_encircle(const RunConfig& cfg, std::ostream& log);
void run_fit(const RunConfig& cfg, std::ostream& log);
void run_synth(const RunConfig& cfg, std::ostream& log);

}  // namespace ep3::cli
