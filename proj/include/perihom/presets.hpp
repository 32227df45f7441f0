/// @file presets.hpp
/// @brief Named built-in configurations exercised by the test and acceptance
/// suites and available from the CLI.
#pragma once

#include <string>
#include <vector>

#include "perihom/pipeline.hpp"

namespace perihom {

/// identity, centered-1d, noncentered-1d, laminated-2d, shear-2d, harmonic-1d
std::vector<std::string> preset_names();

RunConfig preset_config(const std::string& name);

}  // namespace perihom
