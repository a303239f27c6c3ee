#pragma once

#include <istream>
#include <string>
#include <vector>

#include "kvlat/sweep.hpp"

namespace kvlat::config {

// Loads a sweep spec from the JSON run document. Unknown keys are rejected to
// catch typos; durations are given in microseconds (keys suffixed _us).
sweep::SweepSpec load_spec(std::istream& in);
sweep::SweepSpec load_spec_file(const std::string& path);

// CPR rows: either {"cpr": [{"c":..,"b":..,"d":..}, ...]} or a bare array.
std::vector<CprParams> load_cpr_rows(std::istream& in);
std::vector<CprParams> load_cpr_rows_file(const std::string& path);

}  // namespace kvlat::config
