#pragma once

#include "spcvm/covariance.hpp"

#include <string>

namespace spcvm {

// Content hash of every calibration parameter; the cache can never serve a
// result for different parameters.
std::string calibration_cache_key(const CalibrationConfig& config);

std::string calibration_cache_path(const std::string& dir, const CalibrationConfig& config);

// Returns false when the file is absent, unreadable, from a different format
// version, or carries metadata that does not match `expect` exactly.
bool load_calibration(const std::string& path, const CalibrationConfig& expect,
                      CalibrationResult& out);

// Write failures are non-fatal (a warning goes to stderr); calibration can
// always be recomputed.
void store_calibration(const std::string& path, const CalibrationResult& result);

} // namespace spcvm
