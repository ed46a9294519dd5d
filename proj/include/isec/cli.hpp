#pragma once

#include <string>

#include "isec/fibration.hpp"

namespace isec {

/// Entry point behind tools/isec_main.cpp; argv follows main() conventions.
/// Returns the process exit code (0 verified, 2 falsified with witness,
/// 1 bad input / precondition failure).
int run_cli(int argc, const char* const* argv);

/// One instance document holds the space keys ("points", "metric", ...)
/// and the quotient keys ("labels", "fiber_of", "measure"?) side by side.
/// Errors are rethrown with the file name prefixed.
FibrationPtr load_instance_file(const std::string& path);

/// {"choice": {label_key: point_id}} against an already-loaded fibration.
Section load_section_file(const FibrationPtr& fib, const std::string& path);

}  // namespace isec
