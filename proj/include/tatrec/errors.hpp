#pragma once

#include <stdexcept>
#include <string>

namespace tatrec {

/// Validation and configuration problems map to process exit code 1;
/// numerical failures (solver stagnation, divergent iterations) map to 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tatrec
