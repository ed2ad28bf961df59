#pragma once

#include <string>
#include <vector>

#include "simlmc/config.hpp"

namespace simlmc::validation {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast invariant checks for a configuration: mesh nesting, dispersion round
/// trip, SPD sampling, patch test, exhaustive-enumeration checks of the
/// variance estimators and KLE orthonormality. Each check catches its own
/// errors and reports them as failures. The config must already be valid.
std::vector<CheckResult> run_checks(const config::ExperimentConfig& config);

}  // namespace simlmc::validation
