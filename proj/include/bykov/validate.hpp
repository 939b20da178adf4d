#pragma once

// Machine-precision identities of the model, run as one pass/fail table.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bykov/model.hpp"

namespace bykov {

struct CheckResult {
    std::string name;
    double value;
    double threshold;
    /// Informational rows are reported but never fail the suite.
    bool informational = false;
    bool passed() const { return informational || value < threshold; }
};

/// Runs the invariant suite for the given (alpha, beta, omega); tau and
/// kappa are varied internally. Deterministic given seed.
std::vector<CheckResult> run_invariant_suite(double alpha, double beta, double omega,
                                             std::uint64_t seed, std::size_t samples = 10000);

/// Aligned table with one PASS/FAIL/INFO line per check.
void print_check_table(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace bykov
