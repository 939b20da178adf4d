#pragma once

// Run configuration: defaults, then `key = value` config files, then flags.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bykov/integrate.hpp"
#include "bykov/lyapunov.hpp"
#include "bykov/sweep.hpp"

namespace bykov {

struct RunConfig {
    double alpha = 1.0, beta = -0.1, omega = 1.0;
    double tau1 = 0.0, tau2 = 0.0, kappa = 0.0;
    IntegratorConfig integrator;
    LyapunovSettings lyapunov;
    SweepSpec sweep;
    int workers = 1;

    ModelParams params() const { return {alpha, beta, omega, tau1, tau2, kappa}; }
};

/// Settings keyed "section.key", in file order of appearance.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses UTF-8 text of `[section]` headers and `key = value` lines.
/// `#` and `;` start comments. Throws ParseError with the offending line.
ConfigEntries parse_config(std::istream& is);
ConfigEntries parse_config_file(const std::string& path);

/// Every accepted "section.key".
const std::vector<std::string>& config_keys();

/// Applies entries in order. Unknown keys and unparsable values are ParseErrors.
void apply_config(RunConfig& cfg, const ConfigEntries& entries);

/// "a,b,c" -> doubles; throws ParseError unless exactly `n` finite values (n > 0).
std::vector<double> parse_vector(const std::string& s, std::size_t n = 0);

}  // namespace bykov
