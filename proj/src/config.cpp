#include "bykov/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace bykov {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
        throw ParseError(key + ": expected a number, got '" + v + "'", 0);
    }
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) {
        throw ParseError(key + ": expected an integer, got '" + v + "'", 0);
    }
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ParseError(key + ": expected a boolean, got '" + v + "'", 0);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        auto num = [&m](const std::string& key, auto field) {
            m[key] = [field](RunConfig& c, const std::string& k, const std::string& v) {
                field(c) = to_double(k, v);
            };
        };
        num("model.alpha", [](RunConfig& c) -> double& { return c.alpha; });
        num("model.beta", [](RunConfig& c) -> double& { return c.beta; });
        num("model.omega", [](RunConfig& c) -> double& { return c.omega; });
        num("model.tau1", [](RunConfig& c) -> double& { return c.tau1; });
        num("model.tau2", [](RunConfig& c) -> double& { return c.tau2; });
        num("model.kappa", [](RunConfig& c) -> double& { return c.kappa; });
        num("integrator.rtol", [](RunConfig& c) -> double& { return c.integrator.rtol; });
        num("integrator.atol", [](RunConfig& c) -> double& { return c.integrator.atol; });
        num("integrator.max_step", [](RunConfig& c) -> double& { return c.integrator.max_step; });
        num("integrator.t_transient",
            [](RunConfig& c) -> double& { return c.integrator.t_transient; });
        num("integrator.sample_dt", [](RunConfig& c) -> double& { return c.integrator.sample_dt; });
        m["integrator.project_to_sphere"] = [](RunConfig& c, const std::string& k,
                                               const std::string& v) {
            c.integrator.project_to_sphere = to_bool(k, v);
        };
        num("lyapunov.T", [](RunConfig& c) -> double& { return c.lyapunov.T; });
        num("lyapunov.gs_interval", [](RunConfig& c) -> double& { return c.lyapunov.gs_interval; });
        num("lyapunov.zero_tol", [](RunConfig& c) -> double& { return c.lyapunov.zero_tol; });
        num("lyapunov.convergence_tol",
            [](RunConfig& c) -> double& { return c.lyapunov.convergence_tol; });
        num("sweep.tau1_lo", [](RunConfig& c) -> double& { return c.sweep.tau1_lo; });
        num("sweep.tau1_hi", [](RunConfig& c) -> double& { return c.sweep.tau1_hi; });
        num("sweep.tau2_lo", [](RunConfig& c) -> double& { return c.sweep.tau2_lo; });
        num("sweep.tau2_hi", [](RunConfig& c) -> double& { return c.sweep.tau2_hi; });
        m["sweep.n1"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.sweep.n1 = to_int(k, v);
        };
        m["sweep.n2"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.sweep.n2 = to_int(k, v);
        };
        m["sweep.workers"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.workers = to_int(k, v);
        };
        m["sweep.x0"] = [](RunConfig& c, const std::string&, const std::string& v) {
            const auto x = parse_vector(v, 4);
            c.sweep.x0 = Vec4d(x[0], x[1], x[2], x[3]);
        };
        return m;
    }();
    return table;
}

}  // namespace

std::vector<double> parse_vector(const std::string& s, std::size_t n) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double("vector", trim(item)));
    if (n > 0 && out.size() != n) {
        throw ParseError("expected " + std::to_string(n) + " comma-separated values, got '" + s +
                             "'",
                         0);
    }
    return out;
}

ConfigEntries parse_config(std::istream& is) {
    ConfigEntries out;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "integrator" && section != "lyapunov" &&
                section != "sweep") {
                throw ParseError("unknown section [" + section + "]", lineno);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        if (section.empty()) throw ParseError("key outside of any [section]", lineno);
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!setters().contains(key)) throw ParseError("unknown key '" + key + "'", lineno);
        // Values are type-checked here so errors carry the line number.
        try {
            RunConfig scratch;
            setters().at(key)(scratch, key, value);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        out.emplace_back(key, value);
    }
    return out;
}

ConfigEntries parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config file " + path, 0);
    return parse_config(is);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void apply_config(RunConfig& cfg, const ConfigEntries& entries) {
    for (const auto& [key, value] : entries) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw ParseError("unknown key '" + key + "'", 0);
        it->second(cfg, key, value);
    }
}

}  // namespace bykov
