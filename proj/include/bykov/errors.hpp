#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bykov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A ModelParams/config value violates its documented constraints.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The SO(2) quotient system was requested with tau2 != 0.
class QuotientInvalid : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a closed-form function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive step size fell below the floating-point resolution of t.
class IntegrationStalled : public Error {
public:
    IntegrationStalled(const std::string& what, double t, std::vector<double> last_state)
        : Error(what), t_(t), state_(std::move(last_state)) {}
    double time() const noexcept { return t_; }
    const std::vector<double>& last_good_state() const noexcept { return state_; }

private:
    double t_;
    std::vector<double> state_;
};

/// A NaN/Inf appeared in the integrated state.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, double t) : Error(what), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

class Unconverged : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NoCycleFound : public Error {
public:
    using Error::Error;
};

/// Malformed CSV/config input; line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace bykov
