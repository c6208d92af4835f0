#ifndef TPNR_ERRORS_HPP
#define TPNR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tpnr {

/// Parameter set violates a model invariant (n < 1, eta outside [0,1], ...).
class InvalidConfig : public std::invalid_argument {
public:
    explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

/// Mean click count has reached the array size; the estimator diverges.
class SaturatedSample : public std::runtime_error {
public:
    explicit SaturatedSample(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace tpnr

#endif
