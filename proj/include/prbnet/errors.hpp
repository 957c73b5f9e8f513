#ifndef PRBNET_ERRORS_HPP
#define PRBNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace prbnet {

// Error hierarchy. Exit-code mapping lives in the CLI:
// usage -> 1, input format -> 2, config/weight validation -> 3.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error("shape error: " + msg) {}
};

struct ArgumentError : std::runtime_error {
    explicit ArgumentError(const std::string& msg) : std::runtime_error("argument error: " + msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct WeightError : std::runtime_error {
    explicit WeightError(const std::string& msg) : std::runtime_error("weight error: " + msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error("io error: " + msg) {}
};

} // namespace prbnet

#endif
