#pragma once

#include <stdexcept>
#include <string>

namespace ganids {

// Bad or missing input data (unparseable file, unmapped label, empty class, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure during training or evaluation (non-finite loss, shape mismatch).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or unusable option combination.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ganids
