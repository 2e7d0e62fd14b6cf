#pragma once

#include <stdexcept>
#include <string>

namespace fmpinn {

/// Bad user input: malformed config files, inconsistent shapes, unknown names.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Hard numeric failure: overflow to non-finite, division by zero, log of a
/// non-positive value, solver breakdown. Carries optional context (training
/// epoch, network layer) so aborts are attributable.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, long long epoch = -1, int layer = -1)
        : std::runtime_error(what), epoch(epoch), layer(layer) {}
    long long epoch;
    int layer;
};

}  // namespace fmpinn
