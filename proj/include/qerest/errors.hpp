#pragma once

#include <stdexcept>
#include <string>

namespace qerest {

/// Invalid or inconsistent configuration (bad symbol, grid too coarse, schema violation).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation hit a hard resource limit (e.g. the bounce cap of the billiard flow).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown with a diagnostic message.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cached data failed an integrity check.
class CacheCorruptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qerest
