#pragma once

#include <stdexcept>
#include <string>

namespace quakeinv {

/// Bad configuration: unparseable files, dangling cross-references,
/// missing required fields. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A query or sample outside the domain an operation is defined on
/// (e.g. a fault-geometry lookup outside the tabulated region).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A rupture whose computed depth is not positive: the sample is
/// geophysically impossible and carries zero likelihood.
class InvalidDepthError : public DomainError {
public:
    explicit InvalidDepthError(const std::string& msg) : DomainError(msg) {}
};

/// Numerical breakdown (solver instability, non-finite field values).
/// CLI exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem trouble reading or writing scenario artifacts. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace quakeinv
