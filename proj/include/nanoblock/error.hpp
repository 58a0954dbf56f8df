#pragma once

#include <stdexcept>
#include <string>

namespace nanoblock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A geometry or profile cannot be resolved (too few samples, bad fields).
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// The mechanical mode has zero frequency, so no quantization exists.
class DegenerateModeError : public Error {
public:
    using Error::Error;
};

/// The Liouvillian has more than one stationary state.
class MultiplicityError : public Error {
public:
    using Error::Error;
};

/// A state violates a density-matrix invariant beyond tolerance.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// g2 is 0/0 because the mode is (numerically) empty.
class UndefinedCorrelationError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or sweep specification.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File-system failure, always carrying the offending path.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace nanoblock
