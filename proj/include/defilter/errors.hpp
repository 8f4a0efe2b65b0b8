#pragma once

#include <stdexcept>
#include <string>

namespace defilter {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two images with mismatched height/width/channels were combined.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter violates its documented precondition.
class ParamError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written, or decoded.
class IoError : public Error {
public:
    using Error::Error;
};

/// A filter evaluation failed (external command failure, bad output, ...).
class FilterError : public Error {
public:
    explicit FilterError(const std::string& msg, std::string stderr_output = {})
        : Error(msg), stderr_output_(std::move(stderr_output)) {}

    const std::string& stderr_output() const { return stderr_output_; }

private:
    std::string stderr_output_;
};

/// Dense linear algebra failed to converge.
class NumericsError : public Error {
public:
    using Error::Error;
};

}  // namespace defilter
