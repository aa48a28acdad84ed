#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bsch {

// Base for every error raised by the library; callers that do not care about
// the category can catch this alone.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class ConformityError : public Error {
public:
    using Error::Error;
};

class MeanError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& reason)
        : Error(pointer + ": " + reason), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class PotentialDomainError : public Error {
public:
    using Error::Error;
};

// Newton failure; carries the residual norm after each iteration.
class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace bsch
