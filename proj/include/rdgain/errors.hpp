#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdgain {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, mismatched grids, malformed configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed at runtime (singular pivot, divergence, blow-up).
class NumericalError : public Error {
public:
    using Error::Error;
};

class PivotError : public NumericalError {
public:
    PivotError(std::size_t index, const std::string& what)
        : NumericalError(what), index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(int iterations, double last_increment, const std::string& what)
        : NumericalError(what), iterations_(iterations), last_increment_(last_increment) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double last_increment() const noexcept { return last_increment_; }

private:
    int iterations_;
    double last_increment_;
};

}  // namespace rdgain
