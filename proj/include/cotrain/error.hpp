#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cotrain {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters, dimensions or options.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// An operation was called in the wrong lifecycle state (e.g. backward twice).
class StateError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A loss became non-finite during training.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch, long iteration)
        : Error(what), epoch_(epoch), iteration_(iteration) {}

    int epoch() const noexcept { return epoch_; }
    long iteration() const noexcept { return iteration_; }

private:
    int epoch_;
    long iteration_;
};

}  // namespace cotrain
