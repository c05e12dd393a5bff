#pragma once

#include <stdexcept>
#include <string>

namespace polint {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Linear solve failed: singular matrix or residual post-check tripped.
class SingularSystem : public Error {
public:
    using Error::Error;
};

class NewtonFailure : public Error {
public:
    NewtonFailure(const std::string& what, double last_residual, int iterations)
        : Error(what), last_residual_(last_residual), iterations_(iterations) {}
    double last_residual() const { return last_residual_; }
    int iterations() const { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

}  // namespace polint
