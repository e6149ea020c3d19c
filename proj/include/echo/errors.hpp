#pragma once

#include <stdexcept>
#include <string>

namespace echo {

/// Bad or unusable input data (empty networks, malformed records, unknown
/// nodes). Maps to CLI exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver did not reach its tolerance within the iteration
/// budget. Carries the residual it got stuck at. Maps to CLI exit code 2.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace echo
