#pragma once

#include <stdexcept>
#include <string>

namespace qpt {

// Bad user input: invalid dimensions, malformed files, out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

// Structurally inconsistent inputs: matrix shapes that do not line up,
// counts tables that do not match a frame.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure: singular or ill-conditioned frames, branch-cut or
// conditioning failures in matrix functions.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qpt
