#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace distgen {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : Error { using Error::Error; };
struct DegenerateGridError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct EmptyTrainingError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct NameError : Error { using Error::Error; };
struct SingleClassError : Error { using Error::Error; };
struct InfeasibleError : Error { using Error::Error; };
struct EmptyModelError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

/// Raised when an online update produces a non-finite gradient or weight.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, std::uint64_t iteration_)
        : Error(what), iteration(iteration_) {}
    std::uint64_t iteration;
};

/// Raised when the dual solver exhausts its iteration cap.
struct NonConvergenceError : Error {
    NonConvergenceError(const std::string& what, double gap_)
        : Error(what), kkt_gap(gap_) {}
    double kkt_gap;
};

} // namespace distgen
