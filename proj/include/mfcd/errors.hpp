#pragma once

#include <stdexcept>
#include <string>

namespace mfcd {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Two transfer functions with different sample times were combined.
struct SampleTimeMismatch : Error {
    SampleTimeMismatch(double a, double b)
        : Error("sample time mismatch: " + std::to_string(a) + " s vs " + std::to_string(b) + " s") {}
};

// A numerical procedure failed to reach its documented tolerance.
struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(what) {}
};

} // namespace mfcd
