#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saabtk {

// A stream or accumulator held too few samples for the requested fit.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data carries no usable signal (e.g. zero AC energy).
struct DegenerateDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file or stream; offset is the byte position when known.
struct ParseError : std::runtime_error {
    static constexpr std::size_t knpos = static_cast<std::size_t>(-1);

    explicit ParseError(const std::string& what, std::size_t at = knpos)
        : std::runtime_error(at == knpos ? what : what + " (byte offset " + std::to_string(at) + ")"),
          offset(at) {}

    std::size_t offset;
};

// Kernel file load failures, distinguished so callers can react per cause.
struct KernelVersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KernelDimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KernelOrthonormalityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace saabtk
