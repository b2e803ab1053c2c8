#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "saabtk/block.hpp"
#include "saabtk/transforms.hpp"

namespace saabtk {

inline constexpr int kKernelFormatVersion = 1;

// Kernel persistence: human-readable JSON with matrix rows written at 17
// significant digits, so save/load round-trips bit-exactly. Loading
// validates the format version, dimensions and row orthonormality
// (defect below 1e-6).
std::string kernel_to_text(const AnyKernel& kernel);
AnyKernel kernel_from_text(const std::string& text);
void save_kernel(const AnyKernel& kernel, const std::string& path);
AnyKernel load_kernel(const std::string& path);

// Block container: magic "SBLK", u32 version, u32 n, u64 count, then
// count * n^2 little-endian doubles.
void save_blocks(const BlockSet& blocks, const std::string& path);
BlockSet load_blocks(const std::string& path);

// Writes to a temp file in the same directory, then renames.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace saabtk
