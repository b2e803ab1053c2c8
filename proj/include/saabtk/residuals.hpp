#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "saabtk/block.hpp"

namespace saabtk {

// Image or video plane with samples normalized to [0, 1].
struct Plane {
    int width = 0;
    int height = 0;
    Channel channel = Channel::Gray;
    std::vector<double> samples;  // row-major

    double at(int row, int col) const { return samples[std::size_t(row) * width + col]; }
};

enum class PlaneFormat { Pgm, Y4m };

// Binary P5 PGM, 8-bit, comment lines tolerated in the header.
Plane parse_pgm(std::span<const std::uint8_t> bytes);

// YUV4MPEG2 stream, 8-bit C420 or C444; returns the requested channel plane
// of the requested frame at its native resolution.
Plane parse_y4m(std::span<const std::uint8_t> bytes, int frame, Channel channel);

Plane load_plane(const std::string& path, PlaneFormat format, int frame, Channel channel);

// Simplified HEVC-style predictors from the one-sample top/left border.
// Planar additionally reads the top-right and bottom-left references,
// clamped to the plane edge when outside.
BlockVector intra_predict(const Plane& plane, int row, int col, int n, PredMode mode);

// Tiles the plane into non-overlapping n x n blocks on a grid starting at
// (1,1) and returns original minus prediction, predicting from original
// (open-loop) neighbors.
BlockSet extract_residuals(const Plane& plane, int n, PredMode mode);

// Zero-mean Gaussian blocks with separable covariance
// sigma^2 * rho^|i-k| * rho^|j-l|, via the symmetric square root of the 1D
// AR(1) covariance applied along rows then columns. Deterministic per seed.
BlockSet synth_ar1(double rho, double sigma, int n, std::size_t count, std::uint64_t seed);

}  // namespace saabtk
