#pragma once

#include <cstdint>
#include <string>

#include "saabtk/transforms.hpp"

namespace saabtk {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int row, int col) const { return pixels[std::size_t(row) * width + col]; }

    bool operator==(const GrayImage&) const = default;
};

// Renders basis function k: unit spectral impulse on top of the bias,
// inverse transform, then linear min->0 / max->255 normalization with
// rounding half away from zero. A constant basis maps every pixel to 128.
GrayImage basis_image(const AffineOrthoKernel& kernel, int k);

// Tiles DC first, then AC in the given order, left-to-right then
// top-to-bottom with 1-pixel black separators. `top` truncates to the first
// `top` tiles (DC included); top < 0 keeps all n^2.
GrayImage basis_grid(const AffineOrthoKernel& kernel, int columns, std::span<const int> ac_order,
                     int top = -1);

// Cuts tile t back out of a grid image.
GrayImage extract_tile(const GrayImage& grid, int n, int columns, int t);

// Binary P5, maxval 255, no comments.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
void write_pgm(const GrayImage& img, const std::string& path);

}  // namespace saabtk
