#include "saabtk/viz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "saabtk/kernel_io.hpp"

namespace saabtk {

GrayImage basis_image(const AffineOrthoKernel& kernel, int k) {
    if (k < 0 || k >= kernel.dim) throw std::invalid_argument("basis_image: index out of range");
    CoefVector y;
    y.values = kernel.bias;
    y.values[k] += 1.0;
    const BlockVector x = inverse(kernel, y);

    const auto [lo_it, hi_it] = std::minmax_element(x.values.begin(), x.values.end());
    const double lo = *lo_it, hi = *hi_it;
    GrayImage img;
    img.width = kernel.n;
    img.height = kernel.n;
    img.pixels.resize(x.values.size());
    if (hi - lo < 1e-12) {
        std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t(128));
        return img;
    }
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const long v = std::lround((x.values[i] - lo) * scale);  // half away from zero
        img.pixels[i] = std::uint8_t(std::clamp(v, 0l, 255l));
    }
    return img;
}

GrayImage basis_grid(const AffineOrthoKernel& kernel, int columns, std::span<const int> ac_order,
                     int top) {
    if (columns < 1) throw std::invalid_argument("basis_grid: columns must be >= 1");
    if (int(ac_order.size()) != kernel.dim - 1)
        throw std::invalid_argument("basis_grid: AC order must cover indices 1 .. dim-1");

    if (top == 0) throw std::invalid_argument("basis_grid: top must be >= 1 (or < 0 for all)");
    std::vector<int> tiles;
    tiles.push_back(0);
    for (int idx : ac_order) {
        if (idx < 1 || idx >= kernel.dim)
            throw std::invalid_argument("basis_grid: AC order index out of range");
        tiles.push_back(idx);
    }
    if (top > 0) tiles.resize(std::min<std::size_t>(tiles.size(), std::size_t(top)));

    const int n = kernel.n;
    const int rows = int((tiles.size() + columns - 1) / columns);
    GrayImage grid;
    grid.width = columns * n + (columns - 1);
    grid.height = rows * n + (rows - 1);
    grid.pixels.assign(std::size_t(grid.width) * grid.height, 0);

    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const GrayImage tile = basis_image(kernel, tiles[t]);
        const int r0 = int(t) / columns * (n + 1);
        const int c0 = int(t) % columns * (n + 1);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                grid.pixels[std::size_t(r0 + y) * grid.width + (c0 + x)] = tile.at(y, x);
    }
    return grid;
}

GrayImage extract_tile(const GrayImage& grid, int n, int columns, int t) {
    const int r0 = t / columns * (n + 1);
    const int c0 = t % columns * (n + 1);
    if (r0 + n > grid.height || c0 + n > grid.width)
        throw std::invalid_argument("extract_tile: tile outside grid");
    GrayImage tile;
    tile.width = n;
    tile.height = n;
    tile.pixels.resize(std::size_t(n) * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) tile.pixels[std::size_t(y) * n + x] = grid.at(r0 + y, c0 + x);
    return tile;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

void write_pgm(const GrayImage& img, const std::string& path) {
    write_file_atomic(path, encode_pgm(img));
}

}  // namespace saabtk
