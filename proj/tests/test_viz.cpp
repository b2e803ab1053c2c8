#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "saabtk/residuals.hpp"
#include "saabtk/viz.hpp"

using namespace saabtk;

namespace {

std::vector<int> native_order(int dim) {
    std::vector<int> order(dim - 1);
    std::iota(order.begin(), order.end(), 1);
    return order;
}

}  // namespace

TEST_CASE("basis_image: DC tile renders all 128") {
    for (int n : {2, 4, 8}) {
        const GrayImage img = basis_image(dct_kernel(n), 0);
        CHECK(img.width == n);
        CHECK(img.height == n);
        for (auto p : img.pixels) CHECK(int(p) == 128);
    }
    BlockSet train = synth_ar1(0.9, 1.0, 4, 2000, 3);
    const AffineOrthoKernel saab = saab_fit_multistage(train, StagePlan{{4}});
    const GrayImage img = basis_image(saab, 0);
    for (auto p : img.pixels) CHECK(int(p) == 128);
}

TEST_CASE("basis_image: DCT frequency (0,1) rows identical, edges at 255 and 0") {
    const AffineOrthoKernel k = dct_kernel(4);
    const GrayImage img = basis_image(k, 1);  // frequency pair (0,1) at index 0*4+1
    for (int y = 1; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(img.at(y, x) == img.at(0, x));
    CHECK(int(img.at(0, 0)) == 255);
    CHECK(int(img.at(0, 3)) == 0);
}

TEST_CASE("basis_image: invariant to scaling the basis row") {
    AffineOrthoKernel k = dct_kernel(4);
    const GrayImage a = basis_image(k, 5);
    // scale row 5 by 3: same rendering after min/max normalization
    for (int j = 0; j < k.dim; ++j) k.matrix[std::size_t(5) * k.dim + j] *= 3.0;
    const GrayImage b = basis_image(k, 5);
    CHECK(a == b);

    CHECK_THROWS_AS(basis_image(k, 16), std::invalid_argument);
    CHECK_THROWS_AS(basis_image(k, -1), std::invalid_argument);
}

TEST_CASE("basis_image: every AC tile touches 0 and 255") {
    BlockSet train = synth_ar1(0.95, 1.0, 4, 3000, 7);
    for (const auto& k :
         {dct_kernel(4), saab_fit_multistage(train, StagePlan{{4}}),
          saab_fit_multistage(train, StagePlan{{2, 2}})}) {
        for (int idx = 1; idx < k.dim; ++idx) {
            const GrayImage img = basis_image(k, idx);
            const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
            CHECK(int(*lo) == 0);
            CHECK(int(*hi) == 255);
        }
    }
}

TEST_CASE("basis_grid: layout arithmetic and first tile") {
    const AffineOrthoKernel k = dct_kernel(4);
    const GrayImage grid = basis_grid(k, 8, native_order(16));
    CHECK(grid.width == 39);   // 8*4 + 7
    CHECK(grid.height == 9);   // 2*4 + 1
    CHECK(extract_tile(grid, 4, 8, 0) == basis_image(k, 0));

    // separators are black
    for (int y = 0; y < grid.height; ++y) CHECK(int(grid.at(y, 4)) == 0);
    for (int x = 0; x < grid.width; ++x) CHECK(int(grid.at(4, x)) == 0);
}

TEST_CASE("basis_grid: slicing reproduces every ordered tile") {
    BlockSet train = synth_ar1(0.9, 1.0, 4, 3000, 11);
    const AffineOrthoKernel k = saab_fit_multistage(train, StagePlan{{2, 2}});
    std::vector<int> order = native_order(16);
    std::reverse(order.begin(), order.end());
    const GrayImage grid = basis_grid(k, 5, order);
    CHECK(extract_tile(grid, 4, 5, 0) == basis_image(k, 0));
    for (std::size_t t = 0; t < order.size(); ++t)
        CHECK(extract_tile(grid, 4, 5, int(t) + 1) == basis_image(k, order[t]));
}

TEST_CASE("basis_grid: truncation to top T tiles") {
    const AffineOrthoKernel k = dct_kernel(16);
    const GrayImage grid = basis_grid(k, 10, native_order(256), 80);
    CHECK(grid.width == 10 * 16 + 9);
    CHECK(grid.height == 8 * 16 + 7);  // ceil(80/10) rows
}

TEST_CASE("basis_grid: deterministic bytes") {
    BlockSet train = synth_ar1(0.9, 1.0, 4, 2000, 13);
    const AffineOrthoKernel k = saab_fit_multistage(train, StagePlan{{4}});
    const auto a = encode_pgm(basis_grid(k, 4, native_order(16)));
    const auto b = encode_pgm(basis_grid(k, 4, native_order(16)));
    CHECK(a == b);
}

TEST_CASE("encode_pgm: header and payload") {
    GrayImage img;
    img.width = 3;
    img.height = 2;
    img.pixels = {0, 10, 20, 30, 40, 255};
    const auto bytes = encode_pgm(img);
    const std::string header(bytes.begin(), bytes.begin() + 9);
    CHECK(header == "P5\n3 2\n25");  // "P5\n3 2\n255\n" prefix
    CHECK(bytes.size() == 11 + 6);
    CHECK(bytes.back() == 255);
    // emitted PGM parses back to the same samples
    const Plane p = parse_pgm(bytes);
    CHECK(p.width == 3);
    CHECK(p.height == 2);
    CHECK(p.samples[5] == doctest::Approx(1.0));
}
