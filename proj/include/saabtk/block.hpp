#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace saabtk {

enum class PredMode { Planar, Dc, Horizontal, Vertical, SynthAr1 };
enum class Channel { Y, Cb, Cr, Gray };

const char* to_string(PredMode mode);
const char* to_string(Channel channel);
std::optional<PredMode> pred_mode_from_string(std::string_view text);
std::optional<Channel> channel_from_string(std::string_view text);

bool supported_block_side(int n);  // 2, 4, 8 or 16

// An n x n residual block flattened row-major:
// (x00, x01, ..., x0,n-1, x10, ...).
struct BlockVector {
    int n = 0;
    std::vector<double> values;
};

// Transform output; index 0 is the DC (or mean-direction) coefficient.
struct CoefVector {
    std::vector<double> values;

    int dim() const { return int(values.size()); }
};

// Saab stage list: subblock side per stage, first stage innermost.
// The product of the sides equals the block side.
struct StagePlan {
    std::vector<int> stages;

    int block_side() const;
    bool single_stage() const { return stages.size() == 1; }
    bool valid() const;

    // Label form without commas, e.g. "4", "2+2", "4+2".
    std::string label() const;
    // CLI form: comma-separated stage tokens, each "s" or "sxs",
    // e.g. "4", "2x2,2x2", "4,2".
    static StagePlan parse(std::string_view text);
    // The fitted configurations: (4),(2,2),(8),(2,4),(4,2),(16),(4,4).
    bool supported_saab() const;
};

// A labeled set of equally sized blocks stored contiguously.
struct BlockSet {
    int n = 0;
    std::optional<PredMode> mode;
    Channel channel = Channel::Gray;
    std::string provenance;
    std::uint64_t seed = 0;
    std::vector<double> data;  // count * n * n values

    std::size_t count() const {
        return n == 0 ? 0 : data.size() / (std::size_t(n) * n);
    }
    std::span<const double> block(std::size_t i) const {
        const std::size_t d = std::size_t(n) * n;
        return {data.data() + i * d, d};
    }
    BlockVector block_vector(std::size_t i) const {
        const auto b = block(i);
        return {n, {b.begin(), b.end()}};
    }
};

}  // namespace saabtk
