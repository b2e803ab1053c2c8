#include "saabtk/block.hpp"

#include <charconv>
#include <stdexcept>

namespace saabtk {

const char* to_string(PredMode mode) {
    switch (mode) {
        case PredMode::Planar: return "planar";
        case PredMode::Dc: return "dc";
        case PredMode::Horizontal: return "horizontal";
        case PredMode::Vertical: return "vertical";
        case PredMode::SynthAr1: return "synth_ar1";
    }
    return "?";
}

const char* to_string(Channel channel) {
    switch (channel) {
        case Channel::Y: return "y";
        case Channel::Cb: return "cb";
        case Channel::Cr: return "cr";
        case Channel::Gray: return "gray";
    }
    return "?";
}

std::optional<PredMode> pred_mode_from_string(std::string_view text) {
    if (text == "planar") return PredMode::Planar;
    if (text == "dc") return PredMode::Dc;
    if (text == "horizontal") return PredMode::Horizontal;
    if (text == "vertical") return PredMode::Vertical;
    if (text == "synth_ar1") return PredMode::SynthAr1;
    return std::nullopt;
}

std::optional<Channel> channel_from_string(std::string_view text) {
    if (text == "y") return Channel::Y;
    if (text == "cb") return Channel::Cb;
    if (text == "cr") return Channel::Cr;
    if (text == "gray") return Channel::Gray;
    return std::nullopt;
}

bool supported_block_side(int n) { return n == 2 || n == 4 || n == 8 || n == 16; }

int StagePlan::block_side() const {
    int p = 1;
    for (int s : stages) p *= s;
    return p;
}

bool StagePlan::valid() const {
    if (stages.empty()) return false;
    for (int s : stages)
        if (!supported_block_side(s)) return false;
    return supported_block_side(block_side());
}

std::string StagePlan::label() const {
    std::string out;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i) out += '+';
        out += std::to_string(stages[i]);
    }
    return out;
}

namespace {

int parse_stage_token(std::string_view tok) {
    const auto parse_int = [](std::string_view s) -> int {
        int v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw std::invalid_argument("plan: bad stage token");
        return v;
    };
    const auto x = tok.find('x');
    if (x == std::string_view::npos) return parse_int(tok);
    const int a = parse_int(tok.substr(0, x));
    const int b = parse_int(tok.substr(x + 1));
    if (a != b) throw std::invalid_argument("plan: stage subblocks must be square (got " +
                                            std::string(tok) + ")");
    return a;
}

}  // namespace

StagePlan StagePlan::parse(std::string_view text) {
    StagePlan plan;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto tok = text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                                            : comma - start);
        if (tok.empty()) throw std::invalid_argument("plan: empty stage token");
        plan.stages.push_back(parse_stage_token(tok));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (!plan.valid())
        throw std::invalid_argument("plan: stages must be from {2,4,8,16} with a supported product");
    return plan;
}

bool StagePlan::supported_saab() const {
    static const std::vector<std::vector<int>> known = {
        {4}, {2, 2}, {8}, {2, 4}, {4, 2}, {16}, {4, 4},
    };
    for (const auto& k : known)
        if (stages == k) return true;
    return false;
}

}  // namespace saabtk
