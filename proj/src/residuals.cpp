#include "saabtk/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "saabtk/errors.hpp"
#include "saabtk/linalg.hpp"

namespace saabtk {

namespace {

struct ByteReader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    std::uint8_t peek() const { return bytes[pos]; }
    std::uint8_t take() { return bytes[pos++]; }
};

bool is_pnm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void skip_pnm_space(ByteReader& r) {
    while (!r.eof()) {
        if (is_pnm_space(r.peek())) {
            r.take();
        } else if (r.peek() == '#') {
            while (!r.eof() && r.take() != '\n') {
            }
        } else {
            break;
        }
    }
}

int read_pnm_int(ByteReader& r, const char* what) {
    skip_pnm_space(r);
    if (r.eof() || r.peek() < '0' || r.peek() > '9')
        throw ParseError(std::string("PGM: expected ") + what, r.pos);
    long v = 0;
    while (!r.eof() && r.peek() >= '0' && r.peek() <= '9') {
        v = v * 10 + (r.take() - '0');
        if (v > 1'000'000'000) throw ParseError(std::string("PGM: ") + what + " out of range", r.pos);
    }
    return int(v);
}

}  // namespace

Plane parse_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw ParseError("PGM: bad magic", 0);
    if (bytes[1] != '5')
        throw ParseError(std::string("PGM: unsupported variant P") + char(bytes[1]) +
                             " (binary P5 only)",
                         1);
    ByteReader r{bytes, 2};
    const int width = read_pnm_int(r, "width");
    const int height = read_pnm_int(r, "height");
    const int maxval = read_pnm_int(r, "maxval");
    if (width < 1 || height < 1) throw ParseError("PGM: non-positive dimensions", r.pos);
    if (maxval < 1 || maxval > 255) throw ParseError("PGM: only 8-bit maxval supported", r.pos);
    if (r.eof() || !is_pnm_space(r.peek())) throw ParseError("PGM: missing header terminator", r.pos);
    r.take();
    const std::size_t need = std::size_t(width) * height;
    if (bytes.size() - r.pos < need) throw ParseError("PGM: truncated pixel data", bytes.size());

    Plane p;
    p.width = width;
    p.height = height;
    p.channel = Channel::Gray;
    p.samples.resize(need);
    const double inv = 1.0 / maxval;
    for (std::size_t i = 0; i < need; ++i) p.samples[i] = bytes[r.pos + i] * inv;
    return p;
}

namespace {

enum class ChromaLayout { C420, C444 };

}  // namespace

Plane parse_y4m(std::span<const std::uint8_t> bytes, int frame, Channel channel) {
    static const char magic[] = "YUV4MPEG2";
    if (bytes.size() < 9 || std::memcmp(bytes.data(), magic, 9) != 0)
        throw ParseError("Y4M: bad magic", 0);
    if (channel == Channel::Gray)
        throw std::invalid_argument("Y4M: channel must be y, cb or cr");
    if (frame < 0) throw std::out_of_range("Y4M: negative frame index");

    std::size_t pos = 9;
    std::size_t eol = pos;
    while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
    if (eol == bytes.size()) throw ParseError("Y4M: unterminated stream header", pos);
    const std::string header(reinterpret_cast<const char*>(bytes.data()) + pos, eol - pos);

    int width = 0, height = 0;
    ChromaLayout layout = ChromaLayout::C420;  // Y4M default
    std::size_t t = 0;
    while (t < header.size()) {
        while (t < header.size() && header[t] == ' ') ++t;
        std::size_t end = header.find(' ', t);
        if (end == std::string::npos) end = header.size();
        const std::string tag = header.substr(t, end - t);
        t = end;
        if (tag.empty()) continue;
        switch (tag[0]) {
            case 'W': width = std::atoi(tag.c_str() + 1); break;
            case 'H': height = std::atoi(tag.c_str() + 1); break;
            case 'C':
                if (tag.compare(0, 4, "C420") == 0) {
                    layout = ChromaLayout::C420;
                } else if (tag == "C444") {
                    layout = ChromaLayout::C444;
                } else {
                    throw ParseError("Y4M: unsupported colorspace " + tag, pos);
                }
                break;
            default: break;  // frame rate / aspect / interlace tags ignored
        }
    }
    if (width < 1 || height < 1) throw ParseError("Y4M: missing W or H tag", pos);
    if (layout == ChromaLayout::C420 && (width % 2 || height % 2))
        throw ParseError("Y4M: C420 requires even dimensions", pos);

    const std::size_t ysize = std::size_t(width) * height;
    const int cw = layout == ChromaLayout::C420 ? width / 2 : width;
    const int ch = layout == ChromaLayout::C420 ? height / 2 : height;
    const std::size_t csize = std::size_t(cw) * ch;

    pos = eol + 1;
    for (int f = 0;; ++f) {
        if (pos >= bytes.size())
            throw std::out_of_range("Y4M: frame index " + std::to_string(frame) +
                                    " out of range (stream has " + std::to_string(f) + ")");
        if (bytes.size() - pos < 5 || std::memcmp(bytes.data() + pos, "FRAME", 5) != 0)
            throw ParseError("Y4M: expected FRAME marker", pos);
        std::size_t fe = pos + 5;
        while (fe < bytes.size() && bytes[fe] != '\n') ++fe;
        if (fe == bytes.size()) throw ParseError("Y4M: unterminated FRAME header", pos);
        pos = fe + 1;
        if (bytes.size() - pos < ysize + 2 * csize)
            throw ParseError("Y4M: truncated frame payload", bytes.size());
        if (f == frame) {
            std::size_t off = pos;
            int pw = width, ph = height;
            if (channel == Channel::Cb) {
                off += ysize;
                pw = cw;
                ph = ch;
            } else if (channel == Channel::Cr) {
                off += ysize + csize;
                pw = cw;
                ph = ch;
            }
            Plane p;
            p.width = pw;
            p.height = ph;
            p.channel = channel;
            p.samples.resize(std::size_t(pw) * ph);
            for (std::size_t i = 0; i < p.samples.size(); ++i)
                p.samples[i] = bytes[off + i] / 255.0;
            return p;
        }
        pos += ysize + 2 * csize;
    }
}

Plane load_plane(const std::string& path, PlaneFormat format, int frame, Channel channel) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (format == PlaneFormat::Pgm) {
        if (frame != 0) throw std::out_of_range("PGM holds a single frame (frame 0)");
        return parse_pgm(bytes);
    }
    return parse_y4m(bytes, frame, channel);
}

BlockVector intra_predict(const Plane& plane, int row, int col, int n, PredMode mode) {
    if (mode == PredMode::SynthAr1)
        throw std::invalid_argument("intra_predict: synth_ar1 is not a prediction mode");
    if (n < 1) throw std::invalid_argument("intra_predict: block side must be positive");
    if (row < 1 || col < 1 || row + n > plane.height || col + n > plane.width)
        throw std::out_of_range("intra_predict: block or reference border outside plane");

    std::vector<double> top(n), left(n);
    for (int x = 0; x < n; ++x) top[x] = plane.at(row - 1, col + x);
    for (int y = 0; y < n; ++y) left[y] = plane.at(row + y, col - 1);

    BlockVector out;
    out.n = n;
    out.values.resize(std::size_t(n) * n);
    switch (mode) {
        case PredMode::Dc: {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += top[i] + left[i];
            const double dc = s / (2.0 * n);
            std::fill(out.values.begin(), out.values.end(), dc);
            break;
        }
        case PredMode::Horizontal:
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) out.values[std::size_t(y) * n + x] = left[y];
            break;
        case PredMode::Vertical:
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) out.values[std::size_t(y) * n + x] = top[x];
            break;
        case PredMode::Planar: {
            // top-right and bottom-left references, edge-extended when the
            // block touches the right or bottom plane border
            const double tr = plane.at(row - 1, std::min(col + n, plane.width - 1));
            const double bl = plane.at(std::min(row + n, plane.height - 1), col - 1);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    out.values[std::size_t(y) * n + x] =
                        ((n - 1 - x) * left[y] + (x + 1) * tr + (n - 1 - y) * top[x] +
                         (y + 1) * bl) /
                        (2.0 * n);
            break;
        }
        case PredMode::SynthAr1: break;  // unreachable
    }
    return out;
}

BlockSet extract_residuals(const Plane& plane, int n, PredMode mode) {
    if (mode == PredMode::SynthAr1)
        throw std::invalid_argument("extract_residuals: synth_ar1 is not a prediction mode");
    if (n < 1) throw std::invalid_argument("extract_residuals: block side must be positive");
    if (plane.width < n + 1 || plane.height < n + 1)
        throw std::out_of_range("extract_residuals: plane smaller than (n+1) x (n+1)");

    const int rows = (plane.height - 1) / n;
    const int cols = (plane.width - 1) / n;
    BlockSet set;
    set.n = n;
    set.mode = mode;
    set.channel = plane.channel;
    set.provenance = std::string("intra-") + to_string(mode) + " " + to_string(plane.channel) +
                     " " + std::to_string(plane.width) + "x" + std::to_string(plane.height);
    set.data.reserve(std::size_t(rows) * cols * n * n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const int r0 = 1 + i * n;
            const int c0 = 1 + j * n;
            const BlockVector pred = intra_predict(plane, r0, c0, n, mode);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    set.data.push_back(plane.at(r0 + y, c0 + x) -
                                       pred.values[std::size_t(y) * n + x]);
        }
    return set;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-block substream: engine state derived from (seed, block index).
std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= block * 0xD1B54A32D192ED03ull;
    return std::mt19937_64(splitmix64(s));
}

// Box-Muller on explicit 53-bit uniforms; avoids the implementation-defined
// std::normal_distribution so streams reproduce bit-exactly per seed.
struct NormalSource {
    std::mt19937_64& eng;
    double cached = 0.0;
    bool have = false;

    double next() {
        if (have) {
            have = false;
            return cached;
        }
        const double u1 = 1.0 - double(eng() >> 11) * 0x1.0p-53;  // (0, 1]
        const double u2 = double(eng() >> 11) * 0x1.0p-53;        // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached = r * std::sin(a);
        have = true;
        return r * std::cos(a);
    }
};

}  // namespace

BlockSet synth_ar1(double rho, double sigma, int n, std::size_t count, std::uint64_t seed) {
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("synth_ar1: rho must be in [0, 1)");
    if (!std::isfinite(sigma) || sigma <= 0.0)
        throw std::invalid_argument("synth_ar1: sigma must be positive");
    if (count < 1) throw std::invalid_argument("synth_ar1: count must be >= 1");
    if (!supported_block_side(n)) throw std::invalid_argument("synth_ar1: unsupported block side");

    // symmetric square root of the 1D AR(1) covariance rho^|i-j|
    SymMatrix r1(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) r1.set(i, j, std::pow(rho, j - i));
    const EigDecomposition eig = eig_sym(r1);
    std::vector<double> a(std::size_t(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double s = std::sqrt(std::max(eig.eigenvalues[k], 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[std::size_t(i) * n + j] += s * eig.vec(i, k) * eig.vec(j, k);
    }

    BlockSet set;
    set.n = n;
    set.mode = PredMode::SynthAr1;
    set.channel = Channel::Gray;
    set.seed = seed;
    set.provenance = "ar1 rho=" + std::to_string(rho) + " sigma=" + std::to_string(sigma) +
                     " seed=" + std::to_string(seed);
    set.data.resize(count * std::size_t(n) * n);

    std::vector<double> g(std::size_t(n) * n), t(std::size_t(n) * n);
    for (std::size_t b = 0; b < count; ++b) {
        std::mt19937_64 eng = block_engine(seed, b);
        NormalSource normals{eng};
        for (auto& v : g) v = sigma * normals.next();
        // X = A G A^T
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += a[std::size_t(i) * n + k] * g[std::size_t(k) * n + j];
                t[std::size_t(i) * n + j] = s;
            }
        double* out = set.data.data() + b * std::size_t(n) * n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += t[std::size_t(i) * n + k] * a[std::size_t(j) * n + k];
                out[std::size_t(i) * n + j] = s;
            }
    }
    return set;
}

}  // namespace saabtk
