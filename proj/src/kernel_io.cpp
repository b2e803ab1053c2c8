#include "saabtk/kernel_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "saabtk/errors.hpp"

namespace saabtk {

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void append_array(std::string& out, std::span<const double> values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        append_double(out, values[i]);
    }
    out += ']';
}

void append_matrix(std::string& out, std::span<const double> m, int rows, int cols,
                   const char* indent) {
    out += "[\n";
    for (int r = 0; r < rows; ++r) {
        out += indent;
        append_array(out, m.subspan(std::size_t(r) * cols, cols));
        if (r + 1 < rows) out += ',';
        out += '\n';
    }
    out += "  ]";
}

std::string escape_json(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void append_meta(std::string& out, const KernelMeta& meta) {
    out += "  \"metadata\": {\"sample_count\": " + std::to_string(meta.sample_count);
    out += ", \"source\": \"" + escape_json(meta.source) + "\"";
    out += ", \"seed\": " + std::to_string(meta.seed);
    out += ", \"epsilon\": ";
    append_double(out, meta.epsilon);
    out += ", \"delta_m\": " + std::to_string(meta.delta_m);
    out += ", \"scale\": ";
    append_double(out, meta.scale);
    out += "}\n";
}

KernelMeta meta_from_json(const nlohmann::json& j) {
    KernelMeta meta;
    if (!j.contains("metadata")) return meta;
    const auto& m = j.at("metadata");
    meta.sample_count = m.value("sample_count", std::uint64_t(0));
    meta.source = m.value("source", std::string());
    meta.seed = m.value("seed", std::uint64_t(0));
    meta.epsilon = m.value("epsilon", 0.0);
    meta.delta_m = m.value("delta_m", std::uint64_t(0));
    meta.scale = m.value("scale", 1.0);
    return meta;
}

std::vector<double> matrix_from_json(const nlohmann::json& rows, int expect_rows, int cols,
                                     const char* what) {
    if (!rows.is_array() || int(rows.size()) != expect_rows)
        throw KernelDimensionError(std::string("kernel file: ") + what + " row count mismatch");
    std::vector<double> out;
    out.reserve(std::size_t(expect_rows) * cols);
    for (const auto& row : rows) {
        if (!row.is_array() || int(row.size()) != cols)
            throw KernelDimensionError(std::string("kernel file: ") + what + " row length mismatch");
        for (const auto& v : row) {
            const double d = v.get<double>();
            if (!std::isfinite(d))
                throw KernelDimensionError(std::string("kernel file: non-finite value in ") + what);
            out.push_back(d);
        }
    }
    return out;
}

std::vector<double> vector_from_json(const nlohmann::json& arr, int expect, const char* what) {
    if (!arr.is_array() || int(arr.size()) != expect)
        throw KernelDimensionError(std::string("kernel file: ") + what + " length mismatch");
    std::vector<double> out;
    out.reserve(expect);
    for (const auto& v : arr) {
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw KernelDimensionError(std::string("kernel file: non-finite value in ") + what);
        out.push_back(d);
    }
    return out;
}

void check_orthonormal(std::span<const double> matrix, int rows, int dim) {
    const double defect = orthonormality_defect(matrix, rows, dim);
    if (!(defect < 1e-6))
        throw KernelOrthonormalityError("kernel file: basis rows fail the orthonormality guard");
}

}  // namespace

std::string kernel_to_text(const AnyKernel& kernel) {
    std::string out = "{\n";
    out += "  \"format_version\": " + std::to_string(kKernelFormatVersion) + ",\n";
    if (const auto* k = std::get_if<AffineOrthoKernel>(&kernel)) {
        out += std::string("  \"kind\": \"") + (k->kind == KernelKind::Dct ? "dct" : "saab") +
               "\",\n";
        out += "  \"n\": " + std::to_string(k->n) + ",\n";
        out += "  \"plan\": [";
        for (std::size_t i = 0; i < k->plan.stages.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(k->plan.stages[i]);
        }
        out += "],\n";
        out += "  \"bias\": ";
        append_array(out, k->bias);
        out += ",\n  \"energies\": ";
        append_array(out, k->energies);
        out += ",\n  \"matrix\": ";
        append_matrix(out, k->matrix, k->dim, k->dim, "    ");
        out += ",\n";
        append_meta(out, k->meta);
    } else {
        const auto& kk = std::get<KltKernel>(kernel);
        out += "  \"kind\": \"klt\",\n";
        out += "  \"n\": " + std::to_string(kk.n) + ",\n";
        out += "  \"mean\": ";
        append_array(out, kk.mean);
        out += ",\n  \"energies\": ";
        append_array(out, kk.eigenvalues);
        out += ",\n  \"matrix\": ";
        append_matrix(out, kk.basis, kk.dim - 1, kk.dim, "    ");
        out += ",\n";
        append_meta(out, kk.meta);
    }
    out += "}\n";
    return out;
}

AnyKernel kernel_from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("kernel file: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kKernelFormatVersion)
            throw KernelVersionError("kernel file: unsupported format_version " +
                                     std::to_string(version));
        const std::string kind = j.at("kind").get<std::string>();
        const int n = j.at("n").get<int>();
        if (n < 2 || n > 64) throw KernelDimensionError("kernel file: bad block side");
        const int dim = n * n;
        if (kind == "klt") {
            KltKernel k;
            k.n = n;
            k.dim = dim;
            k.mean = vector_from_json(j.at("mean"), dim, "mean");
            k.eigenvalues = vector_from_json(j.at("energies"), dim - 1, "energies");
            k.basis = matrix_from_json(j.at("matrix"), dim - 1, dim, "matrix");
            k.meta = meta_from_json(j);
            check_orthonormal(k.basis, dim - 1, dim);
            return k;
        }
        if (kind != "dct" && kind != "saab")
            throw ParseError("kernel file: unknown kind '" + kind + "'");
        AffineOrthoKernel k;
        k.n = n;
        k.dim = dim;
        k.kind = kind == "dct" ? KernelKind::Dct : KernelKind::Saab;
        for (const auto& s : j.at("plan")) k.plan.stages.push_back(s.get<int>());
        if (!k.plan.valid() || k.plan.block_side() != n)
            throw KernelDimensionError("kernel file: plan does not match block side");
        k.bias = vector_from_json(j.at("bias"), dim, "bias");
        k.energies = vector_from_json(j.at("energies"), dim, "energies");
        k.matrix = matrix_from_json(j.at("matrix"), dim, dim, "matrix");
        k.meta = meta_from_json(j);
        check_orthonormal(k.matrix, dim, dim);
        return k;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("kernel file: ") + e.what());
    }
}

void save_kernel(const AnyKernel& kernel, const std::string& path) {
    write_file_atomic(path, kernel_to_text(kernel));
}

AnyKernel load_kernel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return kernel_from_text(text);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

}  // namespace

void save_blocks(const BlockSet& blocks, const std::string& path) {
    std::vector<std::uint8_t> out;
    out.reserve(20 + blocks.data.size() * 8);
    out.insert(out.end(), {'S', 'B', 'L', 'K'});
    put_u32(out, 1);
    put_u32(out, std::uint32_t(blocks.n));
    put_u64(out, blocks.count());
    for (double d : blocks.data) put_u64(out, std::bit_cast<std::uint64_t>(d));
    write_file_atomic(path, out);
}

BlockSet load_blocks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 20 || std::memcmp(bytes.data(), "SBLK", 4) != 0)
        throw ParseError("block file: bad magic", 0);
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != 1) throw ParseError("block file: unsupported version " + std::to_string(version), 4);
    const int n = int(get_u32(bytes.data() + 8));
    if (n < 1 || n > 64) throw ParseError("block file: bad block side", 8);
    const std::uint64_t count = get_u64(bytes.data() + 12);
    const std::uint64_t values = count * std::uint64_t(n) * n;
    if (bytes.size() != 20 + values * 8) throw ParseError("block file: truncated data", bytes.size());

    BlockSet set;
    set.n = n;
    set.provenance = path;
    set.data.resize(values);
    for (std::uint64_t i = 0; i < values; ++i)
        set.data[i] = std::bit_cast<double>(get_u64(bytes.data() + 20 + i * 8));
    return set;
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path,
                      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace saabtk
