#include "saabtk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "saabtk/errors.hpp"

namespace saabtk {

const char* to_string(AcOrdering o) {
    switch (o) {
        case AcOrdering::Native: return "native";
        case AcOrdering::MeanEnergyDesc: return "energy";
        case AcOrdering::Zigzag: return "zigzag";
    }
    return "?";
}

std::optional<AcOrdering> ordering_from_string(std::string_view text) {
    if (text == "native") return AcOrdering::Native;
    if (text == "energy") return AcOrdering::MeanEnergyDesc;
    if (text == "zigzag") return AcOrdering::Zigzag;
    return std::nullopt;
}

namespace {

std::string fmt_g(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace

std::vector<double> mean_coefficient_energies(const AnyKernel& kernel, const BlockSet& blocks) {
    const int dim = kernel_dim(kernel);
    if (kernel_n(kernel) != blocks.n)
        throw std::invalid_argument("analysis: kernel and block set sizes differ");
    if (blocks.count() == 0) throw std::invalid_argument("analysis: empty block set");
    std::vector<double> acc(dim, 0.0);
    std::vector<double> c(dim);
    const std::size_t count = blocks.count();
    for (std::size_t b = 0; b < count; ++b) {
        const auto x = blocks.block(b);
        std::visit(
            [&](const auto& k) {
                if constexpr (std::is_same_v<std::decay_t<decltype(k)>, AffineOrthoKernel>)
                    biasfree_into(k, x, c);
                else
                    klt_into(k, x, c);
            },
            kernel);
        for (int i = 0; i < dim; ++i) acc[i] += c[i] * c[i];
    }
    for (double& v : acc) v /= double(count);
    return acc;
}

EnergyReport energy_table(const AnyKernel& kernel, const BlockSet& blocks) {
    EnergyReport rep;
    rep.transform = kernel_label(kernel);
    rep.n = kernel_n(kernel);
    rep.per_index_mean_energy = mean_coefficient_energies(kernel, blocks);
    rep.dc_energy = rep.per_index_mean_energy[0];
    rep.ac_energy = std::accumulate(rep.per_index_mean_energy.begin() + 1,
                                    rep.per_index_mean_energy.end(), 0.0);
    rep.total_energy = rep.dc_energy + rep.ac_energy;
    rep.block_count = blocks.count();
    return rep;
}

std::vector<int> zigzag_ac_order(int n) {
    std::vector<int> order;
    order.reserve(std::size_t(n) * n - 1);
    for (int s = 1; s <= 2 * (n - 1); ++s) {
        if (s % 2) {  // odd diagonals walk p upward
            for (int p = std::max(0, s - n + 1); p <= std::min(s, n - 1); ++p)
                order.push_back(p * n + (s - p));
        } else {
            for (int p = std::min(s, n - 1); p >= std::max(0, s - n + 1); --p)
                order.push_back(p * n + (s - p));
        }
    }
    return order;
}

std::vector<int> order_coeffs(const AnyKernel& kernel, const BlockSet& blocks,
                              AcOrdering strategy) {
    const int dim = kernel_dim(kernel);
    switch (strategy) {
        case AcOrdering::Native: {
            std::vector<int> order(dim - 1);
            std::iota(order.begin(), order.end(), 1);
            return order;
        }
        case AcOrdering::MeanEnergyDesc: {
            const std::vector<double> e = mean_coefficient_energies(kernel, blocks);
            std::vector<int> order(dim - 1);
            std::iota(order.begin(), order.end(), 1);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return e[a] > e[b]; });
            return order;
        }
        case AcOrdering::Zigzag: {
            const auto* affine = std::get_if<AffineOrthoKernel>(&kernel);
            if (!affine || affine->kind != KernelKind::Dct)
                throw std::invalid_argument("order_coeffs: zigzag is valid for DCT kernels only");
            return zigzag_ac_order(affine->n);
        }
    }
    throw std::invalid_argument("order_coeffs: unknown strategy");
}

CompactionCurve cumulative_from_energies(std::span<const double> energies,
                                         std::span<const int> ac_order) {
    double denom = 0.0, total = 0.0;
    for (std::size_t i = 0; i < energies.size(); ++i) total += energies[i];
    for (std::size_t i = 1; i < energies.size(); ++i) denom += energies[i];
    // AC energy at roundoff level relative to the total counts as zero
    if (!(denom > 1e-20 * total)) throw DegenerateDataError("cumulative curve: zero AC energy");
    CompactionCurve curve;
    curve.values.reserve(ac_order.size());
    double run = 0.0;
    for (int idx : ac_order) {
        run += energies[idx];
        curve.values.push_back(100.0 * run / denom);
    }
    return curve;
}

CompactionCurve cumulative_ac_curve(const AnyKernel& kernel, const BlockSet& blocks,
                                    AcOrdering strategy) {
    const std::vector<double> e = mean_coefficient_energies(kernel, blocks);
    const std::vector<int> order = order_coeffs(kernel, blocks, strategy);
    CompactionCurve curve = cumulative_from_energies(e, order);
    curve.transform = kernel_label(kernel);
    curve.ordering = to_string(strategy);
    curve.n = kernel_n(kernel);
    curve.block_count = blocks.count();
    return curve;
}

namespace {

// DCT, KLT, one-stage Saab, multi-stage Saab variants.
int label_rank(const std::string& label) {
    if (label == "dct") return 0;
    if (label == "klt") return 1;
    if (label.rfind("saab-", 0) == 0)
        return label.find('+') == std::string::npos ? 2 : 3;
    return 4;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto next = line.find(sep, start);
        out.push_back(line.substr(start, next == std::string::npos ? std::string::npos
                                                                   : next - start));
        if (next == std::string::npos) break;
        start = next + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("comparison CSV: bad number '" + s + "'");
    }
}

std::vector<std::string> read_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

ComparisonDocument compare_report(std::vector<CompactionCurve> curves,
                                  std::vector<EnergyReport> tables) {
    if (curves.empty() && tables.empty())
        throw std::invalid_argument("compare_report: nothing to compare");
    int n = curves.empty() ? tables.front().n : curves.front().n;
    std::size_t blocks = curves.empty() ? tables.front().block_count : curves.front().block_count;
    for (const auto& c : curves)
        if (c.n != n || c.block_count != blocks)
            throw std::invalid_argument("compare_report: mixed block sets");
    for (const auto& t : tables)
        if (t.n != n || t.block_count != blocks)
            throw std::invalid_argument("compare_report: mixed block sets");

    std::stable_sort(curves.begin(), curves.end(), [](const auto& a, const auto& b) {
        const int ra = label_rank(a.transform), rb = label_rank(b.transform);
        if (ra != rb) return ra < rb;
        if (a.transform != b.transform) return a.transform < b.transform;
        return a.ordering < b.ordering;
    });
    std::stable_sort(tables.begin(), tables.end(), [](const auto& a, const auto& b) {
        const int ra = label_rank(a.transform), rb = label_rank(b.transform);
        if (ra != rb) return ra < rb;
        return a.transform < b.transform;
    });

    ComparisonDocument doc;
    doc.n = n;
    for (const auto& c : curves) {
        doc.labels.push_back(c.transform);
        doc.orderings.push_back(c.ordering);
        doc.curve_values.push_back(c.values);
    }
    for (const auto& t : tables) {
        doc.summary_labels.push_back(t.transform);
        doc.summaries.push_back({t.dc_energy, t.ac_energy, t.total_energy});
    }
    return doc;
}

std::string ComparisonDocument::curves_csv() const {
    std::string out = "K";
    for (std::size_t c = 0; c < labels.size(); ++c)
        out += "," + labels[c] + ":" + orderings[c];
    out += ",max_gap\n";
    const std::size_t rows = curve_values.empty() ? 0 : curve_values.front().size();
    for (std::size_t k = 0; k < rows; ++k) {
        out += std::to_string(k + 1);
        double lo = 0.0, hi = 0.0;
        for (std::size_t c = 0; c < curve_values.size(); ++c) {
            const double v = curve_values[c][k];
            out += "," + fmt_g(v, 17);
            lo = c == 0 ? v : std::min(lo, v);
            hi = c == 0 ? v : std::max(hi, v);
        }
        out += "," + fmt_g(hi - lo, 17) + "\n";
    }
    return out;
}

std::string ComparisonDocument::table_csv() const {
    std::string out = "index_class";
    for (const auto& l : summary_labels) out += "," + l;
    out += "\n";
    const char* names[3] = {"DC", "AC", "TOTAL"};
    for (int r = 0; r < 3; ++r) {
        out += names[r];
        for (const auto& s : summaries) {
            const double v = r == 0 ? s.dc : r == 1 ? s.ac : s.total;
            out += "," + fmt_g(v, 17);
        }
        out += "\n";
    }
    return out;
}

ComparisonDocument ComparisonDocument::parse(const std::string& table_text,
                                             const std::string& curves_text) {
    ComparisonDocument doc;
    const auto tlines = read_lines(table_text);
    if (tlines.size() != 4) throw ParseError("comparison table: expected header plus 3 rows");
    const auto theader = split(tlines[0], ',');
    if (theader.empty() || theader[0] != "index_class")
        throw ParseError("comparison table: bad header");
    doc.summary_labels.assign(theader.begin() + 1, theader.end());
    doc.summaries.resize(doc.summary_labels.size());
    const char* names[3] = {"DC", "AC", "TOTAL"};
    for (int r = 0; r < 3; ++r) {
        const auto cells = split(tlines[r + 1], ',');
        if (cells.size() != theader.size() || cells[0] != names[r])
            throw ParseError("comparison table: bad row " + tlines[r + 1]);
        for (std::size_t c = 0; c < doc.summaries.size(); ++c) {
            const double v = parse_double(cells[c + 1]);
            if (r == 0)
                doc.summaries[c].dc = v;
            else if (r == 1)
                doc.summaries[c].ac = v;
            else
                doc.summaries[c].total = v;
        }
    }

    const auto clines = read_lines(curves_text);
    if (clines.empty()) throw ParseError("comparison curves: empty");
    const auto cheader = split(clines[0], ',');
    if (cheader.size() < 2 || cheader.front() != "K" || cheader.back() != "max_gap")
        throw ParseError("comparison curves: bad header");
    const std::size_t cols = cheader.size() - 2;
    for (std::size_t c = 0; c < cols; ++c) {
        const auto& name = cheader[c + 1];
        const auto colon = name.find(':');
        if (colon == std::string::npos) throw ParseError("comparison curves: bad column " + name);
        doc.labels.push_back(name.substr(0, colon));
        doc.orderings.push_back(name.substr(colon + 1));
    }
    doc.curve_values.assign(cols, {});
    for (std::size_t r = 1; r < clines.size(); ++r) {
        const auto cells = split(clines[r], ',');
        if (cells.size() != cheader.size())
            throw ParseError("comparison curves: bad row " + clines[r]);
        for (std::size_t c = 0; c < cols; ++c)
            doc.curve_values[c].push_back(parse_double(cells[c + 1]));
    }
    const std::size_t rows = cols ? doc.curve_values.front().size() : 0;
    doc.n = int(std::lround(std::sqrt(double(rows + 1))));
    return doc;
}

std::string curve_csv(std::span<const CompactionCurve> curves) {
    std::string out = "transform,ordering,K,E_K_percent\n";
    for (const auto& c : curves)
        for (std::size_t k = 0; k < c.values.size(); ++k)
            out += c.transform + "," + c.ordering + "," + std::to_string(k + 1) + "," +
                   fmt_g(c.values[k], 12) + "\n";
    return out;
}

std::string table_csv(std::span<const EnergyReport> tables) {
    std::string out = "transform,index_class,energy\n";
    for (const auto& t : tables) {
        out += t.transform + ",DC," + fmt_g(t.dc_energy, 12) + "\n";
        out += t.transform + ",AC," + fmt_g(t.ac_energy, 12) + "\n";
        out += t.transform + ",TOTAL," + fmt_g(t.total_energy, 12) + "\n";
    }
    return out;
}

}  // namespace saabtk
