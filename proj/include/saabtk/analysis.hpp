#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "saabtk/transforms.hpp"

namespace saabtk {

// Per-index mean energies of bias-free coefficients over a block set.
struct EnergyReport {
    std::string transform;
    int n = 0;
    std::vector<double> per_index_mean_energy;  // n^2
    double dc_energy = 0.0;                     // index 0
    double ac_energy = 0.0;                     // indices 1 .. n^2-1
    double total_energy = 0.0;
    std::size_t block_count = 0;
};

enum class AcOrdering { Native, MeanEnergyDesc, Zigzag };

const char* to_string(AcOrdering o);
std::optional<AcOrdering> ordering_from_string(std::string_view text);

// Cumulative AC energy percentages E_K for K = 1 .. n^2-1.
struct CompactionCurve {
    std::string transform;
    std::string ordering;
    int n = 0;
    std::vector<double> values;  // percent, nondecreasing, last == 100
    std::size_t block_count = 0;
};

std::vector<double> mean_coefficient_energies(const AnyKernel& kernel, const BlockSet& blocks);

EnergyReport energy_table(const AnyKernel& kernel, const BlockSet& blocks);

// Permutation of the AC indices 1 .. n^2-1 under the chosen strategy.
// Zigzag is valid for DCT kernels only (frequency layout).
std::vector<int> order_coeffs(const AnyKernel& kernel, const BlockSet& blocks, AcOrdering strategy);

// Standard diagonal scan of the (p, q) frequency grid with (0,0) dropped,
// mapped to row indices p*n+q.
std::vector<int> zigzag_ac_order(int n);

CompactionCurve cumulative_ac_curve(const AnyKernel& kernel, const BlockSet& blocks,
                                    AcOrdering strategy);
// Same, from precomputed per-index mean energies.
CompactionCurve cumulative_from_energies(std::span<const double> energies,
                                         std::span<const int> ac_order);

// Aligned per-K comparison plus a DC/AC/Total summary across transforms,
// columns ordered DCT, KLT, one-stage Saab, multi-stage Saab variants.
struct ComparisonDocument {
    int n = 0;
    std::vector<std::string> labels;     // transform per column
    std::vector<std::string> orderings;  // per column
    struct Summary {
        double dc = 0.0, ac = 0.0, total = 0.0;

        bool operator==(const Summary&) const = default;
    };
    std::vector<Summary> summaries;                 // per summary column
    std::vector<std::string> summary_labels;        // transform per summary column
    std::vector<std::vector<double>> curve_values;  // per column, E_K for K = 1..

    std::string curves_csv() const;  // header: K,<transform:ordering>...,max_gap
    std::string table_csv() const;   // header: index_class,<transform>...
    static ComparisonDocument parse(const std::string& table_text, const std::string& curves_text);

    bool operator==(const ComparisonDocument&) const = default;
};

ComparisonDocument compare_report(std::vector<CompactionCurve> curves,
                                  std::vector<EnergyReport> tables);

// Long-format CSVs: transform,ordering,K,E_K_percent / transform,index_class,energy.
std::string curve_csv(std::span<const CompactionCurve> curves);
std::string table_csv(std::span<const EnergyReport> tables);

}  // namespace saabtk
