#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "saabtk/transforms.hpp"

namespace saabtk {

// Fills `out` (sized to the sample dim) with the next sample; returns false
// once the stream is exhausted.
using SampleSource = std::function<bool(std::span<double> out)>;

struct ConvergenceTrace {
    std::size_t delta_m = 0;
    double epsilon = 0.0;
    // (M, Frobenius diff between covariances at M and M - delta_m),
    // first checkpoint at M = 2 * delta_m
    std::vector<std::pair<std::size_t, double>> checkpoints;
    std::optional<std::size_t> converged_at;  // first M with diff < epsilon
    std::size_t samples_consumed = 0;
};

// Consumes samples until the covariance converges or max_samples is reached,
// comparing prefix covariance snapshots delta_m apart. Returns the
// accumulator at stop time together with the full trace.
std::pair<CovarianceAccumulator, ConvergenceTrace> convergence_monitor(
    const SampleSource& source, int dim, std::size_t delta_m, double epsilon,
    std::size_t max_samples);

// margin * max(norms); margin >= 1 guarantees a_k^T x + b >= 0 for unit a_k
// on every training x (Cauchy-Schwarz).
double bias_select(std::span<const double> norms, double margin);

enum class FitKind { Dct, Klt, Saab };

struct FitParams {
    double epsilon = 1.5e-4;
    std::size_t delta_m = 5000;
    std::size_t max_samples = std::numeric_limits<std::size_t>::max();
    double scale = 1.0;  // divisor applied to samples entering accumulation
    double margin = kDefaultBiasMargin;
    std::string source_label;
    std::uint64_t seed = 0;
};

struct FitReport {
    AnyKernel kernel;
    std::vector<ConvergenceTrace> traces;  // one per fitted covariance (per stage for Saab)
    std::vector<double> stage_biases;
    std::vector<double> stage_max_norms;
    double margin = kDefaultBiasMargin;
    std::size_t block_count = 0;
    std::string source_label;
};

// End-to-end fit: analytic kernel for DCT; converged covariance plus kernel
// construction for KLT and Saab (per stage), with bias basis and provenance.
FitReport fit_pipeline(const BlockSet& blocks, FitKind kind, const StagePlan& plan,
                       const FitParams& params);

}  // namespace saabtk
