#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "saabtk/block.hpp"
#include "saabtk/linalg.hpp"

namespace saabtk {

inline constexpr double kDefaultBiasMargin = 1.25;

enum class KernelKind { Dct, Saab };

struct KernelMeta {
    std::size_t sample_count = 0;
    std::string source;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::size_t delta_m = 0;
    double scale = 1.0;
};

// Affine block transform y = M x + bias with orthonormal M; row k of M
// is basis function k. Row 0 is the DC filter for Saab kernels and the
// lowest-frequency row for the DCT. AC rows are kept in descending order
// of their training energies (eigenvalues for Saab).
struct AffineOrthoKernel {
    int n = 0;
    int dim = 0;
    KernelKind kind = KernelKind::Dct;
    StagePlan plan;
    std::vector<double> matrix;    // dim x dim row-major
    std::vector<double> bias;      // dim
    std::vector<double> energies;  // dim
    KernelMeta meta;

    std::span<const double> row(int k) const {
        return {matrix.data() + std::size_t(k) * dim, std::size_t(dim)};
    }
    // "dct", "saab-4", "saab-2+2", ...
    std::string label() const;
};

// Mean-removed PCA basis: ensemble mean plus the top dim-1 eigenvectors of
// the mean-removed covariance.
struct KltKernel {
    int n = 0;
    int dim = 0;
    std::vector<double> mean;         // dim
    std::vector<double> basis;        // (dim-1) x dim row-major
    std::vector<double> eigenvalues;  // dim-1, descending
    KernelMeta meta;

    std::span<const double> basis_row(int k) const {
        return {basis.data() + std::size_t(k) * dim, std::size_t(dim)};
    }
    std::string label() const { return "klt"; }
};

using AnyKernel = std::variant<AffineOrthoKernel, KltKernel>;

std::string kernel_label(const AnyKernel& k);
int kernel_n(const AnyKernel& k);
int kernel_dim(const AnyKernel& k);

// One fitted Saab stage mapping d = s*s*channels inputs to d outputs.
struct SaabStage {
    int subblock = 0;  // spatial side s
    int channels = 1;
    int dim = 0;
    std::vector<double> matrix;       // dim x dim, row 0 = constant DC filter
    double bias = 0.0;                // shared by all outputs of the stage
    std::vector<double> eigenvalues;  // dim-1 AC eigenvalues, descending
    double max_input_norm = 0.0;
    double dc_energy = 0.0;  // mean squared DC coefficient over training inputs
    bool degenerate = false;

    std::span<const double> row(int k) const {
        return {matrix.data() + std::size_t(k) * dim, std::size_t(dim)};
    }
};

struct SaabFit {
    AffineOrthoKernel kernel;
    std::vector<SaabStage> stages;
};

// Analytic 2D DCT kernel for n in {2,4,8,16}. Row for frequency pair (p,q)
// sits at index p*n+q; bias and energies start at zero.
AffineOrthoKernel dct_kernel(int n);

// KLT from an accumulator over block vectors; needs count >= dim.
KltKernel klt_kernel(const CovarianceAccumulator& acc);

// Fits one Saab stage from a batch of equal-length sample vectors: constant
// DC filter, PCA of the mean-removed DC-orthogonal covariance for the AC
// filters, bias = margin * max sample norm.
SaabStage saab_fit_stage(std::span<const std::vector<double>> samples,
                         double margin = kDefaultBiasMargin);

// AC filters and eigenvalues from a pre-accumulated covariance of DC-removed
// samples. bias / max_input_norm / dc_energy are left for the caller.
SaabStage saab_ac_filters(const CovarianceAccumulator& dc_removed);

// Fits all stages of `plan` over the block set and returns both the composed
// kernel and the per-stage kernels.
SaabFit fit_saab(const BlockSet& blocks, const StagePlan& plan,
                 double margin = kDefaultBiasMargin);

// Composed kernel only.
AffineOrthoKernel saab_fit_multistage(const BlockSet& blocks, const StagePlan& plan,
                                      double margin = kDefaultBiasMargin);

CoefVector forward(const AffineOrthoKernel& k, const BlockVector& x);
BlockVector inverse(const AffineOrthoKernel& k, const CoefVector& y);
CoefVector coefficients_biasfree(const AffineOrthoKernel& k, const BlockVector& x);
CoefVector klt_coefficients(const KltKernel& k, const BlockVector& x);

// Allocation-free forms used by bulk analysis.
void biasfree_into(const AffineOrthoKernel& k, std::span<const double> x, std::span<double> out);
void klt_into(const KltKernel& k, std::span<const double> x, std::span<double> out);

// Orthonormal basis of the complement of the constant direction, as (dim-1)
// rows of length dim: Gram-Schmidt over canonical basis vectors projected
// off the constant direction.
std::vector<double> dc_complement_basis(int dim);

// Index map from stage-input slots to the previous representation: positions
// row-major over the (grid/s)^2 subblock grid, local spatial row-major,
// channels innermost. Length grid*grid*channels.
std::vector<int> stage_gather_map(int grid, int subblock, int channels);

// Folds one more stage into a composed affine map:
// matrix <- blockdiag(M_t) P matrix, bias <- blockdiag(M_t) P bias + b_t.
void compose_saab_stage(const SaabStage& stage, std::span<const int> gather_map, int dim,
                        std::vector<double>& matrix, std::vector<double>& bias);

// Frobenius norm of M M^T - I for a rows x dim row-major matrix.
double orthonormality_defect(std::span<const double> matrix, int rows, int dim);

}  // namespace saabtk
