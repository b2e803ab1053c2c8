#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace saabtk {

// Dense symmetric matrix with full row-major storage. set() writes both
// triangles, so entries stay exactly symmetric.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim);

    // Builds from full row-major data, symmetrizing as (a_ij + a_ji) / 2.
    static SymMatrix from_full(int dim, std::span<const double> full);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return e_[std::size_t(i) * dim_ + j]; }
    void set(int i, int j, double v);
    double trace() const;
    std::span<const double> data() const { return e_; }

private:
    int dim_ = 0;
    std::vector<double> e_;
};

// sqrt of the sum of squared entry differences.
double frobenius_diff(const SymMatrix& a, const SymMatrix& b);

// Streaming mean and scatter (sum of centered outer products). Mergeable, so
// disjoint sample shards can be accumulated independently and combined.
// Single writer; covariance() uses population normalization (divide by n).
class CovarianceAccumulator {
public:
    CovarianceAccumulator() = default;
    explicit CovarianceAccumulator(int dim);

    void add(std::span<const double> sample);

    std::size_t count() const { return count_; }
    int dim() const { return dim_; }
    std::span<const double> mean() const { return mean_; }
    SymMatrix scatter() const;
    SymMatrix covariance() const;

private:
    friend CovarianceAccumulator merge(const CovarianceAccumulator&, const CovarianceAccumulator&);

    int dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> mean_;
    std::vector<double> scatter_;  // packed upper triangle, row-major
    std::vector<double> delta_;    // scratch
};

// Equivalent to single-pass accumulation of the concatenated streams.
CovarianceAccumulator merge(const CovarianceAccumulator& a, const CovarianceAccumulator& b);

struct EigDecomposition {
    int dim = 0;
    std::vector<double> eigenvalues;   // descending
    std::vector<double> eigenvectors;  // row-major dim x dim; column k pairs with eigenvalues[k]

    // component i of eigenvector k
    double vec(int i, int k) const { return eigenvectors[std::size_t(i) * dim + k]; }
};

// Cyclic Jacobi diagonalization. Deterministic: fixed sweep order, descending
// eigenvalue sort with index tie-break, and each eigenvector's first
// component above 1e-12 in magnitude is made positive.
EigDecomposition eig_sym(const SymMatrix& m);

}  // namespace saabtk
