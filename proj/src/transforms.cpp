#include "saabtk/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "saabtk/errors.hpp"

namespace saabtk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_finite(std::span<const double> v, const char* where) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(where) + ": non-finite value");
}

}  // namespace

std::string AffineOrthoKernel::label() const {
    if (kind == KernelKind::Dct) return "dct";
    return "saab-" + plan.label();
}

std::string kernel_label(const AnyKernel& k) {
    return std::visit([](const auto& kk) { return kk.label(); }, k);
}

int kernel_n(const AnyKernel& k) {
    return std::visit([](const auto& kk) { return kk.n; }, k);
}

int kernel_dim(const AnyKernel& k) {
    return std::visit([](const auto& kk) { return kk.dim; }, k);
}

double orthonormality_defect(std::span<const double> matrix, int rows, int dim) {
    double s = 0.0;
    for (int i = 0; i < rows; ++i) {
        const std::span<const double> ri{matrix.data() + std::size_t(i) * dim, std::size_t(dim)};
        for (int j = i; j < rows; ++j) {
            const std::span<const double> rj{matrix.data() + std::size_t(j) * dim, std::size_t(dim)};
            const double g = dot(ri, rj) - (i == j ? 1.0 : 0.0);
            s += (i == j ? 1.0 : 2.0) * g * g;
        }
    }
    return std::sqrt(s);
}

AffineOrthoKernel dct_kernel(int n) {
    if (!supported_block_side(n)) throw std::invalid_argument("dct_kernel: unsupported block side");
    const int dim = n * n;
    // 1D orthonormal cosine table: c[p][m] = sqrt(2/n) * lambda(p) * cos((2m+1) p pi / 2n)
    std::vector<double> c(std::size_t(n) * n);
    const double pi = std::numbers::pi;
    for (int p = 0; p < n; ++p) {
        const double lam = p == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
        for (int m = 0; m < n; ++m)
            c[std::size_t(p) * n + m] =
                std::sqrt(2.0 / n) * lam * std::cos((2 * m + 1) * p * pi / (2.0 * n));
    }
    AffineOrthoKernel k;
    k.n = n;
    k.dim = dim;
    k.kind = KernelKind::Dct;
    k.plan.stages = {n};
    k.matrix.resize(std::size_t(dim) * dim);
    k.bias.assign(dim, 0.0);
    k.energies.assign(dim, 0.0);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double* row = k.matrix.data() + std::size_t(p * n + q) * dim;
            for (int m = 0; m < n; ++m)
                for (int np = 0; np < n; ++np)
                    row[m * n + np] = c[std::size_t(p) * n + m] * c[std::size_t(q) * n + np];
        }
    return k;
}

KltKernel klt_kernel(const CovarianceAccumulator& acc) {
    const int dim = acc.dim();
    if (dim < 2) throw std::invalid_argument("klt_kernel: dim must be >= 2");
    const int n = int(std::lround(std::sqrt(double(dim))));
    if (n * n != dim) throw std::invalid_argument("klt_kernel: dim is not a square");
    if (acc.count() < std::size_t(dim))
        throw InsufficientDataError("klt_kernel: need at least dim samples");
    const EigDecomposition eig = eig_sym(acc.covariance());
    KltKernel k;
    k.n = n;
    k.dim = dim;
    k.mean.assign(acc.mean().begin(), acc.mean().end());
    k.basis.resize(std::size_t(dim - 1) * dim);
    k.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.end() - 1);
    for (int r = 0; r < dim - 1; ++r)
        for (int i = 0; i < dim; ++i) k.basis[std::size_t(r) * dim + i] = eig.vec(i, r);
    k.meta.sample_count = acc.count();
    return k;
}

std::vector<double> dc_complement_basis(int dim) {
    if (dim < 2) throw std::invalid_argument("dc_complement_basis: dim must be >= 2");
    std::vector<double> rows(std::size_t(dim - 1) * dim);
    std::vector<double> u(dim);
    int accepted = 0;
    for (int cand = 0; cand < dim && accepted < dim - 1; ++cand) {
        for (int j = 0; j < dim; ++j) u[j] = (j == cand ? 1.0 : 0.0) - 1.0 / dim;
        // two modified Gram-Schmidt passes
        for (int pass = 0; pass < 2; ++pass) {
            for (int r = 0; r < accepted; ++r) {
                const std::span<const double> prev{rows.data() + std::size_t(r) * dim,
                                                   std::size_t(dim)};
                const double coef = dot(u, prev);
                for (int j = 0; j < dim; ++j) u[j] -= coef * prev[j];
            }
        }
        const double nrm = norm(u);
        if (nrm <= 1e-8) continue;
        for (int j = 0; j < dim; ++j) rows[std::size_t(accepted) * dim + j] = u[j] / nrm;
        ++accepted;
    }
    if (accepted != dim - 1)
        throw std::runtime_error("dc_complement_basis: incomplete basis");
    return rows;
}

SaabStage saab_ac_filters(const CovarianceAccumulator& dc_removed) {
    const int d = dc_removed.dim();
    if (d < 2) throw std::invalid_argument("saab stage: dim must be >= 2");
    if (dc_removed.count() < std::size_t(d))
        throw InsufficientDataError("saab stage: need at least dim samples");

    const SymMatrix cov = dc_removed.covariance();
    const std::vector<double> u = dc_complement_basis(d);
    const int m = d - 1;

    // project the covariance onto the DC complement: cp = U C U^T
    std::vector<double> uc(std::size_t(m) * d, 0.0);
    for (int r = 0; r < m; ++r)
        for (int k = 0; k < d; ++k) {
            const double urk = u[std::size_t(r) * d + k];
            if (urk == 0.0) continue;
            for (int j = 0; j < d; ++j) uc[std::size_t(r) * d + j] += urk * cov(k, j);
        }
    SymMatrix cp(m);
    for (int r = 0; r < m; ++r)
        for (int s = r; s < m; ++s) {
            double v = 0.0;
            for (int j = 0; j < d; ++j) v += uc[std::size_t(r) * d + j] * u[std::size_t(s) * d + j];
            cp.set(r, s, v);
        }

    const EigDecomposition eig = eig_sym(cp);

    SaabStage st;
    st.dim = d;
    st.matrix.assign(std::size_t(d) * d, 0.0);
    const double dc = 1.0 / std::sqrt(double(d));
    for (int j = 0; j < d; ++j) st.matrix[j] = dc;
    for (int k = 0; k < m; ++k) {
        double* row = st.matrix.data() + std::size_t(1 + k) * d;
        for (int r = 0; r < m; ++r) {
            const double w = eig.vec(r, k);
            if (w == 0.0) continue;
            for (int j = 0; j < d; ++j) row[j] += w * u[std::size_t(r) * d + j];
        }
    }
    st.eigenvalues = eig.eigenvalues;
    st.degenerate = eig.eigenvalues.empty() || eig.eigenvalues.front() <= 0.0;
    return st;
}

SaabStage saab_fit_stage(std::span<const std::vector<double>> samples, double margin) {
    if (samples.empty()) throw InsufficientDataError("saab_fit_stage: no samples");
    const int d = int(samples.front().size());
    if (d < 2) throw std::invalid_argument("saab_fit_stage: sample dim must be >= 2");
    if (samples.size() < std::size_t(d))
        throw InsufficientDataError("saab_fit_stage: need at least dim samples");
    if (!(margin >= 1.0)) throw std::invalid_argument("saab_fit_stage: margin must be >= 1");

    CovarianceAccumulator acc(d);
    std::vector<double> xac(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
    double max_norm = 0.0;
    double dc2 = 0.0;
    for (const auto& x : samples) {
        if (int(x.size()) != d) throw std::invalid_argument("saab_fit_stage: ragged sample");
        check_finite(x, "saab_fit_stage");
        double s = 0.0, e = 0.0;
        for (double v : x) {
            s += v;
            e += v * v;
        }
        const double dc = s * inv_sqrt_d;
        for (int j = 0; j < d; ++j) xac[j] = x[j] - dc * inv_sqrt_d;
        acc.add(xac);
        max_norm = std::max(max_norm, std::sqrt(e));
        dc2 += dc * dc;
    }
    SaabStage st = saab_ac_filters(acc);
    st.bias = margin * max_norm;
    st.max_input_norm = max_norm;
    st.dc_energy = dc2 / double(samples.size());
    return st;
}

std::vector<int> stage_gather_map(int grid, int subblock, int channels) {
    if (subblock < 1 || grid % subblock != 0)
        throw std::invalid_argument("stage_gather_map: subblock must divide grid");
    const int gnew = grid / subblock;
    std::vector<int> map(std::size_t(grid) * grid * channels);
    std::size_t j = 0;
    for (int br = 0; br < gnew; ++br)
        for (int bc = 0; bc < gnew; ++bc)
            for (int r = 0; r < subblock; ++r)
                for (int cc = 0; cc < subblock; ++cc)
                    for (int ch = 0; ch < channels; ++ch)
                        map[j++] = ((br * subblock + r) * grid + (bc * subblock + cc)) * channels + ch;
    return map;
}

void compose_saab_stage(const SaabStage& st, std::span<const int> map, int dim,
                        std::vector<double>& matrix, std::vector<double>& bias) {
    const int d = st.dim;
    const int positions = dim / d;
    std::vector<double> nm(std::size_t(dim) * dim, 0.0);
    std::vector<double> nb(dim, 0.0);
    for (int pos = 0; pos < positions; ++pos) {
        for (int k = 0; k < d; ++k) {
            double* out = nm.data() + std::size_t(pos * d + k) * dim;
            double b = 0.0;
            const double* srow = st.matrix.data() + std::size_t(k) * d;
            for (int l = 0; l < d; ++l) {
                const double w = srow[l];
                const int prev = map[std::size_t(pos) * d + l];
                const double* prow = matrix.data() + std::size_t(prev) * dim;
                for (int c = 0; c < dim; ++c) out[c] += w * prow[c];
                b += w * bias[prev];
            }
            nb[std::size_t(pos) * d + k] = b + st.bias;
        }
    }
    matrix = std::move(nm);
    bias = std::move(nb);
}

SaabFit fit_saab(const BlockSet& blocks, const StagePlan& plan, double margin) {
    if (!plan.valid() || !plan.supported_saab())
        throw std::invalid_argument("fit_saab: unsupported stage plan " + plan.label());
    const int n = plan.block_side();
    if (blocks.n != n) throw std::invalid_argument("fit_saab: block side does not match plan");
    const int dim = n * n;
    if (blocks.count() < std::size_t(dim))
        throw InsufficientDataError("fit_saab: need at least n^2 blocks");
    if (!(margin >= 1.0)) throw std::invalid_argument("fit_saab: margin must be >= 1");
    check_finite(blocks.data, "fit_saab");

    const std::size_t count = blocks.count();
    std::vector<double> rep = blocks.data;  // current per-block representation
    std::vector<double> composed_m(std::size_t(dim) * dim, 0.0);
    std::vector<double> composed_b(dim, 0.0);
    for (int i = 0; i < dim; ++i) composed_m[std::size_t(i) * dim + i] = 1.0;

    SaabFit fit;
    int grid = n;
    int channels = 1;
    std::vector<double> v, next(dim);
    for (int s_t : plan.stages) {
        const int d = s_t * s_t * channels;
        const std::vector<int> map = stage_gather_map(grid, s_t, channels);
        const int positions = dim / d;
        const double inv_sqrt_d = 1.0 / std::sqrt(double(d));

        CovarianceAccumulator acc(d);
        v.resize(d);
        std::vector<double> xac(d);
        double max_norm = 0.0, dc2 = 0.0;
        for (std::size_t b = 0; b < count; ++b) {
            const double* base = rep.data() + b * dim;
            for (int pos = 0; pos < positions; ++pos) {
                double s = 0.0, e = 0.0;
                for (int l = 0; l < d; ++l) {
                    v[l] = base[map[std::size_t(pos) * d + l]];
                    s += v[l];
                    e += v[l] * v[l];
                }
                const double dc = s * inv_sqrt_d;
                for (int l = 0; l < d; ++l) xac[l] = v[l] - dc * inv_sqrt_d;
                acc.add(xac);
                max_norm = std::max(max_norm, std::sqrt(e));
                dc2 += dc * dc;
            }
        }
        SaabStage st = saab_ac_filters(acc);
        st.subblock = s_t;
        st.channels = channels;
        st.bias = margin * max_norm;
        st.max_input_norm = max_norm;
        st.dc_energy = dc2 / (double(count) * positions);

        // transform the representation through this stage
        for (std::size_t b = 0; b < count; ++b) {
            double* base = rep.data() + b * dim;
            for (int pos = 0; pos < positions; ++pos) {
                for (int l = 0; l < d; ++l) v[l] = base[map[std::size_t(pos) * d + l]];
                for (int k = 0; k < d; ++k)
                    next[std::size_t(pos) * d + k] = dot(st.row(k), v) + st.bias;
            }
            for (int i = 0; i < dim; ++i) base[i] = next[i];
        }

        compose_saab_stage(st, map, dim, composed_m, composed_b);
        fit.stages.push_back(std::move(st));
        grid /= s_t;
        channels = d;
    }

    AffineOrthoKernel& k = fit.kernel;
    k.n = n;
    k.dim = dim;
    k.kind = KernelKind::Saab;
    k.plan = plan;
    k.matrix = std::move(composed_m);
    k.bias = std::move(composed_b);
    k.energies.assign(dim, 0.0);
    const auto& last = fit.stages.back();
    for (int i = 1; i < dim; ++i) k.energies[i] = last.eigenvalues[i - 1];
    // metadata: measured mean energy of the composed bias-free DC coefficient
    double e0 = 0.0;
    for (std::size_t b = 0; b < count; ++b) {
        const double c0 = dot(k.row(0), blocks.block(b));
        e0 += c0 * c0;
    }
    k.energies[0] = e0 / double(count);
    k.meta.sample_count = count;
    k.meta.source = blocks.provenance;
    k.meta.seed = blocks.seed;
    return fit;
}

AffineOrthoKernel saab_fit_multistage(const BlockSet& blocks, const StagePlan& plan,
                                      double margin) {
    return fit_saab(blocks, plan, margin).kernel;
}

CoefVector forward(const AffineOrthoKernel& k, const BlockVector& x) {
    if (x.n != k.n || int(x.values.size()) != k.dim)
        throw std::invalid_argument("forward: block size mismatch");
    CoefVector y;
    y.values.resize(k.dim);
    for (int r = 0; r < k.dim; ++r) y.values[r] = dot(k.row(r), x.values) + k.bias[r];
    return y;
}

BlockVector inverse(const AffineOrthoKernel& k, const CoefVector& y) {
    if (y.dim() != k.dim) throw std::invalid_argument("inverse: coefficient size mismatch");
    BlockVector x;
    x.n = k.n;
    x.values.assign(k.dim, 0.0);
    for (int r = 0; r < k.dim; ++r) {
        const double w = y.values[r] - k.bias[r];
        if (w == 0.0) continue;
        const auto row = k.row(r);
        for (int j = 0; j < k.dim; ++j) x.values[j] += w * row[j];
    }
    return x;
}

CoefVector coefficients_biasfree(const AffineOrthoKernel& k, const BlockVector& x) {
    if (x.n != k.n || int(x.values.size()) != k.dim)
        throw std::invalid_argument("coefficients_biasfree: block size mismatch");
    CoefVector y;
    y.values.resize(k.dim);
    biasfree_into(k, x.values, y.values);
    return y;
}

void biasfree_into(const AffineOrthoKernel& k, std::span<const double> x, std::span<double> out) {
    for (int r = 0; r < k.dim; ++r) out[r] = dot(k.row(r), x);
}

CoefVector klt_coefficients(const KltKernel& k, const BlockVector& x) {
    if (x.n != k.n || int(x.values.size()) != k.dim)
        throw std::invalid_argument("klt_coefficients: block size mismatch");
    CoefVector y;
    y.values.resize(k.dim);
    klt_into(k, x.values, y.values);
    return y;
}

void klt_into(const KltKernel& k, std::span<const double> x, std::span<double> out) {
    const double mu_norm = norm(k.mean);
    if (mu_norm > 1e-12) {
        out[0] = dot(x, k.mean) / mu_norm;
    } else {
        out[0] = 0.0;
    }
    for (int r = 0; r < k.dim - 1; ++r) {
        const auto row = k.basis_row(r);
        double s = 0.0;
        for (int j = 0; j < k.dim; ++j) s += (x[j] - k.mean[j]) * row[j];
        out[r + 1] = s;
    }
}

}  // namespace saabtk
