#include "saabtk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "saabtk/errors.hpp"

namespace saabtk {

SymMatrix::SymMatrix(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("SymMatrix: dim must be >= 1");
    e_.assign(std::size_t(dim) * dim, 0.0);
}

SymMatrix SymMatrix::from_full(int dim, std::span<const double> full) {
    if (full.size() != std::size_t(dim) * dim)
        throw std::invalid_argument("SymMatrix::from_full: size mismatch");
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double v = 0.5 * (full[std::size_t(i) * dim + j] + full[std::size_t(j) * dim + i]);
            m.set(i, j, v);
        }
    return m;
}

void SymMatrix::set(int i, int j, double v) {
    e_[std::size_t(i) * dim_ + j] = v;
    e_[std::size_t(j) * dim_ + i] = v;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double frobenius_diff(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("frobenius_diff: dimension mismatch");
    double s = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t k = 0; k < da.size(); ++k) {
        const double d = da[k] - db[k];
        s += d * d;
    }
    return std::sqrt(s);
}

CovarianceAccumulator::CovarianceAccumulator(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("CovarianceAccumulator: dim must be >= 1");
    mean_.assign(dim, 0.0);
    scatter_.assign(std::size_t(dim) * (dim + 1) / 2, 0.0);
    delta_.assign(dim, 0.0);
}

void CovarianceAccumulator::add(std::span<const double> sample) {
    if (dim_ == 0 || sample.size() != std::size_t(dim_))
        throw std::invalid_argument("CovarianceAccumulator::add: dimension mismatch");
    ++count_;
    const double inv = 1.0 / double(count_);
    for (int i = 0; i < dim_; ++i) delta_[i] = sample[i] - mean_[i];
    for (int i = 0; i < dim_; ++i) mean_[i] += delta_[i] * inv;
    // delta x (x - new mean) == ((n-1)/n) delta x delta, which keeps the
    // scatter update symmetric.
    const double w = double(count_ - 1) * inv;
    double* s = scatter_.data();
    const double* d = delta_.data();
    for (int i = 0; i < dim_; ++i) {
        const double di = w * d[i];
        const int len = dim_ - i;
        const double* dj = d + i;
        for (int k = 0; k < len; ++k) s[k] += di * dj[k];
        s += len;
    }
}

SymMatrix CovarianceAccumulator::scatter() const {
    if (dim_ == 0) throw std::invalid_argument("CovarianceAccumulator: uninitialized");
    SymMatrix m(dim_);
    const double* s = scatter_.data();
    for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) m.set(i, j, *s++);
    return m;
}

SymMatrix CovarianceAccumulator::covariance() const {
    if (dim_ == 0) throw std::invalid_argument("CovarianceAccumulator: uninitialized");
    if (count_ == 0) throw InsufficientDataError("covariance: empty accumulator");
    SymMatrix m(dim_);
    const double inv = 1.0 / double(count_);
    const double* s = scatter_.data();
    for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) m.set(i, j, *s++ * inv);
    return m;
}

CovarianceAccumulator merge(const CovarianceAccumulator& a, const CovarianceAccumulator& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("merge: dimension mismatch");
    if (a.count_ == 0) return b;
    if (b.count_ == 0) return a;
    CovarianceAccumulator out(a.dim_);
    out.count_ = a.count_ + b.count_;
    const double nb_over_n = double(b.count_) / double(out.count_);
    const double w = double(a.count_) * double(b.count_) / double(out.count_);
    std::vector<double> d(a.dim_);
    for (int i = 0; i < a.dim_; ++i) {
        d[i] = b.mean_[i] - a.mean_[i];
        out.mean_[i] = a.mean_[i] + d[i] * nb_over_n;
    }
    std::size_t k = 0;
    for (int i = 0; i < a.dim_; ++i)
        for (int j = i; j < a.dim_; ++j, ++k)
            out.scatter_[k] = a.scatter_[k] + b.scatter_[k] + w * d[i] * d[j];
    return out;
}

EigDecomposition eig_sym(const SymMatrix& m) {
    const int n = m.dim();
    if (n < 1) throw std::invalid_argument("eig_sym: empty matrix");
    if (n > 4096) throw std::invalid_argument("eig_sym: dim above 4096 unsupported");
    for (double v : m.data())
        if (!std::isfinite(v)) throw std::invalid_argument("eig_sym: non-finite entry");

    std::vector<double> a(m.data().begin(), m.data().end());
    std::vector<double> v(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[std::size_t(i) * n + i] = 1.0;

    const auto at = [&](int i, int j) -> double& { return a[std::size_t(i) * n + j]; };

    double full_norm = 0.0;
    for (double e : a) full_norm += e * e;
    full_norm = std::sqrt(full_norm);
    const double stop = 1e-12 * full_norm;

    const auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * at(i, j) * at(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                at(p, p) -= h;
                at(q, q) += h;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = at(r, p), arq = at(r, q);
                    const double nrp = arp - s * (arq + tau * arp);
                    const double nrq = arq + s * (arp - tau * arq);
                    at(r, p) = nrp;
                    at(p, r) = nrp;
                    at(r, q) = nrq;
                    at(q, r) = nrq;
                }
                for (int r = 0; r < n; ++r) {
                    double& vrp = v[std::size_t(r) * n + p];
                    double& vrq = v[std::size_t(r) * n + q];
                    const double op = vrp, oq = vrq;
                    vrp = op - s * (oq + tau * op);
                    vrq = oq + s * (op - tau * oq);
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return at(i, i) > at(j, j); });

    EigDecomposition out;
    out.dim = n;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(std::size_t(n) * n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        out.eigenvalues[k] = at(src, src);
        double sign = 1.0;
        for (int i = 0; i < n; ++i) {
            const double x = v[std::size_t(i) * n + src];
            if (std::abs(x) > 1e-12) {
                sign = x < 0.0 ? -1.0 : 1.0;
                break;
            }
        }
        for (int i = 0; i < n; ++i)
            out.eigenvectors[std::size_t(i) * n + k] = sign * v[std::size_t(i) * n + src];
    }
    return out;
}

}  // namespace saabtk
