#include "saabtk/training.hpp"

#include <cmath>
#include <stdexcept>

#include "saabtk/errors.hpp"

namespace saabtk {

std::pair<CovarianceAccumulator, ConvergenceTrace> convergence_monitor(
    const SampleSource& source, int dim, std::size_t delta_m, double epsilon,
    std::size_t max_samples) {
    if (dim < 1) throw std::invalid_argument("convergence_monitor: dim must be >= 1");
    if (delta_m < 1) throw std::invalid_argument("convergence_monitor: delta_m must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("convergence_monitor: epsilon must be > 0");
    if (max_samples < 2 * delta_m)
        throw std::invalid_argument("convergence_monitor: max_samples below 2 * delta_m");

    CovarianceAccumulator acc(dim);
    ConvergenceTrace tr;
    tr.delta_m = delta_m;
    tr.epsilon = epsilon;

    std::vector<double> buf(dim);
    SymMatrix prev;
    bool have_prev = false;
    bool exhausted = false;
    while (!exhausted && acc.count() < max_samples && !tr.converged_at) {
        const std::size_t next_cp = (acc.count() / delta_m + 1) * delta_m;
        const std::size_t target = std::min(next_cp, max_samples);
        while (acc.count() < target) {
            if (!source(buf)) {
                exhausted = true;
                break;
            }
            acc.add(buf);
        }
        if (acc.count() == next_cp) {
            SymMatrix cur = acc.covariance();
            if (have_prev) {
                const double diff = frobenius_diff(cur, prev);
                tr.checkpoints.emplace_back(acc.count(), diff);
                if (diff < epsilon) tr.converged_at = acc.count();
            }
            prev = std::move(cur);
            have_prev = true;
        }
    }
    if (acc.count() < 2 * delta_m)
        throw InsufficientDataError("convergence_monitor: stream exhausted before 2 * delta_m samples");
    tr.samples_consumed = acc.count();
    return {std::move(acc), std::move(tr)};
}

double bias_select(std::span<const double> norms, double margin) {
    if (norms.empty()) throw InsufficientDataError("bias_select: no training norms");
    if (!(margin >= 1.0)) throw std::invalid_argument("bias_select: margin must be >= 1");
    double m = 0.0;
    for (double v : norms) m = std::max(m, v);
    return margin * m;
}

namespace {

KernelMeta make_meta(const BlockSet& blocks, const FitParams& p, std::size_t sample_count) {
    KernelMeta meta;
    meta.sample_count = sample_count;
    meta.source = p.source_label.empty() ? blocks.provenance : p.source_label;
    meta.seed = p.seed ? p.seed : blocks.seed;
    meta.epsilon = p.epsilon;
    meta.delta_m = p.delta_m;
    meta.scale = p.scale;
    return meta;
}

}  // namespace

FitReport fit_pipeline(const BlockSet& blocks, FitKind kind, const StagePlan& plan,
                       const FitParams& p) {
    if (!(p.scale > 0.0)) throw std::invalid_argument("fit_pipeline: scale must be positive");
    if (!(p.margin >= 1.0)) throw std::invalid_argument("fit_pipeline: margin must be >= 1");
    const int n = blocks.n;
    const int dim = n * n;
    const double inv_scale = 1.0 / p.scale;

    FitReport rep;
    rep.margin = p.margin;
    rep.block_count = blocks.count();
    rep.source_label = p.source_label.empty() ? blocks.provenance : p.source_label;

    if (kind == FitKind::Dct) {
        AffineOrthoKernel k = dct_kernel(n);
        k.meta = make_meta(blocks, p, 0);
        rep.kernel = std::move(k);
        return rep;
    }

    if (blocks.count() == 0) throw InsufficientDataError("fit_pipeline: empty block set");

    if (kind == FitKind::Klt) {
        std::size_t next = 0;
        const SampleSource src = [&](std::span<double> out) {
            if (next >= blocks.count()) return false;
            const auto b = blocks.block(next++);
            for (int i = 0; i < dim; ++i) out[i] = b[i] * inv_scale;
            return true;
        };
        auto [acc, trace] = convergence_monitor(src, dim, p.delta_m, p.epsilon, p.max_samples);
        KltKernel k = klt_kernel(acc);
        k.meta = make_meta(blocks, p, acc.count());
        rep.traces.push_back(std::move(trace));
        rep.kernel = std::move(k);
        return rep;
    }

    // Saab: one monitored covariance per stage over DC-removed stage inputs;
    // bias basis is the max input norm over the whole training set.
    if (!plan.valid() || !plan.supported_saab())
        throw std::invalid_argument("fit_pipeline: unsupported stage plan " + plan.label());
    if (plan.block_side() != n)
        throw std::invalid_argument("fit_pipeline: block side does not match plan");

    const std::size_t count = blocks.count();
    std::vector<double> repdata(blocks.data.size());
    for (std::size_t i = 0; i < repdata.size(); ++i) repdata[i] = blocks.data[i] * inv_scale;

    std::vector<double> composed_m(std::size_t(dim) * dim, 0.0);
    std::vector<double> composed_b(dim, 0.0);
    for (int i = 0; i < dim; ++i) composed_m[std::size_t(i) * dim + i] = 1.0;

    int grid = n;
    int channels = 1;
    std::vector<SaabStage> stages;
    for (int s_t : plan.stages) {
        const int d = s_t * s_t * channels;
        const std::vector<int> map = stage_gather_map(grid, s_t, channels);
        const int positions = dim / d;
        const double inv_sqrt_d = 1.0 / std::sqrt(double(d));

        std::size_t cursor = 0;  // over block * position
        const std::size_t total = count * std::size_t(positions);
        std::vector<double> v(d);
        const SampleSource src = [&](std::span<double> out) {
            if (cursor >= total) return false;
            const std::size_t b = cursor / positions;
            const int pos = int(cursor % positions);
            ++cursor;
            const double* base = repdata.data() + b * dim;
            double s = 0.0;
            for (int l = 0; l < d; ++l) {
                v[l] = base[map[std::size_t(pos) * d + l]];
                s += v[l];
            }
            const double dc = s * inv_sqrt_d;
            for (int l = 0; l < d; ++l) out[l] = v[l] - dc * inv_sqrt_d;
            return true;
        };
        auto [acc, trace] = convergence_monitor(src, d, p.delta_m, p.epsilon, p.max_samples);

        SaabStage st = saab_ac_filters(acc);
        st.subblock = s_t;
        st.channels = channels;

        // full pass: bias basis, DC energy, next representation (bias added
        // once the max norm is known)
        double max_norm = 0.0, dc2 = 0.0;
        std::vector<double> next_rep(dim);
        for (std::size_t b = 0; b < count; ++b) {
            double* base = repdata.data() + b * dim;
            for (int pos = 0; pos < positions; ++pos) {
                double s = 0.0, e = 0.0;
                for (int l = 0; l < d; ++l) {
                    v[l] = base[map[std::size_t(pos) * d + l]];
                    s += v[l];
                    e += v[l] * v[l];
                }
                max_norm = std::max(max_norm, std::sqrt(e));
                const double dc = s * inv_sqrt_d;
                dc2 += dc * dc;
                for (int k = 0; k < d; ++k) {
                    const auto row = st.row(k);
                    double acc_v = 0.0;
                    for (int l = 0; l < d; ++l) acc_v += row[l] * v[l];
                    next_rep[std::size_t(pos) * d + k] = acc_v;
                }
            }
            for (int i = 0; i < dim; ++i) base[i] = next_rep[i];
        }
        st.bias = p.margin * max_norm;
        st.max_input_norm = max_norm;
        st.dc_energy = dc2 / double(total);
        for (std::size_t i = 0; i < repdata.size(); ++i) repdata[i] += st.bias;

        compose_saab_stage(st, map, dim, composed_m, composed_b);

        rep.traces.push_back(std::move(trace));
        rep.stage_biases.push_back(st.bias);
        rep.stage_max_norms.push_back(st.max_input_norm);
        stages.push_back(std::move(st));
        grid /= s_t;
        channels = d;
    }

    AffineOrthoKernel k;
    k.n = n;
    k.dim = dim;
    k.kind = KernelKind::Saab;
    k.plan = plan;
    k.matrix = std::move(composed_m);
    k.bias = std::move(composed_b);
    k.energies.assign(dim, 0.0);
    const auto& last = stages.back();
    for (int i = 1; i < dim; ++i) k.energies[i] = last.eigenvalues[i - 1];
    double e0 = 0.0;
    for (std::size_t b = 0; b < count; ++b) {
        const auto blk = blocks.block(b);
        const auto row0 = k.row(0);
        double c0 = 0.0;
        for (int i = 0; i < dim; ++i) c0 += row0[i] * blk[i] * inv_scale;
        e0 += c0 * c0;
    }
    k.energies[0] = e0 / double(count);
    k.meta = make_meta(blocks, p, count);
    rep.kernel = std::move(k);
    return rep;
}

}  // namespace saabtk
