#include "saabtk/cli.hpp"

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "saabtk/analysis.hpp"
#include "saabtk/errors.hpp"
#include "saabtk/kernel_io.hpp"
#include "saabtk/residuals.hpp"
#include "saabtk/training.hpp"
#include "saabtk/viz.hpp"

namespace saabtk {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string trace_csv(std::span<const ConvergenceTrace> traces) {
    std::string out = "stage,M,frobenius_diff\n";
    for (std::size_t s = 0; s < traces.size(); ++s)
        for (const auto& [m, diff] : traces[s].checkpoints)
            out += std::to_string(s + 1) + "," + std::to_string(m) + "," + fmt12(diff) + "\n";
    return out;
}

Channel parse_channel(const std::string& text) {
    const auto c = channel_from_string(text);
    if (!c) throw UsageError("--channel must be one of y, cb, cr, gray");
    return *c;
}

PredMode parse_mode(const std::string& text) {
    const auto m = pred_mode_from_string(text);
    if (!m || *m == PredMode::SynthAr1)
        throw UsageError("--mode must be one of planar, dc, horizontal, vertical");
    return *m;
}

AcOrdering parse_ordering(const std::string& text) {
    const auto o = ordering_from_string(text);
    if (!o) throw UsageError("--ordering must be one of native, energy, zigzag");
    return *o;
}

PlaneFormat deduce_format(const std::string& format, const std::string& path) {
    if (format == "pgm") return PlaneFormat::Pgm;
    if (format == "y4m") return PlaneFormat::Y4m;
    if (format == "auto") {
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") return PlaneFormat::Pgm;
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".y4m") return PlaneFormat::Y4m;
        throw UsageError("--format auto needs a .pgm or .y4m path (--in)");
    }
    throw UsageError("--format must be one of pgm, y4m, auto");
}

// AC ordering for viz: measured on blocks when given, else by stored kernel
// energies (training eigenvalue order for Saab).
std::vector<int> viz_order(const AffineOrthoKernel& kernel, AcOrdering ordering,
                           const std::optional<BlockSet>& blocks) {
    if (ordering == AcOrdering::Zigzag) {
        if (kernel.kind != KernelKind::Dct)
            throw UsageError("--ordering zigzag applies to DCT kernels only");
        return zigzag_ac_order(kernel.n);
    }
    std::vector<int> order(kernel.dim - 1);
    for (int i = 1; i < kernel.dim; ++i) order[i - 1] = i;
    if (ordering == AcOrdering::Native) return order;
    if (blocks) return order_coeffs(AnyKernel{kernel}, *blocks, AcOrdering::MeanEnergyDesc);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return kernel.energies[a] > kernel.energies[b]; });
    return order;
}

struct Options {
    // shared
    int n = 0;
    std::string in, out, trace_path, plan_text;
    std::string kind, mode = "planar", channel = "y", ordering = "energy", format = "auto";
    std::vector<std::string> kernels;
    // synthesis
    double rho = 0.9, sigma = 0.02;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    int frame = 0;
    // training
    double epsilon = 1.5e-4, scale = 1.0;
    std::size_t delta_m = 5000, max_samples = 0;
    // viz
    int columns = 8, top = -1;
};

std::size_t effective_max(std::size_t max_samples) {
    return max_samples == 0 ? std::numeric_limits<std::size_t>::max() : max_samples;
}

int cmd_gen(const Options& o) {
    if (o.count < 1) throw UsageError("--count must be >= 1");
    const BlockSet set = synth_ar1(o.rho, o.sigma, o.n, o.count, o.seed);
    save_blocks(set, o.out);
    return 0;
}

int cmd_extract(const Options& o) {
    const Plane plane =
        load_plane(o.in, deduce_format(o.format, o.in), o.frame, parse_channel(o.channel));
    const BlockSet set = extract_residuals(plane, o.n, parse_mode(o.mode));
    save_blocks(set, o.out);
    return 0;
}

int cmd_fit(const Options& o) {
    FitKind kind;
    if (o.kind == "dct")
        kind = FitKind::Dct;
    else if (o.kind == "klt")
        kind = FitKind::Klt;
    else if (o.kind == "saab")
        kind = FitKind::Saab;
    else
        throw UsageError("--kind must be one of dct, klt, saab");

    BlockSet blocks;
    StagePlan plan;
    if (kind == FitKind::Dct) {
        if (o.n == 0) throw UsageError("fit --kind dct requires --n");
        blocks.n = o.n;
        plan.stages = {o.n};
    } else {
        if (o.in.empty()) throw UsageError("fit --kind klt/saab requires --in");
        blocks = load_blocks(o.in);
        if (kind == FitKind::Saab) {
            if (o.plan_text.empty()) throw UsageError("fit --kind saab requires --plan");
            plan = StagePlan::parse(o.plan_text);
        } else {
            plan.stages = {blocks.n};
        }
    }

    FitParams params;
    params.epsilon = o.epsilon;
    params.delta_m = o.delta_m;
    params.max_samples = effective_max(o.max_samples);
    params.scale = o.scale;
    params.seed = o.seed;
    params.source_label = o.in;
    const FitReport report = fit_pipeline(blocks, kind, plan, params);
    save_kernel(report.kernel, o.out);
    if (!o.trace_path.empty()) write_file_atomic(o.trace_path, trace_csv(report.traces));
    return 0;
}

int cmd_analyze(const Options& o) {
    const BlockSet blocks = load_blocks(o.in);
    std::vector<EnergyReport> tables;
    for (const auto& path : o.kernels) tables.push_back(energy_table(load_kernel(path), blocks));
    write_file_atomic(o.out, table_csv(tables));
    return 0;
}

int cmd_curve(const Options& o) {
    const BlockSet blocks = load_blocks(o.in);
    const AcOrdering ordering = parse_ordering(o.ordering);
    std::vector<CompactionCurve> curves;
    for (const auto& path : o.kernels)
        curves.push_back(cumulative_ac_curve(load_kernel(path), blocks, ordering));
    write_file_atomic(o.out, curve_csv(curves));
    return 0;
}

int cmd_viz(const Options& o) {
    const AnyKernel any = load_kernel(o.kernels.front());
    const auto* kernel = std::get_if<AffineOrthoKernel>(&any);
    if (!kernel) throw UsageError("viz supports dct and saab kernels (--kernel)");
    std::optional<BlockSet> blocks;
    if (!o.in.empty()) blocks = load_blocks(o.in);
    const std::vector<int> order = viz_order(*kernel, parse_ordering(o.ordering), blocks);
    write_pgm(basis_grid(*kernel, o.columns, order, o.top), o.out);
    return 0;
}

int cmd_roundtrip(const Options& o) {
    const AnyKernel any = load_kernel(o.kernels.front());
    const auto* kernel = std::get_if<AffineOrthoKernel>(&any);
    if (!kernel) throw UsageError("roundtrip supports dct and saab kernels (--kernel)");
    const BlockSet blocks = load_blocks(o.in);
    if (blocks.n != kernel->n) throw std::invalid_argument("roundtrip: block side mismatch");
    double worst = 0.0;
    for (std::size_t b = 0; b < blocks.count(); ++b) {
        const BlockVector x = blocks.block_vector(b);
        const BlockVector back = inverse(*kernel, forward(*kernel, x));
        for (int i = 0; i < kernel->dim; ++i)
            worst = std::max(worst, std::abs(back.values[i] - x.values[i]));
    }
    const std::string report = "transform,blocks,max_abs_error\n" + kernel->label() + "," +
                               std::to_string(blocks.count()) + "," + fmt12(worst) + "\n";
    if (o.out.empty())
        std::cout << report;
    else
        write_file_atomic(o.out, report);
    return 0;
}

int cmd_convergence(const Options& o) {
    const BlockSet blocks = load_blocks(o.in);
    const int dim = blocks.n * blocks.n;
    if (!(o.scale > 0.0)) throw UsageError("--scale must be positive");
    const double inv_scale = 1.0 / o.scale;
    std::size_t next = 0;
    const SampleSource src = [&](std::span<double> out) {
        if (next >= blocks.count()) return false;
        const auto b = blocks.block(next++);
        for (int i = 0; i < dim; ++i) out[i] = b[i] * inv_scale;
        return true;
    };
    const auto [acc, trace] =
        convergence_monitor(src, dim, o.delta_m, o.epsilon, effective_max(o.max_samples));
    (void)acc;
    write_file_atomic(o.out, trace_csv({&trace, 1}));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"block transform toolkit: train and apply DCT, KLT and Saab transforms "
                 "to residual blocks and measure their energy compaction"};
    app.name("saabtk");
    app.require_subcommand(1);

    Options o;
    int (*action)(const Options&) = nullptr;

    auto* gen = app.add_subcommand("gen", "synthesize AR(1) residual blocks");
    gen->add_option("--n", o.n, "block side (2, 4, 8 or 16)")->required();
    gen->add_option("--rho", o.rho, "AR(1) correlation in [0,1)");
    gen->add_option("--sigma", o.sigma, "marginal standard deviation");
    gen->add_option("--count", o.count, "number of blocks")->required();
    gen->add_option("--seed", o.seed, "RNG seed");
    gen->add_option("--out", o.out, "output block file")->required();
    gen->callback([&] { action = cmd_gen; });

    auto* extract = app.add_subcommand("extract", "intra-predict a plane and emit residual blocks");
    extract->add_option("--in", o.in, "input .pgm or .y4m")->required();
    extract->add_option("--format", o.format, "pgm, y4m or auto");
    extract->add_option("--frame", o.frame, "frame index (y4m)");
    extract->add_option("--channel", o.channel, "y, cb or cr (y4m)");
    extract->add_option("--n", o.n, "block side")->required();
    extract->add_option("--mode", o.mode, "planar, dc, horizontal or vertical")->required();
    extract->add_option("--out", o.out, "output block file")->required();
    extract->callback([&] { action = cmd_extract; });

    auto* fit = app.add_subcommand("fit", "fit a transform kernel from blocks");
    fit->add_option("--kind", o.kind, "dct, klt or saab")->required();
    fit->add_option("--n", o.n, "block side (dct)");
    fit->add_option("--plan", o.plan_text, "stage list, e.g. 4 or 2x2,2x2 (saab)");
    fit->add_option("--in", o.in, "training block file (klt, saab)");
    fit->add_option("--epsilon", o.epsilon, "covariance convergence threshold");
    fit->add_option("--delta-m", o.delta_m, "checkpoint spacing in samples");
    fit->add_option("--max-samples", o.max_samples, "sample cap per covariance (0 = no cap)");
    fit->add_option("--scale", o.scale, "divisor applied to samples before accumulation");
    fit->add_option("--seed", o.seed, "seed recorded in kernel metadata");
    fit->add_option("--out", o.out, "output kernel file")->required();
    fit->add_option("--trace", o.trace_path, "optional convergence trace CSV");
    fit->callback([&] { action = cmd_fit; });

    auto* analyze = app.add_subcommand("analyze", "DC/AC/total energy table for kernels on blocks");
    analyze->add_option("--kernel", o.kernels, "kernel file (repeatable)")->required();
    analyze->add_option("--in", o.in, "block file")->required();
    analyze->add_option("--out", o.out, "output CSV")->required();
    analyze->callback([&] { action = cmd_analyze; });

    auto* curve = app.add_subcommand("curve", "cumulative AC energy curves");
    curve->add_option("--kernel", o.kernels, "kernel file (repeatable)")->required();
    curve->add_option("--in", o.in, "block file")->required();
    curve->add_option("--ordering", o.ordering, "native, energy or zigzag");
    curve->add_option("--out", o.out, "output CSV")->required();
    curve->callback([&] { action = cmd_curve; });

    auto* viz = app.add_subcommand("viz", "render basis functions to a PGM grid");
    viz->add_option("--kernel", o.kernels, "kernel file")->required()->expected(1);
    viz->add_option("--columns", o.columns, "tiles per row");
    viz->add_option("--top", o.top, "keep only the first T tiles");
    viz->add_option("--ordering", o.ordering, "native, energy or zigzag");
    viz->add_option("--in", o.in, "optional block file for measured energy ordering");
    viz->add_option("--out", o.out, "output PGM")->required();
    viz->callback([&] { action = cmd_viz; });

    auto* roundtrip = app.add_subcommand("roundtrip", "max reconstruction error over blocks");
    roundtrip->add_option("--kernel", o.kernels, "kernel file")->required()->expected(1);
    roundtrip->add_option("--in", o.in, "block file")->required();
    roundtrip->add_option("--out", o.out, "optional output CSV (default stdout)");
    roundtrip->callback([&] { action = cmd_roundtrip; });

    auto* convergence = app.add_subcommand("convergence", "covariance convergence trace only");
    convergence->add_option("--in", o.in, "block file")->required();
    convergence->add_option("--epsilon", o.epsilon, "convergence threshold");
    convergence->add_option("--delta-m", o.delta_m, "checkpoint spacing");
    convergence->add_option("--max-samples", o.max_samples, "sample cap (0 = no cap)");
    convergence->add_option("--scale", o.scale, "sample divisor");
    convergence->add_option("--out", o.out, "output trace CSV")->required();
    convergence->callback([&] { action = cmd_convergence; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        return action(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace saabtk
