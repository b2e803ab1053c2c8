#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "saabtk/analysis.hpp"
#include "saabtk/errors.hpp"
#include "saabtk/residuals.hpp"

using namespace saabtk;

namespace {

std::mt19937_64 rng(0xa11a);

BlockSet random_blocks(int n, std::size_t count, double scale = 1.0) {
    BlockSet set;
    set.n = n;
    set.data.resize(count * std::size_t(n) * n);
    for (auto& v : set.data) v = scale * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return set;
}

}  // namespace

TEST_CASE("energy_table: DC agreement between DCT and one-stage Saab, totals conserved") {
    BlockSet train = synth_ar1(0.95, 1.0, 4, 20000, 7);
    const AffineOrthoKernel saab1 = saab_fit_multistage(train, StagePlan{{4}});
    const AffineOrthoKernel saab2 = saab_fit_multistage(train, StagePlan{{2, 2}});
    const AffineOrthoKernel dct = dct_kernel(4);

    const BlockSet eval = random_blocks(4, 2000, 2.0);
    const EnergyReport td = energy_table(AnyKernel{dct}, eval);
    const EnergyReport t1 = energy_table(AnyKernel{saab1}, eval);
    const EnergyReport t2 = energy_table(AnyKernel{saab2}, eval);

    CHECK(std::abs(td.dc_energy - t1.dc_energy) < 1e-12 * td.dc_energy);
    CHECK(std::abs(td.total_energy - t1.total_energy) < 1e-10 * td.total_energy);
    CHECK(std::abs(td.total_energy - t2.total_energy) < 1e-10 * td.total_energy);

    // the table decomposition is internally consistent
    for (const auto& t : {td, t1, t2}) {
        CHECK(t.dc_energy + t.ac_energy == doctest::Approx(t.total_energy).epsilon(1e-12));
        for (double e : t.per_index_mean_energy) CHECK(e >= 0.0);
    }

    // total equals mean block energy
    double mean_energy = 0.0;
    for (double v : eval.data) mean_energy += v * v;
    mean_energy /= double(eval.count());
    CHECK(td.total_energy == doctest::Approx(mean_energy).epsilon(1e-10));

    CHECK_THROWS_AS(energy_table(AnyKernel{dct}, random_blocks(8, 10)), std::invalid_argument);
}

TEST_CASE("energy_table: two-stage Saab DC energy drops on strongly correlated data") {
    BlockSet train = synth_ar1(0.95, 1.0, 4, 20000, 31);
    const AffineOrthoKernel one = saab_fit_multistage(train, StagePlan{{4}});
    const AffineOrthoKernel two = saab_fit_multistage(train, StagePlan{{2, 2}});
    const EnergyReport t1 = energy_table(AnyKernel{one}, train);
    const EnergyReport t2 = energy_table(AnyKernel{two}, train);
    CHECK(t2.dc_energy < t1.dc_energy);
}

TEST_CASE("order_coeffs: native, energy sort, zigzag enumeration") {
    const AffineOrthoKernel dct = dct_kernel(4);
    const BlockSet blocks = random_blocks(4, 200);

    const std::vector<int> native = order_coeffs(AnyKernel{dct}, blocks, AcOrdering::Native);
    for (int i = 0; i < 15; ++i) CHECK(native[i] == i + 1);

    // zigzag for n=4: the standard diagonal scan
    const std::vector<std::pair<int, int>> expect = {{0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2},
                                                     {0, 3}, {1, 2}, {2, 1}, {3, 0}, {3, 1},
                                                     {2, 2}, {1, 3}, {2, 3}, {3, 2}, {3, 3}};
    const std::vector<int> zz = order_coeffs(AnyKernel{dct}, blocks, AcOrdering::Zigzag);
    REQUIRE(zz.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(zz[i] == expect[i].first * 4 + expect[i].second);

    BlockSet train = synth_ar1(0.9, 1.0, 4, 2000, 3);
    const AffineOrthoKernel saab = saab_fit_multistage(train, StagePlan{{4}});
    CHECK_THROWS_AS(order_coeffs(AnyKernel{saab}, blocks, AcOrdering::Zigzag),
                    std::invalid_argument);
}

TEST_CASE("order_coeffs: measured energies sorted descending with index tie-break") {
    // blocks built from two DCT basis rows so AC energies are controlled:
    // index 2 strongest, then 1, everything else zero
    const AffineOrthoKernel dct = dct_kernel(2);
    BlockSet blocks;
    blocks.n = 2;
    for (int rep = 0; rep < 10; ++rep) {
        for (int j = 0; j < 4; ++j) blocks.data.push_back(3.0 * dct.row(2)[j] + 1.0 * dct.row(1)[j]);
    }
    const std::vector<int> order = order_coeffs(AnyKernel{dct}, blocks, AcOrdering::MeanEnergyDesc);
    CHECK(order[0] == 2);
    CHECK(order[1] == 1);
    CHECK(order[2] == 3);  // tie at zero resolves by lower index
}

TEST_CASE("cumulative_ac_curve: endpoint, monotonicity, dominant coefficient") {
    BlockSet train = synth_ar1(0.9, 1.0, 4, 5000, 13);
    const AffineOrthoKernel saab = saab_fit_multistage(train, StagePlan{{4}});
    const CompactionCurve c = cumulative_ac_curve(AnyKernel{saab}, train, AcOrdering::MeanEnergyDesc);
    REQUIRE(c.values.size() == 15);
    CHECK(std::abs(c.values.back() - 100.0) < 1e-9);
    for (std::size_t i = 1; i < c.values.size(); ++i) CHECK(c.values[i] >= c.values[i - 1]);

    // all blocks equal to one AC basis vector: E_1 = 100
    const AffineOrthoKernel dct = dct_kernel(2);
    BlockSet single;
    single.n = 2;
    for (int rep = 0; rep < 8; ++rep)
        for (int j = 0; j < 4; ++j) single.data.push_back(dct.row(3)[j]);
    const CompactionCurve cs = cumulative_ac_curve(AnyKernel{dct}, single, AcOrdering::MeanEnergyDesc);
    CHECK(cs.values[0] == doctest::Approx(100.0).epsilon(1e-12));

    // zero AC energy degenerates
    BlockSet flat;
    flat.n = 2;
    for (int rep = 0; rep < 8; ++rep)
        for (int j = 0; j < 4; ++j) flat.data.push_back(0.5);
    CHECK_THROWS_AS(cumulative_ac_curve(AnyKernel{dct}, flat, AcOrdering::Native),
                    DegenerateDataError);
}

TEST_CASE("cumulative_ac_curve: scaling every block leaves E_K unchanged") {
    BlockSet blocks = synth_ar1(0.9, 1.0, 4, 3000, 17);
    BlockSet scaled = blocks;
    for (auto& v : scaled.data) v *= 7.5;
    const AffineOrthoKernel dct = dct_kernel(4);
    const CompactionCurve a = cumulative_ac_curve(AnyKernel{dct}, blocks, AcOrdering::MeanEnergyDesc);
    const CompactionCurve b = cumulative_ac_curve(AnyKernel{dct}, scaled, AcOrdering::MeanEnergyDesc);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(std::abs(a.values[i] - b.values[i]) < 1e-10 * std::max(1.0, a.values[i]));
}

TEST_CASE("cumulative_ac_curve: one-stage Saab dominates the DCT on its training set") {
    BlockSet train = synth_ar1(0.95, 1.0, 4, 20000, 19);
    const AffineOrthoKernel saab = saab_fit_multistage(train, StagePlan{{4}});
    const AffineOrthoKernel dct = dct_kernel(4);
    const CompactionCurve cs = cumulative_ac_curve(AnyKernel{saab}, train, AcOrdering::MeanEnergyDesc);
    const CompactionCurve cd = cumulative_ac_curve(AnyKernel{dct}, train, AcOrdering::MeanEnergyDesc);
    // denominators agree because the DC rows coincide and energy is conserved
    const EnergyReport ts = energy_table(AnyKernel{saab}, train);
    const EnergyReport td = energy_table(AnyKernel{dct}, train);
    CHECK(std::abs(ts.ac_energy - td.ac_energy) < 1e-10 * td.ac_energy);
    for (std::size_t k = 0; k < cs.values.size(); ++k)
        CHECK(cs.values[k] >= cd.values[k] - 1e-9 * std::max(1.0, cd.values[k]));
}

TEST_CASE("klt energy accounting on zero-mean AR(1) data") {
    // The KLT slots are not a single orthonormal basis: the k=0 direction is
    // the normalized sample mean, which on zero-mean data aligns with the top
    // eigendirection, so its energy re-counts part of AC slot 1. The AC slots
    // alone capture the block energy up to the one dropped eigendirection.
    BlockSet train = synth_ar1(0.9, 1.0, 4, 50000, 23);
    CovarianceAccumulator acc(16);
    for (std::size_t i = 0; i < train.count(); ++i) acc.add(train.block(i));
    const KltKernel klt = klt_kernel(acc);
    const EnergyReport t = energy_table(AnyKernel{klt}, train);
    double mean_energy = 0.0;
    for (double v : train.data) mean_energy += v * v;
    mean_energy /= double(train.count());
    CHECK(std::abs(t.ac_energy - mean_energy) < 0.02 * mean_energy);
    // k=0 projects onto one fixed unit direction: bounded by the top eigenvalue
    CHECK(t.dc_energy <= 1.05 * klt.eigenvalues.front());
    CHECK(t.total_energy == doctest::Approx(t.dc_energy + t.ac_energy).epsilon(1e-12));
}

TEST_CASE("compare_report: layout, gap column, round trip") {
    BlockSet train = synth_ar1(0.95, 1.0, 4, 10000, 29);
    const AffineOrthoKernel dct = dct_kernel(4);
    const AffineOrthoKernel one = saab_fit_multistage(train, StagePlan{{4}});
    const AffineOrthoKernel two = saab_fit_multistage(train, StagePlan{{2, 2}});

    std::vector<CompactionCurve> curves = {
        cumulative_ac_curve(AnyKernel{two}, train, AcOrdering::MeanEnergyDesc),
        cumulative_ac_curve(AnyKernel{dct}, train, AcOrdering::MeanEnergyDesc),
        cumulative_ac_curve(AnyKernel{one}, train, AcOrdering::MeanEnergyDesc),
    };
    std::vector<EnergyReport> tables = {
        energy_table(AnyKernel{two}, train),
        energy_table(AnyKernel{dct}, train),
        energy_table(AnyKernel{one}, train),
    };
    const ComparisonDocument doc = compare_report(curves, tables);
    // deterministic column order: dct, then one-stage saab, then multi-stage
    REQUIRE(doc.labels.size() == 3);
    CHECK(doc.labels[0] == "dct");
    CHECK(doc.labels[1] == "saab-4");
    CHECK(doc.labels[2] == "saab-2+2");
    CHECK(doc.summary_labels == doc.labels);

    const std::string tcsv = doc.table_csv();
    CHECK(tcsv.rfind("index_class,dct,saab-4,saab-2+2\nDC,", 0) == 0);
    CHECK(tcsv.find("\nAC,") != std::string::npos);
    CHECK(tcsv.find("\nTOTAL,") != std::string::npos);

    const ComparisonDocument back = ComparisonDocument::parse(tcsv, doc.curves_csv());
    CHECK(back == doc);

    // identical curves produce a zero max-gap column
    const ComparisonDocument same =
        compare_report({curves[1], curves[1]}, {tables[1], tables[1]});
    const std::string csv = same.curves_csv();
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        const auto last = line.rfind(',');
        CHECK(std::stod(line.substr(last + 1)) == 0.0);
    }

    // mixed block sets rejected
    BlockSet other = synth_ar1(0.95, 1.0, 4, 500, 29);
    auto bad = curves;
    bad.push_back(cumulative_ac_curve(AnyKernel{dct}, other, AcOrdering::Native));
    CHECK_THROWS_AS(compare_report(bad, tables), std::invalid_argument);
}

TEST_CASE("long-format CSV emitters") {
    BlockSet train = synth_ar1(0.9, 1.0, 4, 2000, 37);
    const AffineOrthoKernel dct = dct_kernel(4);
    const CompactionCurve c = cumulative_ac_curve(AnyKernel{dct}, train, AcOrdering::Zigzag);
    const std::string csv = curve_csv({&c, 1});
    CHECK(csv.rfind("transform,ordering,K,E_K_percent\ndct,zigzag,1,", 0) == 0);
    // one row per K plus header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);

    const EnergyReport t = energy_table(AnyKernel{dct}, train);
    const std::string tc = table_csv({&t, 1});
    CHECK(tc.rfind("transform,index_class,energy\ndct,DC,", 0) == 0);
}
