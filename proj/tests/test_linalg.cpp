#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "saabtk/errors.hpp"
#include "saabtk/linalg.hpp"

using namespace saabtk;

namespace {

// test-local RNG, independent of library code
std::mt19937_64 rng(0x5eed1);

double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

SymMatrix random_sym(int dim, double scale = 1.0) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) m.set(i, j, scale * uniform(-1.0, 1.0));
    return m;
}

}  // namespace

TEST_CASE("accumulator: single sample gives zero scatter") {
    CovarianceAccumulator acc(2);
    acc.add(std::vector<double>{0.0, 0.0});
    CHECK(acc.count() == 1);
    CHECK(acc.mean()[0] == 0.0);
    CHECK(acc.mean()[1] == 0.0);
    const SymMatrix cov = acc.covariance();
    CHECK(cov(0, 0) == 0.0);
    CHECK(cov(1, 1) == 0.0);
}

TEST_CASE("accumulator: hand-expanded two-sample scatter") {
    // samples (0,0), (2,2): mean (1,1); centered outer products sum to [[2,2],[2,2]]
    CovarianceAccumulator acc(2);
    acc.add(std::vector<double>{0.0, 0.0});
    acc.add(std::vector<double>{2.0, 2.0});
    CHECK(acc.mean()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(acc.mean()[1] == doctest::Approx(1.0).epsilon(1e-15));
    const SymMatrix s = acc.scatter();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(s(i, j) == doctest::Approx(2.0).epsilon(1e-14));
    // population normalization: scatter / n
    const SymMatrix cov = acc.covariance();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(cov(i, j) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("accumulator: unit-variance Monte Carlo recovers identity") {
    const int dim = 4;
    CovarianceAccumulator acc(dim);
    std::vector<double> x(dim);
    for (int s = 0; s < 100000; ++s) {
        for (auto& v : x) v = gauss();
        acc.add(x);
    }
    const SymMatrix cov = acc.covariance();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) < 0.05);
}

TEST_CASE("accumulator: AR(1) process covariance matches rho^|i-j|") {
    const int dim = 8;
    const double rho = 0.9;
    const double innovation = std::sqrt(1.0 - rho * rho);
    CovarianceAccumulator acc(dim);
    std::vector<double> x(dim);
    for (int s = 0; s < 100000; ++s) {
        x[0] = gauss();
        for (int i = 1; i < dim; ++i) x[i] = rho * x[i - 1] + innovation * gauss();
        acc.add(x);
    }
    const SymMatrix cov = acc.covariance();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            CHECK(std::abs(cov(i, j) - std::pow(rho, std::abs(i - j))) < 0.02);
}

TEST_CASE("accumulator: dimension mismatch rejected") {
    CovarianceAccumulator acc(3);
    CHECK_THROWS_AS(acc.add(std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(acc.covariance(), InsufficientDataError);
}

TEST_CASE("merge: identity element and count additivity") {
    CovarianceAccumulator a(2), empty(2);
    a.add(std::vector<double>{1.0, 2.0});
    a.add(std::vector<double>{-1.0, 0.5});
    const CovarianceAccumulator m = merge(empty, a);
    CHECK(m.count() == a.count());
    CHECK(frobenius_diff(m.scatter(), a.scatter()) == 0.0);

    CovarianceAccumulator b(2);
    b.add(std::vector<double>{0.25, -4.0});
    CHECK(merge(a, b).count() == a.count() + b.count());
    CHECK_THROWS_AS(merge(a, CovarianceAccumulator(3)), std::invalid_argument);
}

TEST_CASE("merge: two halves equal one pass") {
    const int dim = 6;
    CovarianceAccumulator whole(dim), first(dim), second(dim);
    std::vector<double> x(dim);
    for (int s = 0; s < 1000; ++s) {
        for (auto& v : x) v = uniform(-2.0, 2.0);
        whole.add(x);
        (s < 500 ? first : second).add(x);
    }
    const CovarianceAccumulator merged = merge(first, second);
    const SymMatrix cw = whole.covariance();
    const SymMatrix cm = merged.covariance();
    CHECK(frobenius_diff(cw, cm) < 1e-12 * cw.trace());
    for (int i = 0; i < dim; ++i)
        CHECK(merged.mean()[i] == doctest::Approx(whole.mean()[i]).epsilon(1e-12));
}

TEST_CASE("merge: path independence over random partitions") {
    const int dim = 5;
    std::vector<std::vector<double>> samples(400, std::vector<double>(dim));
    for (auto& s : samples)
        for (auto& v : s) v = gauss();

    CovarianceAccumulator single(dim);
    for (const auto& s : samples) single.add(s);

    // three shards merged in a different tree shape
    CovarianceAccumulator s1(dim), s2(dim), s3(dim);
    for (std::size_t i = 0; i < samples.size(); ++i)
        (i % 3 == 0 ? s1 : i % 3 == 1 ? s2 : s3).add(samples[i]);
    const CovarianceAccumulator tree = merge(s1, merge(s2, s3));

    const SymMatrix a = single.covariance();
    const SymMatrix b = tree.covariance();
    CHECK(frobenius_diff(a, b) < 1e-12 * a.trace());
}

TEST_CASE("covariance is positive semidefinite for arbitrary data") {
    const int dim = 12;
    CovarianceAccumulator acc(dim);
    std::vector<double> x(dim);
    for (int s = 0; s < 300; ++s) {
        for (auto& v : x) v = uniform(-5.0, 5.0) + (s % 7);
        acc.add(x);
    }
    const SymMatrix cov = acc.covariance();
    const EigDecomposition eig = eig_sym(cov);
    CHECK(eig.eigenvalues.back() >= -1e-9 * cov.trace());
}

TEST_CASE("frobenius_diff: basics and brute-force oracle") {
    const SymMatrix a = random_sym(4);
    CHECK(frobenius_diff(a, a) == 0.0);

    SymMatrix eye(2), zero(2);
    eye.set(0, 0, 1.0);
    eye.set(1, 1, 1.0);
    CHECK(frobenius_diff(eye, zero) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const SymMatrix x = random_sym(8), y = random_sym(8);
    double brute = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) brute += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
    brute = std::sqrt(brute);
    CHECK(std::abs(frobenius_diff(x, y) - brute) < 1e-14);

    CHECK_THROWS_AS(frobenius_diff(x, random_sym(4)), std::invalid_argument);
}

TEST_CASE("eig_sym: identity and diagonal inputs") {
    SymMatrix eye(3);
    for (int i = 0; i < 3; ++i) eye.set(i, i, 1.0);
    const EigDecomposition e = eig_sym(eye);
    for (int k = 0; k < 3; ++k) CHECK(e.eigenvalues[k] == doctest::Approx(1.0).epsilon(1e-14));

    SymMatrix d(3);
    d.set(0, 0, 5.0);
    d.set(1, 1, 2.0);
    d.set(2, 2, 9.0);
    const EigDecomposition ed = eig_sym(d);
    CHECK(ed.eigenvalues[0] == doctest::Approx(9.0));
    CHECK(ed.eigenvalues[1] == doctest::Approx(5.0));
    CHECK(ed.eigenvalues[2] == doctest::Approx(2.0));
    // axis eigenvectors paired with the sorted values
    CHECK(ed.vec(2, 0) == doctest::Approx(1.0));
    CHECK(ed.vec(0, 1) == doctest::Approx(1.0));
    CHECK(ed.vec(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("eig_sym: hand 2x2 characteristic polynomial") {
    SymMatrix m(2);
    m.set(0, 0, 2.0);
    m.set(1, 1, 2.0);
    m.set(0, 1, 1.0);
    const EigDecomposition e = eig_sym(m);
    CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(e.vec(0, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vec(1, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vec(0, 1) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vec(1, 1) == doctest::Approx(-r).epsilon(1e-12));
}

TEST_CASE("eig_sym: reconstruction, trace and orthonormality up to dim 256") {
    for (int dim : {2, 5, 16, 64, 256}) {
        const SymMatrix m = random_sym(dim, 3.0);
        const EigDecomposition e = eig_sym(m);

        double trace_sum = 0.0;
        for (double v : e.eigenvalues) trace_sum += v;
        CHECK(std::abs(trace_sum - m.trace()) <= 1e-9 * (1.0 + std::abs(m.trace())));

        for (int k = 0; k + 1 < dim; ++k) CHECK(e.eigenvalues[k] >= e.eigenvalues[k + 1]);

        // columns orthonormal
        for (int a = 0; a < dim; a += std::max(1, dim / 8))
            for (int b = a; b < dim; b += std::max(1, dim / 8)) {
                double dot = 0.0;
                for (int i = 0; i < dim; ++i) dot += e.vec(i, a) * e.vec(i, b);
                CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
            }

        // residual ||A v - lambda v|| per pair
        for (int k = 0; k < dim; k += std::max(1, dim / 8)) {
            double res = 0.0;
            for (int i = 0; i < dim; ++i) {
                double av = 0.0;
                for (int j = 0; j < dim; ++j) av += m(i, j) * e.vec(j, k);
                const double d = av - e.eigenvalues[k] * e.vec(i, k);
                res += d * d;
            }
            CHECK(std::sqrt(res) < 1e-8 * (1.0 + std::abs(e.eigenvalues[k])));
        }

        // V diag(lambda) V^T reconstructs the input
        double err = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                double v = 0.0;
                for (int k = 0; k < dim; ++k) v += e.eigenvalues[k] * e.vec(i, k) * e.vec(j, k);
                const double d = v - m(i, j);
                err += (i == j ? 1.0 : 2.0) * d * d;
            }
        CHECK(std::sqrt(err) < 1e-8 * (1.0 + std::abs(m.trace())));
    }
}

TEST_CASE("eig_sym: deterministic output and sign convention") {
    const SymMatrix m = random_sym(16);
    const EigDecomposition a = eig_sym(m);
    const EigDecomposition b = eig_sym(m);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.eigenvectors == b.eigenvectors);
    for (int k = 0; k < 16; ++k) {
        for (int i = 0; i < 16; ++i) {
            if (std::abs(a.vec(i, k)) > 1e-12) {
                CHECK(a.vec(i, k) > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("eig_sym: rejects non-finite input") {
    SymMatrix m(2);
    m.set(0, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(eig_sym(m), std::invalid_argument);
}
