#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gwkit/summary.hpp"
#include "support/oracles.hpp"

using namespace gwkit;
using Catch::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("weighted mean basics", "[summary]") {
    CHECK(gw_mean(vec({1, 2, 3}), vec({1, 1, 1})) == Approx(2.0).epsilon(1e-15));
    CHECK(gw_mean(vec({1, 2, 3}), vec({1, 0, 0})) == Approx(1.0).epsilon(1e-15));
    CHECK(gw_mean(vec({5, 5, 5}), vec({0.2, 3.0, 1.4})) == Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(gw_mean(vec({1, 2}), vec({0, 0})), numeric_error);
}

TEST_CASE("weighted sd basics", "[summary]") {
    CHECK(gw_sd(vec({1, 2, 3}), vec({1, 1, 1})) == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(gw_sd(vec({4, 4, 4, 4}), vec({1, 2, 3, 4})) == 0.0);
    CHECK(gw_sd(vec({0, 2}), vec({1, 1})) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("weighted covariance basics", "[summary]") {
    const Eigen::VectorXd x = vec({1, 4, 2, 8});
    const Eigen::VectorXd w = vec({0.5, 1.5, 2.0, 0.25});
    CHECK(gw_covariance(x, x, w) == Approx(gw_sd(x, w) * gw_sd(x, w)).epsilon(1e-14));
    CHECK(gw_covariance(x, vec({7, 7, 7, 7}), w) == Approx(0.0).margin(1e-15));
    CHECK(gw_covariance(vec({0, 2}), vec({0, 4}), vec({1, 1})) == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("weighted correlation basics", "[summary]") {
    const Eigen::VectorXd x = vec({1, 4, 2, 8});
    const Eigen::VectorXd w = vec({0.5, 1.5, 2.0, 0.25});
    CHECK(gw_correlation(x, x, w) == Approx(1.0).epsilon(1e-14));
    CHECK(gw_correlation(x, (-x).eval(), w) == Approx(-1.0).epsilon(1e-14));
    // construct y with weighted cross-moment exactly zero
    Eigen::VectorXd y = vec({1, -1, 0, 0});
    const double mx = gw_mean(x, w), my = gw_mean(y, w);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4; ++i) {
        num += w[i] * (x[i] - mx) * (y[i] - my);
        den += w[i] * (x[i] - mx) * (x[i] - mx);
    }
    const Eigen::VectorXd y_orth = y - (num / den) * x;  // residualize y on x under w
    CHECK(gw_correlation(x, y_orth, w) == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(gw_correlation(x, vec({3, 3, 3, 3}), w), numeric_error);
}

TEST_CASE("weighted moments agree with loop oracles on random data", "[summary]") {
    oracle::TestRng rng(101);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 20;
        Eigen::VectorXd x(n), y(n), w(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.normal() * 3.0 + 1.0;
            y[i] = rng.normal() - 0.4 * x[i];
            w[i] = rng.uniform() + 0.05;
        }
        CHECK(gw_mean(x, w) == Approx(oracle::wmean(x, w)).epsilon(1e-13));
        CHECK(gw_sd(x, w) == Approx(oracle::wsd(x, w)).epsilon(1e-13));
        CHECK(gw_covariance(x, y, w) == Approx(oracle::wcov(x, y, w)).epsilon(1e-12));
        CHECK(gw_correlation(x, y, w) == Approx(oracle::wcorr(x, y, w)).epsilon(1e-12));
    }
}

TEST_CASE("surfaces reduce to global statistics under an all-covering boxcar", "[summary]") {
    const Dataset data = oracle::make_dataset(25, 3, 7);
    const KernelSpec kernel = KernelSpec::fixed(KernelFunction::boxcar, 1e6);
    const GwssResult res = gwss(data, data.names, kernel, DistanceMetric::euclidean());

    const Eigen::VectorXd uniform = Eigen::VectorXd::Ones(25);
    for (int j = 0; j < 3; ++j) {
        const double mean = oracle::wmean(data.values.col(j), uniform);
        const double sd = oracle::wsd(data.values.col(j), uniform);
        for (int i = 0; i < 25; ++i) {
            CHECK(res.means(i, j) == Approx(mean).epsilon(1e-13));
            CHECK(res.sds(i, j) == Approx(sd).epsilon(1e-13));
        }
    }
    REQUIRE(res.pairs.size() == 3);
    for (int q = 0; q < 3; ++q) {
        const auto& [a, b] = res.pairs[static_cast<std::size_t>(q)];
        const double cov = oracle::wcov(data.values.col(a), data.values.col(b), uniform);
        const double corr = oracle::wcorr(data.values.col(a), data.values.col(b), uniform);
        for (int i = 0; i < 25; ++i) {
            CHECK(res.covariances(i, q) == Approx(cov).margin(1e-13));
            CHECK(res.correlations(i, q) == Approx(corr).margin(1e-12));
        }
    }
}

TEST_CASE("single-neighbour boxcar windows collapse to the observation itself", "[summary]") {
    Dataset data;
    data.points.coords.resize(2, 2);
    data.points.coords << 0, 0, 10, 0;
    data.values.resize(2, 1);
    data.values << 4.0, -3.0;
    data.names = {"v"};
    // N=1 keeps only the self-distance 0; a zero radius is degenerate, so the
    // contract is an error rather than a silent point-mass window
    CHECK_THROWS_AS(gwss(data, {"v"}, KernelSpec::adaptive(KernelFunction::boxcar, 1),
                         DistanceMetric::euclidean()),
                    input_error);
    // N=2 with a boxcar covers both points at every location
    const GwssResult res = gwss(data, {"v"}, KernelSpec::adaptive(KernelFunction::boxcar, 2),
                                DistanceMetric::euclidean());
    CHECK(res.means(0, 0) == Approx(0.5));
    CHECK(res.means(1, 0) == Approx(0.5));
}

TEST_CASE("per-location surfaces match hand-weighted oracles", "[summary]") {
    const Dataset data = oracle::make_dataset(12, 3, 99);
    const double radius = 6.0;
    const KernelSpec kernel = KernelSpec::fixed(KernelFunction::bisquare, radius);
    const GwssResult res = gwss(data, data.names, kernel, DistanceMetric::euclidean());

    for (int i = 0; i < 12; ++i) {
        Eigen::VectorXd w(12);
        for (int j = 0; j < 12; ++j) {
            const double d = std::hypot(data.points.coords(i, 0) - data.points.coords(j, 0),
                                        data.points.coords(i, 1) - data.points.coords(j, 1));
            const double t = d / radius;
            w[j] = d <= radius ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
        }
        for (int j = 0; j < 3; ++j) {
            CHECK(res.means(i, j) == Approx(oracle::wmean(data.values.col(j), w)).epsilon(1e-12));
            CHECK(res.sds(i, j) == Approx(oracle::wsd(data.values.col(j), w)).epsilon(1e-12));
        }
        for (std::size_t q = 0; q < res.pairs.size(); ++q) {
            const auto& [a, b] = res.pairs[q];
            CHECK(res.covariances(i, static_cast<int>(q)) ==
                  Approx(oracle::wcov(data.values.col(a), data.values.col(b), w)).margin(1e-12));
            CHECK(res.correlations(i, static_cast<int>(q)) ==
                  Approx(oracle::wcorr(data.values.col(a), data.values.col(b), w)).margin(1e-12));
        }
    }
}

TEST_CASE("pair enumeration and labels", "[summary]") {
    const Dataset data = oracle::make_dataset(8, 3, 5);
    const GwssResult res = gwss(data, {"v1", "v2", "v3"},
                                KernelSpec::fixed(KernelFunction::gaussian, 4.0),
                                DistanceMetric::euclidean());
    REQUIRE(res.pair_labels.size() == 3);
    CHECK(res.pair_labels[0] == "v1.v2");
    CHECK(res.pair_labels[1] == "v1.v3");
    CHECK(res.pair_labels[2] == "v2.v3");
    CHECK(variable_pairs(4).size() == 6);
}

TEST_CASE("locally constant variables flag undefined correlations", "[summary]") {
    // two far-apart clusters; v2 is constant inside the first cluster only
    Dataset data;
    const int n = 8;
    data.points.coords.resize(n, 2);
    data.values.resize(n, 2);
    data.names = {"v1", "v2"};
    oracle::TestRng rng(17);
    for (int i = 0; i < n; ++i) {
        const bool left = i < 4;
        data.points.coords(i, 0) = (left ? 0.0 : 100.0) + rng.uniform();
        data.points.coords(i, 1) = rng.uniform();
        data.values(i, 0) = rng.normal();
        data.values(i, 1) = left ? 7.0 : rng.normal();
    }
    const GwssResult res = gwss(data, data.names, KernelSpec::fixed(KernelFunction::boxcar, 5.0),
                                DistanceMetric::euclidean());
    REQUIRE_FALSE(res.undefined_correlations.empty());
    for (const auto& [i, q] : res.undefined_correlations) {
        CHECK(i < 4);  // only left-cluster windows are degenerate
        CHECK(std::isnan(res.correlations(i, q)));
    }
    // right-cluster windows stay well-defined
    CHECK(std::isfinite(res.correlations(6, 0)));
}

TEST_CASE("gwss input validation", "[summary]") {
    const Dataset data = oracle::make_dataset(10, 2, 3);
    CHECK_THROWS_AS(gwss(data, {"nope"}, KernelSpec::fixed(KernelFunction::bisquare, 2.0),
                         DistanceMetric::euclidean()),
                    input_error);
    Dataset one = oracle::make_dataset(1, 2, 3);
    CHECK_THROWS_AS(gwss(one, {"v1"}, KernelSpec::fixed(KernelFunction::bisquare, 2.0),
                         DistanceMetric::euclidean()),
                    input_error);
}
