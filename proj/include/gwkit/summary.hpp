#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"

namespace gwkit {

namespace detail {

inline void require_positive_weight_sum(double wsum, int location) {
    if (!(wsum > 0.0)) {
        std::string where = location >= 0 ? " at calibration index " + std::to_string(location) : "";
        throw numeric_error("degenerate window: weight sum is zero" + where +
                            " (increase the bandwidth)");
    }
}

}  // namespace detail

// Geographically weighted mean of x under weights w.
inline double gw_mean(const Eigen::VectorXd& x, const WeightVector& w, int location = -1) {
    const double wsum = w.sum();
    detail::require_positive_weight_sum(wsum, location);
    return w.dot(x) / wsum;
}

// GW standard deviation, population form (divisor sum of weights).
inline double gw_sd(const Eigen::VectorXd& x, const WeightVector& w, int location = -1) {
    const double wsum = w.sum();
    detail::require_positive_weight_sum(wsum, location);
    const double mu = w.dot(x) / wsum;
    const double ss = (w.array() * (x.array() - mu).square()).sum();
    return std::sqrt(std::max(0.0, ss / wsum));
}

inline double gw_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const WeightVector& w, int location = -1) {
    const double wsum = w.sum();
    detail::require_positive_weight_sum(wsum, location);
    const double mx = w.dot(x) / wsum;
    const double my = w.dot(y) / wsum;
    return (w.array() * (x.array() - mx) * (y.array() - my)).sum() / wsum;
}

inline double gw_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const WeightVector& w, int location = -1) {
    const double sx = gw_sd(x, w, location);
    const double sy = gw_sd(y, w, location);
    if (!(sx > 0.0) || !(sy > 0.0)) {
        std::string where = location >= 0 ? " at calibration index " + std::to_string(location) : "";
        throw numeric_error("undefined GW correlation: zero local standard deviation" + where);
    }
    const double rho = gw_covariance(x, y, w, location) / (sx * sy);
    return std::clamp(rho, -1.0, 1.0);
}

// Per-location summary-statistic surfaces.
struct GwssResult {
    std::vector<std::string> variables;
    std::vector<std::pair<int, int>> pairs;      // variable index pairs, j1 < j2
    std::vector<std::string> pair_labels;        // "a.b"
    Eigen::MatrixXd means;                       // n x m
    Eigen::MatrixXd sds;                         // n x m
    Eigen::MatrixXd covariances;                 // n x (m choose 2)
    Eigen::MatrixXd correlations;                // n x (m choose 2)
    // (location, pair) entries where a zero local sd left the correlation
    // undefined; the stored value is NaN and must not be read silently.
    std::vector<std::pair<int, int>> undefined_correlations;
};

inline std::vector<std::pair<int, int>> variable_pairs(int m) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
    return pairs;
}

// GW mean/sd/covariance/correlation at every observation location.
inline GwssResult gwss(const Dataset& data, const std::vector<std::string>& vars,
                       const KernelSpec& kernel, const DistanceMetric& metric) {
    if (data.n() < 2) throw input_error("gwss needs at least 2 observations");
    const Dataset sub = data.select(vars);
    const int n = sub.n(), m = sub.m();
    const Eigen::MatrixXd dist = distance_matrix(sub.points, metric);

    GwssResult res;
    res.variables = vars;
    res.pairs = variable_pairs(m);
    for (const auto& [a, b] : res.pairs)
        res.pair_labels.push_back(vars[static_cast<std::size_t>(a)] + "." +
                                  vars[static_cast<std::size_t>(b)]);
    const int npairs = static_cast<int>(res.pairs.size());
    res.means.resize(n, m);
    res.sds.resize(n, m);
    res.covariances.resize(n, npairs);
    res.correlations.resize(n, npairs);

    std::vector<std::vector<std::pair<int, int>>> undefined(static_cast<std::size_t>(n));
    detail::parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        const double wsum = w.sum();
        detail::require_positive_weight_sum(wsum, i);
        for (int j = 0; j < m; ++j) {
            res.means(i, j) = gw_mean(sub.values.col(j), w, i);
            res.sds(i, j) = gw_sd(sub.values.col(j), w, i);
        }
        for (int q = 0; q < npairs; ++q) {
            const auto& [a, b] = res.pairs[static_cast<std::size_t>(q)];
            res.covariances(i, q) = gw_covariance(sub.values.col(a), sub.values.col(b), w, i);
            if (res.sds(i, a) > 0.0 && res.sds(i, b) > 0.0) {
                res.correlations(i, q) =
                    std::clamp(res.covariances(i, q) / (res.sds(i, a) * res.sds(i, b)), -1.0, 1.0);
            } else {
                res.correlations(i, q) = std::numeric_limits<double>::quiet_NaN();
                undefined[static_cast<std::size_t>(i)].emplace_back(i, q);
            }
        }
    });
    for (const auto& per_location : undefined)
        res.undefined_correlations.insert(res.undefined_correlations.end(), per_location.begin(),
                                          per_location.end());
    return res;
}

}  // namespace gwkit
