#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/bandwidth.hpp"
#include "gwkit/dataset.hpp"
#include "gwkit/detail/rng.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/mixed.hpp"
#include "gwkit/pca.hpp"
#include "gwkit/regression.hpp"
#include "gwkit/summary.hpp"

namespace gwkit {

namespace detail {

inline Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& values,
                                    const std::vector<int>& perm) {
    Eigen::MatrixXd out(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        out.row(i) = values.row(perm[static_cast<std::size_t>(i)]);
    return out;
}

// All weighted summary statistics per location as one flat matrix, columns
// ordered means | sds | covariances | correlations. Undefined correlations become
// NaN here; callers decide whether that is an error (true data) or a
// conservative tie (simulated data).
inline Eigen::MatrixXd gwss_stat_matrix(const Eigen::MatrixXd& values,
                                        const Eigen::MatrixXd& weights,
                                        const std::vector<std::pair<int, int>>& pairs) {
    const int n = static_cast<int>(values.rows());
    const int m = static_cast<int>(values.cols());
    const int np = static_cast<int>(pairs.size());
    Eigen::MatrixXd stats(n, 2 * m + 2 * np);
    parallel_for(n, [&](int i) {
        const Eigen::VectorXd& w = weights.col(i);
        const double wsum = w.sum();
        require_positive_weight_sum(wsum, i);
        const Eigen::RowVectorXd mu = (w.transpose() * values) / wsum;
        const Eigen::MatrixXd centred = values.rowwise() - mu;
        Eigen::RowVectorXd var =
            (centred.array().square().colwise() * w.array()).colwise().sum() / wsum;
        var = var.cwiseMax(0.0);
        const Eigen::RowVectorXd sd = var.cwiseSqrt();
        stats.block(i, 0, 1, m) = mu;
        stats.block(i, m, 1, m) = sd;
        for (int q = 0; q < np; ++q) {
            const auto [a, b] = pairs[static_cast<std::size_t>(q)];
            const double cov = (w.array() * centred.col(a).array() * centred.col(b).array())
                                   .sum() /
                               wsum;
            stats(i, 2 * m + q) = cov;
            stats(i, 2 * m + np + q) =
                (sd[a] > 0.0 && sd[b] > 0.0)
                    ? std::clamp(cov / (sd[a] * sd[b]), -1.0, 1.0)
                    : std::numeric_limits<double>::quiet_NaN();
        }
    });
    return stats;
}

inline std::vector<std::string> gwss_stat_labels(const std::vector<std::string>& vars,
                                                 const std::vector<std::pair<int, int>>& pairs) {
    std::vector<std::string> labels;
    for (const auto& v : vars) labels.push_back("Mean_" + v);
    for (const auto& v : vars) labels.push_back("SD_" + v);
    for (const auto& [a, b] : pairs)
        labels.push_back("Cov_" + vars[static_cast<std::size_t>(a)] + "." +
                         vars[static_cast<std::size_t>(b)]);
    for (const auto& [a, b] : pairs)
        labels.push_back("Corr_" + vars[static_cast<std::size_t>(a)] + "." +
                         vars[static_cast<std::size_t>(b)]);
    return labels;
}

// Coefficient surfaces only (no hat diagnostics); throws on any singular
// window so simulation loops can map failures to a sentinel.
inline Eigen::MatrixXd gwr_coefficient_matrix(const Eigen::MatrixXd& design,
                                              const Eigen::VectorXd& y,
                                              const Eigen::MatrixXd& weights) {
    const int n = static_cast<int>(design.rows());
    const int p = static_cast<int>(design.cols());
    Eigen::MatrixXd coef(n, p);
    std::vector<int> singular(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](int i) {
        const LocalWls wls = local_wls(design, y, weights.col(i), false);
        if (wls.singular) {
            singular[static_cast<std::size_t>(i)] = 1;
            return;
        }
        coef.row(i) = wls.beta.transpose();
    });
    for (int i = 0; i < n; ++i)
        if (singular[static_cast<std::size_t>(i)])
            throw numeric_error("singular local design at calibration index " +
                                std::to_string(i) + "; use a larger bandwidth");
    return coef;
}

inline double sample_variance(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (n < 2) return 0.0;
    const double mu = x.mean();
    return (x.array() - mu).square().sum() / static_cast<double>(n - 1);
}

// First-k-free eigenvalue surface: the chosen component's local eigenvalue at
// every calibration point.
inline Eigen::VectorXd eigenvalue_surface(const Eigen::MatrixXd& values,
                                          const Eigen::MatrixXd& dist, const KernelSpec& kernel,
                                          int component) {
    const int n = static_cast<int>(values.rows());
    Eigen::VectorXd surface(n);
    parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        const Eigen::MatrixXd cov = local_covariance(values, w, i);
        const LocalEigen eig = sorted_eigen(cov, i);
        surface[i] = eig.values[component];
    });
    return surface;
}

}  // namespace detail

// Permutation-test report for GW summary statistics: per-location two-tailed
// pseudo-p values and 95%-level flags for every statistic surface.
struct McReport {
    std::vector<std::string> labels;
    Eigen::MatrixXd pseudo_p;  // n x labels
    Eigen::ArrayXXi flags;     // n x labels, 0/1
    double alpha = 0.05;
    int nsim = 0;
    std::uint64_t seed = 0;
};

inline McReport montecarlo_gwss(const Dataset& data, const std::vector<std::string>& vars,
                                const KernelSpec& kernel, const DistanceMetric& metric, int nsim,
                                std::uint64_t seed, double alpha = 0.05) {
    if (nsim < 19)
        throw input_error("montecarlo_gwss needs nsim >= 19 to resolve two-tailed flags");
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
    data.validate();
    const Dataset sub = data.select(vars);
    const int n = sub.n();
    const int m = sub.m();
    const auto pairs = variable_pairs(m);
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
    const Eigen::MatrixXd weights = detail::weight_matrix(dist, kernel);

    const Eigen::MatrixXd truth = detail::gwss_stat_matrix(sub.values, weights, pairs);
    const auto labels = detail::gwss_stat_labels(vars, pairs);
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index c = 0; c < truth.cols(); ++c)
            if (std::isnan(truth(i, c)))
                throw numeric_error("zero local standard deviation for " +
                                    labels[static_cast<std::size_t>(c)] +
                                    " at calibration index " + std::to_string(i) +
                                    "; increase the bandwidth");

    Eigen::MatrixXi count_hi = Eigen::MatrixXi::Zero(n, truth.cols());
    Eigen::MatrixXi count_lo = Eigen::MatrixXi::Zero(n, truth.cols());
    for (int s = 0; s < nsim; ++s) {
        detail::SubstreamRng rng(seed, static_cast<std::uint64_t>(s));
        const auto perm = detail::random_permutation(n, rng);
        const Eigen::MatrixXd sim =
            detail::gwss_stat_matrix(detail::permute_rows(sub.values, perm), weights, pairs);
        for (Eigen::Index i = 0; i < truth.rows(); ++i) {
            for (Eigen::Index c = 0; c < truth.cols(); ++c) {
                const double v = sim(i, c);
                if (std::isnan(v)) {  // undefined simulated statistic: count in both tails
                    count_hi(i, c) += 1;
                    count_lo(i, c) += 1;
                    continue;
                }
                if (v >= truth(i, c)) count_hi(i, c) += 1;
                if (v <= truth(i, c)) count_lo(i, c) += 1;
            }
        }
    }

    McReport report;
    report.labels = labels;
    report.alpha = alpha;
    report.nsim = nsim;
    report.seed = seed;
    report.pseudo_p.resize(n, truth.cols());
    report.flags.setZero(n, truth.cols());
    const double denom = nsim + 1.0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
        for (Eigen::Index c = 0; c < truth.cols(); ++c) {
            const double p_hi = (1.0 + count_hi(i, c)) / denom;
            const double p_lo = (1.0 + count_lo(i, c)) / denom;
            report.pseudo_p(i, c) = std::min(1.0, 2.0 * std::min(p_hi, p_lo));
            report.flags(i, c) = (p_hi <= alpha / 2.0 || p_lo <= alpha / 2.0) ? 1 : 0;
        }
    }
    return report;
}

// Coefficient non-stationarity test: one-tailed upper pseudo-p of the
// across-location variance of each coefficient surface.
struct McCoefficientReport {
    std::vector<std::string> coef_names;
    Eigen::VectorXd true_stat;  // variance per coefficient
    Eigen::MatrixXd sim_stats;  // nsim x p (singular simulations pinned at -inf)
    Eigen::VectorXd pseudo_p;
    int nsim = 0;
    std::uint64_t seed = 0;
};

inline McCoefficientReport montecarlo_gwr(const Dataset& data, const std::string& response,
                                          const std::vector<std::string>& predictors,
                                          const KernelSpec& kernel, const DistanceMetric& metric,
                                          int nsim, std::uint64_t seed) {
    if (nsim < 1) throw input_error("montecarlo_gwr needs nsim >= 1");
    data.validate();
    const int n = data.n();
    const int p = static_cast<int>(predictors.size()) + 1;
    if (n <= p) throw input_error("montecarlo_gwr needs n > p");
    const Eigen::VectorXd y = data.column(response);
    const Eigen::MatrixXd design = detail::build_design(data, predictors);
    Eigen::MatrixXd table(n, p + 1);
    table.col(0) = y;
    table.rightCols(p) = design;
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
    const Eigen::MatrixXd weights = detail::weight_matrix(dist, kernel);

    const auto stat_of = [&](const Eigen::MatrixXd& rows) {
        const Eigen::MatrixXd coef = detail::gwr_coefficient_matrix(
            rows.rightCols(p), rows.col(0), weights);
        Eigen::VectorXd v(p);
        for (int k = 0; k < p; ++k) v[k] = detail::sample_variance(coef.col(k));
        return v;
    };

    McCoefficientReport report;
    report.coef_names = detail::coefficient_names(predictors);
    report.nsim = nsim;
    report.seed = seed;
    report.true_stat = stat_of(table);
    report.sim_stats.resize(nsim, p);
    for (int s = 0; s < nsim; ++s) {
        detail::SubstreamRng rng(seed, static_cast<std::uint64_t>(s));
        const auto perm = detail::random_permutation(n, rng);
        try {
            report.sim_stats.row(s) = stat_of(detail::permute_rows(table, perm)).transpose();
        } catch (const numeric_error&) {
            report.sim_stats.row(s).setConstant(-std::numeric_limits<double>::infinity());
        }
    }
    report.pseudo_p.resize(p);
    for (int k = 0; k < p; ++k) {
        int hi = 0;
        for (int s = 0; s < nsim; ++s)
            if (report.sim_stats(s, k) >= report.true_stat[k]) ++hi;
        report.pseudo_p[k] = (1.0 + hi) / (nsim + 1.0);
    }
    return report;
}

// Eigenvalue non-stationarity test: one-tailed upper pseudo-p of the
// across-location SD of one component's local eigenvalue, optionally with a
// re-optimized bandwidth per simulation.
struct McPcaReport {
    double true_stat = 0.0;
    Eigen::VectorXd sim_stats;
    double pseudo_p = 1.0;
    int component = 0;
    bool reoptimized = false;
    std::vector<double> sim_bandwidths;  // filled when reoptimized
    int nsim = 0;
    std::uint64_t seed = 0;
};

inline McPcaReport montecarlo_gwpca(const Dataset& data, int k, const KernelSpec& kernel,
                                    const DistanceMetric& metric, int nsim, std::uint64_t seed,
                                    bool reoptimize = false, int component = 0) {
    if (nsim < 1) throw input_error("montecarlo_gwpca needs nsim >= 1");
    data.validate();
    const int n = data.n();
    const int m = data.m();
    if (k < 1 || k > m) throw input_error("montecarlo_gwpca needs 1 <= k <= m");
    if (reoptimize && k >= m)
        throw input_error("bandwidth re-optimization needs k < m");
    if (component < 0 || component >= m)
        throw input_error("component index out of range");
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
    const bool adaptive = kernel.mode == KernelSpec::Mode::adaptive;

    McPcaReport report;
    report.component = component;
    report.reoptimized = reoptimize;
    report.nsim = nsim;
    report.seed = seed;
    report.true_stat = std::sqrt(detail::sample_variance(
        detail::eigenvalue_surface(data.values, dist, kernel, component)));
    report.sim_stats.resize(nsim);

    double lo, hi;
    if (adaptive) {
        const auto bounds = adaptive_bounds_gwpca(n, k);
        lo = bounds.first;
        hi = bounds.second;
    } else {
        const auto bounds = fixed_bounds(dist);
        lo = bounds.first;
        hi = bounds.second;
    }

    for (int s = 0; s < nsim; ++s) {
        detail::SubstreamRng rng(seed, static_cast<std::uint64_t>(s));
        const auto perm = detail::random_permutation(n, rng);
        const Eigen::MatrixXd values = detail::permute_rows(data.values, perm);
        KernelSpec sim_kernel = kernel;
        try {
            if (reoptimize) {
                const Dataset sim_data{data.points, values, data.names};
                const auto objective =
                    gwpca_cv_objective(sim_data, k, kernel.function, adaptive, metric);
                double b;
                try {
                    b = golden_section(objective, lo, hi, adaptive, false).bandwidth;
                } catch (const numeric_error&) {
                    // one retry on a coarse grid before giving up on the run
                    std::vector<double> grid;
                    for (int g = 0; g < 10; ++g) grid.push_back(lo + (hi - lo) * g / 9.0);
                    const BandwidthProfile prof = grid_profile(objective, grid);
                    if (std::isinf(prof.argmin_score))
                        throw numeric_error("bandwidth search failed in simulation " +
                                            std::to_string(s) + " even on the fallback grid");
                    b = prof.argmin;
                }
                sim_kernel = detail::kernel_at(kernel.function, adaptive, b);
                report.sim_bandwidths.push_back(sim_kernel.bandwidth_value());
            }
            report.sim_stats[s] = std::sqrt(detail::sample_variance(
                detail::eigenvalue_surface(values, dist, sim_kernel, component)));
        } catch (const input_error&) {
            report.sim_stats[s] = -std::numeric_limits<double>::infinity();
        }
    }

    int hi_count = 0;
    for (int s = 0; s < nsim; ++s)
        if (report.sim_stats[s] >= report.true_stat) ++hi_count;
    report.pseudo_p = (1.0 + hi_count) / (nsim + 1.0);
    return report;
}

}  // namespace gwkit
