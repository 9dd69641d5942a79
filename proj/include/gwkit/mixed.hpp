#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/regression.hpp"
#include "gwkit/summary.hpp"

namespace gwkit {

namespace detail {

// Design matrix from named columns, optionally led by an intercept column.
inline Eigen::MatrixXd build_partial_design(const Dataset& data,
                                            const std::vector<std::string>& vars,
                                            bool intercept) {
    const Eigen::Index extra = intercept ? 1 : 0;
    Eigen::MatrixXd design(data.n(), static_cast<Eigen::Index>(vars.size()) + extra);
    if (intercept) design.col(0).setOnes();
    for (std::size_t j = 0; j < vars.size(); ++j)
        design.col(static_cast<Eigen::Index>(j) + extra) = data.column(vars[j]);
    return design;
}

// Per-calibration-location GW smoother: fitted values of a GW regression of r
// on the given design, using precomputed weight columns.
inline Eigen::VectorXd gw_smooth_fitted(const Eigen::MatrixXd& design, const Eigen::VectorXd& r,
                                        const Eigen::MatrixXd& weights) {
    const int n = static_cast<int>(design.rows());
    Eigen::VectorXd fitted(n);
    std::vector<int> singular(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](int i) {
        const LocalWls wls = local_wls(design, r, weights.col(i), false);
        if (wls.singular) {
            singular[static_cast<std::size_t>(i)] = 1;
            return;
        }
        fitted[i] = design.row(i).dot(wls.beta);
    });
    std::vector<int> bad;
    for (int i = 0; i < n; ++i)
        if (singular[static_cast<std::size_t>(i)]) bad.push_back(i);
    if (!bad.empty())
        throw numeric_error("singular local design at calibration indices {" +
                            join_indices(bad) + "}; use a larger bandwidth");
    return fitted;
}

inline Eigen::MatrixXd weight_matrix(const Eigen::MatrixXd& dist, const KernelSpec& kernel) {
    const int n = static_cast<int>(dist.rows());
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) w.col(i) = weight_vector(dist.col(i), kernel);
    return w;
}

}  // namespace detail

// Semi-parametric fit: some coefficients global, the rest locally varying.
struct MixedGwrFit {
    std::string response;
    std::vector<std::string> global_names;
    Eigen::VectorXd global_coefficients;   // k_a
    std::vector<std::string> local_names;
    Eigen::MatrixXd local_coefficients;    // n x k_b
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    std::vector<double> rms_changes;       // per back-fitting iteration
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

inline constexpr double kMixedTolerance = 1e-6;
inline constexpr int kMixedMaxIterations = 50;

// Back-fitting mixed GW regression: alternate the global OLS projection and
// the GW smoother until the fitted values settle. The intercept belongs to
// the global part when intercept_fixed, to the local part otherwise.
inline MixedGwrFit gwr_mixed(const Dataset& data, const std::string& response,
                             const std::vector<std::string>& local_vars,
                             const std::vector<std::string>& global_vars, bool intercept_fixed,
                             const KernelSpec& kernel, const DistanceMetric& metric) {
    data.validate();
    for (const auto& v : local_vars)
        if (std::find(global_vars.begin(), global_vars.end(), v) != global_vars.end())
            throw input_error("variable '" + v + "' listed as both local and global");
    for (const auto& v : local_vars)
        if (v == response)
            throw input_error("response '" + response + "' cannot also be a predictor");
    for (const auto& v : global_vars)
        if (v == response)
            throw input_error("response '" + response + "' cannot also be a predictor");

    const int n = data.n();
    const Eigen::VectorXd y = data.column(response);
    const Eigen::MatrixXd xa = detail::build_partial_design(data, global_vars, intercept_fixed);
    const Eigen::MatrixXd xb = detail::build_partial_design(data, local_vars, !intercept_fixed);
    const int ka = static_cast<int>(xa.cols());
    const int kb = static_cast<int>(xb.cols());
    if (n <= ka + kb) throw input_error("gwr_mixed needs n > p");

    MixedGwrFit fit;
    fit.response = response;
    if (intercept_fixed) fit.global_names.push_back("Intercept");
    fit.global_names.insert(fit.global_names.end(), global_vars.begin(), global_vars.end());
    if (!intercept_fixed) fit.local_names.push_back("Intercept");
    fit.local_names.insert(fit.local_names.end(), local_vars.begin(), local_vars.end());

    Eigen::MatrixXd weights;
    if (kb > 0) {
        const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
        weights = detail::weight_matrix(dist, kernel);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qa;
    if (ka > 0) {
        qa.compute(xa);
        if (qa.rank() < ka) throw numeric_error("global design is rank deficient");
    }
    const auto project_global = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
        if (ka == 0) return Eigen::VectorXd::Zero(n);
        return xa * qa.solve(r);
    };
    const auto smooth_local = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
        if (kb == 0) return Eigen::VectorXd::Zero(n);
        return detail::gw_smooth_fitted(xb, r, weights);
    };

    const double rms_y = std::sqrt(y.squaredNorm() / n);
    const double denom = rms_y > 0.0 ? rms_y : 1.0;

    Eigen::VectorXd ya = project_global(y);  // Step 1 initial value
    Eigen::VectorXd yb = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd prev = ya;
    for (int it = 1; it <= kMixedMaxIterations; ++it) {
        yb = smooth_local(y - ya);
        ya = project_global(y - yb);
        const Eigen::VectorXd total = ya + yb;
        const double change = std::sqrt((total - prev).squaredNorm() / n) / denom;
        fit.rms_changes.push_back(change);
        fit.iterations = it;
        prev = total;
        if (change <= kMixedTolerance) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged)
        fit.warnings.push_back("back-fitting did not converge within " +
                               std::to_string(kMixedMaxIterations) + " iterations");

    fit.fitted = prev;
    fit.residuals = y - fit.fitted;
    fit.global_coefficients =
        ka > 0 ? Eigen::VectorXd(qa.solve(y - yb)) : Eigen::VectorXd(0);

    fit.local_coefficients.resize(n, kb);
    if (kb > 0) {
        const Eigen::VectorXd rb = y - ya;
        detail::parallel_for(n, [&](int i) {
            const detail::LocalWls wls = detail::local_wls(xb, rb, weights.col(i), false);
            fit.local_coefficients.row(i) = wls.beta.transpose();
        });
    }
    return fit;
}

// GW regression with a locally estimated error variance.
struct HeteroGwrFit {
    std::string response;
    std::vector<std::string> coef_names;
    Eigen::MatrixXd coefficients;  // n x p
    Eigen::VectorXd variances;     // length n, strictly positive
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

inline constexpr double kHeteroTolerance = 1e-4;
inline constexpr int kHeteroMaxIterations = 20;

inline HeteroGwrFit gwr_hetero(const Dataset& data, const std::string& response,
                               const std::vector<std::string>& predictors,
                               const KernelSpec& kernel, const DistanceMetric& metric) {
    data.validate();
    const int n = data.n();
    const int p = static_cast<int>(predictors.size()) + 1;
    if (n <= p) throw input_error("gwr_hetero needs n > p");
    for (const auto& v : predictors)
        if (v == response)
            throw input_error("response '" + response + "' cannot also be a predictor");
    const Eigen::VectorXd y = data.column(response);
    const Eigen::MatrixXd design = detail::build_design(data, predictors);
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
    const Eigen::MatrixXd weights = detail::weight_matrix(dist, kernel);

    const double y_mean = y.mean();
    const double y_var = (y.array() - y_mean).square().sum() / std::max(1, n - 1);
    const double floor = 1e-8 * (y_var > 0.0 ? y_var : 1.0);

    HeteroGwrFit fit;
    fit.response = response;
    fit.coef_names = detail::coefficient_names(predictors);
    fit.variances = Eigen::VectorXd::Ones(n);

    const auto refit = [&](const Eigen::VectorXd& inv_var) -> Eigen::MatrixXd {
        Eigen::MatrixXd coef(n, p);
        std::vector<int> singular(static_cast<std::size_t>(n), 0);
        detail::parallel_for(n, [&](int i) {
            const WeightVector w = weights.col(i).cwiseProduct(inv_var);
            const detail::LocalWls wls = detail::local_wls(design, y, w, false);
            if (wls.singular) {
                singular[static_cast<std::size_t>(i)] = 1;
                return;
            }
            coef.row(i) = wls.beta.transpose();
        });
        std::vector<int> bad;
        for (int i = 0; i < n; ++i)
            if (singular[static_cast<std::size_t>(i)]) bad.push_back(i);
        if (!bad.empty())
            throw numeric_error("singular local design at calibration indices {" +
                                detail::join_indices(bad) + "}; use a larger bandwidth");
        return coef;
    };

    fit.coefficients = refit(Eigen::VectorXd::Ones(n));
    bool clamped = false;
    for (int it = 1; it <= kHeteroMaxIterations; ++it) {
        Eigen::VectorXd fitted(n);
        for (int i = 0; i < n; ++i) fitted[i] = design.row(i).dot(fit.coefficients.row(i));
        const Eigen::VectorXd e2 = (y - fitted).array().square();
        // GW mean of the squared residuals with the same kernel.
        for (int j = 0; j < n; ++j) {
            const double wsum = weights.col(j).sum();
            detail::require_positive_weight_sum(wsum, j);
            double v = weights.col(j).dot(e2) / wsum;
            if (v < floor) {
                v = floor;
                clamped = true;
            }
            fit.variances[j] = v;
        }
        const Eigen::MatrixXd next = refit(fit.variances.cwiseInverse());
        const double scale = std::max(fit.coefficients.cwiseAbs().maxCoeff(), 1e-12);
        const double change = (next - fit.coefficients).cwiseAbs().maxCoeff() / scale;
        fit.coefficients = next;
        fit.iterations = it;
        if (change <= kHeteroTolerance) {
            fit.converged = true;
            break;
        }
    }
    if (clamped)
        fit.warnings.push_back("local variance estimates clamped to the positive floor");
    if (!fit.converged)
        fit.warnings.push_back("variance iteration did not converge within " +
                               std::to_string(kHeteroMaxIterations) + " iterations");
    return fit;
}

}  // namespace gwkit
