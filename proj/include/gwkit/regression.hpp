#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"

namespace gwkit {

namespace detail {

inline constexpr double kSingularRcond = 1e-12;

// One local weighted least-squares solve through a column-pivoted QR of the
// sqrt(w)-scaled design. Also produces C = (X'WX)^-1 X'W, the building block
// for hat rows and standard errors.
struct LocalWls {
    Eigen::VectorXd beta;  // p
    Eigen::MatrixXd c;     // p x n
    bool singular = false;
};

inline LocalWls local_wls(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          const WeightVector& w, bool want_c) {
    const int n = static_cast<int>(design.rows());
    const int p = static_cast<int>(design.cols());
    LocalWls out;
    if (!(w.sum() > 0.0)) {
        out.singular = true;
        return out;
    }
    const Eigen::VectorXd sw = w.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd xw = sw.asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p);
    const double rmax = std::abs(r(0, 0));
    const double rmin = std::abs(r(p - 1, p - 1));
    if (!(rmax > 0.0) || rmin / rmax < kSingularRcond) {
        out.singular = true;
        return out;
    }
    out.beta = qr.solve(sw.cwiseProduct(y));
    if (want_c) {
        // C = P R^-1 R^-T P^T (X'W), via two triangular solves.
        Eigen::MatrixXd m = design.transpose() * w.asDiagonal();
        m = qr.colsPermutation().transpose() * m;
        r.transpose().triangularView<Eigen::Lower>().solveInPlace(m);
        r.triangularView<Eigen::Upper>().solveInPlace(m);
        out.c = qr.colsPermutation() * m;
    }
    (void)n;
    return out;
}

inline Eigen::MatrixXd build_design(const Dataset& data,
                                    const std::vector<std::string>& predictors) {
    Eigen::MatrixXd design(data.n(), static_cast<Eigen::Index>(predictors.size()) + 1);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < predictors.size(); ++j)
        design.col(static_cast<Eigen::Index>(j) + 1) = data.column(predictors[j]);
    return design;
}

inline std::vector<std::string> coefficient_names(const std::vector<std::string>& predictors) {
    std::vector<std::string> names;
    names.reserve(predictors.size() + 1);
    names.push_back("Intercept");
    names.insert(names.end(), predictors.begin(), predictors.end());
    return names;
}

inline std::string join_indices(const std::vector<int>& idx) {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(idx[i]);
    }
    return s;
}

}  // namespace detail

// Basic GW regression fit: per-location coefficients and hat-trace
// diagnostics.
struct GwrFit {
    std::string response;
    std::vector<std::string> coef_names;  // Intercept first
    Eigen::MatrixXd coefficients;         // n x p
    Eigen::MatrixXd std_errors;           // n x p
    Eigen::MatrixXd t_values;             // n x p
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double tr_s = 0.0;
    double tr_sts = 0.0;
    double sigma2_hat = 0.0;  // RSS / (n - 2 tr(S) + tr(S'S))
    double enp = 0.0;         // 2 tr(S) - tr(S'S)
    double aicc = 0.0;
    KernelSpec kernel;

    int n() const { return static_cast<int>(fitted.size()); }
    int p() const { return static_cast<int>(coefficients.cols()); }
};

// AICc of a GW regression, with the maximum-likelihood error variance
// RSS/n. Undefined once tr(S) reaches n - 2.
inline double gwr_aicc(const GwrFit& fit, int n) {
    const double denom = n - 2.0 - fit.tr_s;
    if (!(denom > 0.0))
        throw numeric_error("AICc undefined: n - 2 - tr(S) <= 0; increase the bandwidth");
    const double rss = fit.residuals.squaredNorm();
    const double sigma_ml = std::sqrt(rss / n);
    if (!(sigma_ml > 0.0)) return -std::numeric_limits<double>::infinity();
    return 2.0 * n * std::log(sigma_ml) + n * std::log(2.0 * std::numbers::pi) +
           n * (n + fit.tr_s) / denom;
}

// Pseudo t-values beta/SE; zero standard errors produce +-inf sentinels.
inline Eigen::MatrixXd pseudo_t(const GwrFit& fit) {
    Eigen::MatrixXd t(fit.coefficients.rows(), fit.coefficients.cols());
    for (int i = 0; i < t.rows(); ++i) {
        for (int k = 0; k < t.cols(); ++k) {
            const double b = fit.coefficients(i, k), se = fit.std_errors(i, k);
            if (se > 0.0)
                t(i, k) = b / se;
            else
                t(i, k) = b == 0.0 ? 0.0
                                   : std::copysign(std::numeric_limits<double>::infinity(), b);
        }
    }
    return t;
}

// Calibrates the basic GW regression at every observation location.
inline GwrFit gwr_basic(const Dataset& data, const std::string& response,
                        const std::vector<std::string>& predictors, const KernelSpec& kernel,
                        const DistanceMetric& metric) {
    data.validate();
    const int n = data.n();
    const int p = static_cast<int>(predictors.size()) + 1;
    if (n <= p) throw input_error("gwr_basic needs n > p");
    for (const auto& v : predictors)
        if (v == response)
            throw input_error("response '" + response + "' cannot also be a predictor");
    const Eigen::VectorXd y = data.column(response);
    const Eigen::MatrixXd design = detail::build_design(data, predictors);
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    GwrFit fit;
    fit.response = response;
    fit.coef_names = detail::coefficient_names(predictors);
    fit.kernel = kernel;
    fit.coefficients.resize(n, p);
    fit.std_errors.resize(n, p);
    fit.fitted.resize(n);
    Eigen::VectorXd hat_diag(n), hat_rowsq(n);
    Eigen::MatrixXd c_rowsq(n, p);
    std::vector<int> singular(static_cast<std::size_t>(n), 0);

    detail::parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        const detail::LocalWls wls = detail::local_wls(design, y, w, true);
        if (wls.singular) {
            singular[static_cast<std::size_t>(i)] = 1;
            return;
        }
        fit.coefficients.row(i) = wls.beta.transpose();
        fit.fitted[i] = design.row(i).dot(wls.beta);
        const Eigen::RowVectorXd hat_row = design.row(i) * wls.c;
        hat_diag[i] = hat_row[i];
        hat_rowsq[i] = hat_row.squaredNorm();
        c_rowsq.row(i) = wls.c.array().square().rowwise().sum().transpose();
    });

    std::vector<int> bad;
    for (int i = 0; i < n; ++i)
        if (singular[static_cast<std::size_t>(i)]) bad.push_back(i);
    if (!bad.empty())
        throw numeric_error("singular local design at calibration indices {" +
                            detail::join_indices(bad) + "}; use a larger bandwidth");

    fit.residuals = y - fit.fitted;
    // Traces summed in fixed index order.
    for (int i = 0; i < n; ++i) fit.tr_s += hat_diag[i];
    for (int i = 0; i < n; ++i) fit.tr_sts += hat_rowsq[i];
    fit.enp = 2.0 * fit.tr_s - fit.tr_sts;
    const double dof = n - 2.0 * fit.tr_s + fit.tr_sts;
    if (!(dof > 0.0))
        throw numeric_error("effective parameters exhaust the sample; use a larger bandwidth");
    const double rss = fit.residuals.squaredNorm();
    fit.sigma2_hat = rss / dof;
    fit.std_errors = (c_rowsq.array() * fit.sigma2_hat).sqrt();
    fit.t_values = pseudo_t(fit);
    fit.aicc = gwr_aicc(fit, n);
    return fit;
}

// Leave-one-out squared prediction errors; singular windows become +inf.
inline Eigen::VectorXd gwr_cv_contrib(const Dataset& data, const std::string& response,
                                      const std::vector<std::string>& predictors,
                                      const KernelSpec& kernel, const DistanceMetric& metric) {
    data.validate();
    const int n = data.n();
    const Eigen::VectorXd y = data.column(response);
    const Eigen::MatrixXd design = detail::build_design(data, predictors);
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    Eigen::VectorXd contrib(n);
    detail::parallel_for(n, [&](int i) {
        WeightVector w;
        try {
            w = weight_vector(dist.col(i), kernel);
        } catch (const input_error&) {
            contrib[i] = std::numeric_limits<double>::infinity();
            return;
        }
        w[i] = 0.0;
        const detail::LocalWls wls = detail::local_wls(design, y, w, false);
        if (wls.singular) {
            contrib[i] = std::numeric_limits<double>::infinity();
            return;
        }
        const double pred = design.row(i).dot(wls.beta);
        contrib[i] = (y[i] - pred) * (y[i] - pred);
    });
    return contrib;
}

inline double gwr_cv_score(const Dataset& data, const std::string& response,
                           const std::vector<std::string>& predictors, const KernelSpec& kernel,
                           const DistanceMetric& metric) {
    return gwr_cv_contrib(data, response, predictors, kernel, metric).sum();
}

// Five-number summary (type-7 quartiles) of each coefficient surface.
struct CoefficientSummary {
    std::vector<std::string> coef_names;
    Eigen::MatrixXd five;  // p x 5: min, q1, median, q3, max
};

namespace detail {

inline double quantile_type7(std::vector<double> sorted, double prob) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline CoefficientSummary coefficient_summary(const GwrFit& fit) {
    const int rows = static_cast<int>(fit.coefficients.rows());
    if (rows < 1) throw input_error("coefficient summary needs at least one location");
    CoefficientSummary summary;
    summary.coef_names = fit.coef_names;
    summary.five.resize(fit.p(), 5);
    for (int k = 0; k < fit.p(); ++k) {
        std::vector<double> col(fit.coefficients.col(k).data(),
                                fit.coefficients.col(k).data() + rows);
        std::sort(col.begin(), col.end());
        summary.five(k, 0) = col.front();
        summary.five(k, 1) = detail::quantile_type7(col, 0.25);
        summary.five(k, 2) = detail::quantile_type7(col, 0.50);
        summary.five(k, 3) = detail::quantile_type7(col, 0.75);
        summary.five(k, 4) = col.back();
    }
    return summary;
}

}  // namespace gwkit
