#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/summary.hpp"

namespace gwkit {

// Weighted covariance matrix centred at the GW means, weights normalised by
// their sum. Entry (a,b) equals gw_covariance of columns a and b.
inline Eigen::MatrixXd local_covariance(const Eigen::MatrixXd& values, const WeightVector& w,
                                        int location = -1) {
    const double wsum = w.sum();
    detail::require_positive_weight_sum(wsum, location);
    const Eigen::RowVectorXd mu = (w.transpose() * values) / wsum;
    const Eigen::MatrixXd centred = values.rowwise() - mu;
    const Eigen::MatrixXd scaled = (w / wsum).asDiagonal() * centred;
    Eigen::MatrixXd cov = centred.transpose() * scaled;
    return 0.5 * (cov + cov.transpose());  // enforce exact symmetry
}

namespace detail {

struct LocalEigen {
    Eigen::VectorXd values;   // descending, clipped at 0
    Eigen::MatrixXd vectors;  // columns, sign convention applied
};

// Symmetric eigen-decomposition sorted descending; small negative
// eigenvalues are clipped to zero; each column's max-|.| entry is made
// nonnegative (first such index on ties).
inline LocalEigen sorted_eigen(const Eigen::MatrixXd& cov, int location = -1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw numeric_error("eigen-decomposition failed" +
                            (location >= 0 ? " at calibration index " + std::to_string(location)
                                           : std::string()));
    const int m = static_cast<int>(cov.rows());
    LocalEigen out;
    out.values.resize(m);
    out.vectors.resize(m, m);
    for (int c = 0; c < m; ++c) {
        // Eigen returns ascending order.
        out.values[c] = std::max(0.0, solver.eigenvalues()[m - 1 - c]);
        out.vectors.col(c) = solver.eigenvectors().col(m - 1 - c);
        int argmax = 0;
        out.vectors.col(c).cwiseAbs().maxCoeff(&argmax);
        if (out.vectors(argmax, c) < 0.0) out.vectors.col(c) = -out.vectors.col(c);
    }
    return out;
}

}  // namespace detail

// Local eigen-structure surfaces. Loadings and eigenvalues cover all m
// components; k records how many the caller asked to focus on.
struct GwpcaResult {
    std::vector<std::string> variables;
    int k = 0;
    Eigen::MatrixXd eigenvalues;            // n x m, descending per row
    std::vector<Eigen::MatrixXd> loadings;  // n stacks of m x m orthonormal columns
    std::vector<Eigen::MatrixXd> scores;    // n stacks of n x m (empty when skipped)
    Eigen::MatrixXd ptv;                    // n x m percentages, rows sum to 100
};

// Localised PCA at every observation location. Standardize beforehand if
// desired (GW PCA is usually run on globally standardized data).
inline GwpcaResult gwpca(const Dataset& data, const KernelSpec& kernel,
                         const DistanceMetric& metric, int k, bool with_scores = true) {
    data.validate();
    const int n = data.n(), m = data.m();
    if (k < 1 || k > m) throw input_error("gwpca: k must lie in [1, m]");
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    GwpcaResult res;
    res.variables = data.names;
    res.k = k;
    res.eigenvalues.resize(n, m);
    res.loadings.resize(static_cast<std::size_t>(n));
    if (with_scores) res.scores.resize(static_cast<std::size_t>(n));
    res.ptv.resize(n, m);

    detail::parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        const Eigen::MatrixXd cov = local_covariance(data.values, w, i);
        detail::LocalEigen eig = detail::sorted_eigen(cov, i);
        res.eigenvalues.row(i) = eig.values.transpose();
        const double trace = eig.values.sum();
        if (!(trace > 0.0))
            throw numeric_error("zero local total variance at calibration index " +
                                std::to_string(i));
        res.ptv.row(i) = eig.values.transpose() * (100.0 / trace);
        if (with_scores) res.scores[static_cast<std::size_t>(i)] = data.values * eig.vectors;
        res.loadings[static_cast<std::size_t>(i)] = std::move(eig.vectors);
    });
    return res;
}

// Per-observation leave-one-out reconstruction errors: with observation i's
// weight zeroed, project x_i on the first k local eigenvectors and take the
// squared residual norm. A degenerate window yields +inf entries.
inline Eigen::VectorXd gwpca_cv_contrib(const Dataset& data, const KernelSpec& kernel,
                                        const DistanceMetric& metric, int k) {
    data.validate();
    const int n = data.n(), m = data.m();
    if (k < 1 || k >= m) throw input_error("gwpca CV requires 1 <= k < m");
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
        if (!(w.sum() > 0.0)) {
            contrib[i] = std::numeric_limits<double>::infinity();
            return;
        }
        const Eigen::MatrixXd cov = local_covariance(data.values, w, i);
        const detail::LocalEigen eig = detail::sorted_eigen(cov, i);
        const Eigen::MatrixXd basis = eig.vectors.leftCols(k);
        const Eigen::RowVectorXd x = data.values.row(i);
        const Eigen::RowVectorXd residual = x - (x * basis) * basis.transpose();
        contrib[i] = residual.squaredNorm();
    });
    return contrib;
}

// Leave-one-out reconstruction error summed over observations; +inf when any
// window degenerates (bandwidth rejected).
inline double gwpca_cv_score(const Dataset& data, const KernelSpec& kernel,
                             const DistanceMetric& metric, int k) {
    return gwpca_cv_contrib(data, kernel, metric, k).sum();
}

}  // namespace gwkit
