#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/regression.hpp"
#include "gwkit/summary.hpp"

namespace gwkit {

// Two-sided p-value from the standard normal reference; +-inf t maps to 0.
inline double t_to_p(double t) {
    if (std::isinf(t)) return 0.0;
    return std::erfc(std::abs(t) / std::sqrt(2.0));
}

inline Eigen::MatrixXd t_to_p(const Eigen::MatrixXd& t_values) {
    return t_values.unaryExpr([](double t) { return t_to_p(t); });
}

enum class Adjustment { bh, by, bonferroni, fb };

inline const char* adjustment_name(Adjustment a) {
    switch (a) {
        case Adjustment::bh: return "bh";
        case Adjustment::by: return "by";
        case Adjustment::bonferroni: return "bonferroni";
        case Adjustment::fb: return "fb";
    }
    return "?";
}

namespace detail {

// Step-up adjustment shared by BH and BY; `scale` is 1 for BH and the
// harmonic-sum correction for BY.
inline Eigen::VectorXd step_up_adjust(const Eigen::VectorXd& p, double scale) {
    const int n = static_cast<int>(p.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });
    Eigen::VectorXd adj(n);
    double running = std::numeric_limits<double>::infinity();
    for (int rank = n; rank >= 1; --rank) {
        const int idx = order[static_cast<std::size_t>(rank - 1)];
        running = std::min(running, scale * n / rank * p[idx]);
        adj[idx] = std::min(1.0, running);
    }
    return adj;
}

}  // namespace detail

// Adjusts one family of p-values (the n locations of a single coefficient
// surface). p_e and np only matter for the fb method.
inline Eigen::VectorXd adjust_p(const Eigen::VectorXd& p_original, Adjustment method,
                                double p_e = 0.0, int np = 1) {
    const int n = static_cast<int>(p_original.size());
    switch (method) {
        case Adjustment::bh:
            return detail::step_up_adjust(p_original, 1.0);
        case Adjustment::by: {
            double c = 0.0;
            for (int k = 1; k <= n; ++k) c += 1.0 / k;
            return detail::step_up_adjust(p_original, c);
        }
        case Adjustment::bonferroni:
            return p_original.unaryExpr([n](double p) { return std::min(1.0, n * p); });
        case Adjustment::fb: {
            if (np < 1) throw input_error("fb adjustment needs np >= 1");
            if (p_e < 0.0) throw input_error("fb adjustment needs p_e >= 0");
            const double factor = 1.0 + p_e - p_e / np;
            return p_original.unaryExpr(
                [factor](double p) { return std::min(1.0, factor * p); });
        }
    }
    throw input_error("unknown adjustment method");
}

// All four adjustments for every coefficient surface of a fit.
struct AdjustedPValues {
    std::vector<std::string> coef_names;
    Eigen::MatrixXd p_original;    // n x p
    Eigen::MatrixXd p_bh;
    Eigen::MatrixXd p_by;
    Eigen::MatrixXd p_bonferroni;
    Eigen::MatrixXd p_fb;
};

inline AdjustedPValues adjust_all(const GwrFit& fit) {
    AdjustedPValues out;
    out.coef_names = fit.coef_names;
    out.p_original = t_to_p(fit.t_values);
    const int p = fit.p();
    out.p_bh.resizeLike(out.p_original);
    out.p_by.resizeLike(out.p_original);
    out.p_bonferroni.resizeLike(out.p_original);
    out.p_fb.resizeLike(out.p_original);
    for (int k = 0; k < p; ++k) {
        out.p_bh.col(k) = adjust_p(out.p_original.col(k), Adjustment::bh);
        out.p_by.col(k) = adjust_p(out.p_original.col(k), Adjustment::by);
        out.p_bonferroni.col(k) = adjust_p(out.p_original.col(k), Adjustment::bonferroni);
        out.p_fb.col(k) = adjust_p(out.p_original.col(k), Adjustment::fb, fit.enp, p);
    }
    return out;
}

// Local collinearity diagnostics: pairwise predictor correlations, VIFs from
// the inverse local correlation matrix, and condition number / variance
// decomposition proportions from the SVD of the weighted, column-unit-normed
// design (intercept included). VDP rows follow descending singular values, so
// the last row belongs to the weakest component.
struct CollinearityReport {
    static constexpr double corr_threshold = 0.8;
    static constexpr double vif_threshold = 10.0;
    static constexpr double vdp_threshold = 0.5;
    static constexpr double cn_threshold = 30.0;

    std::vector<std::string> predictors;
    std::vector<std::string> coef_names;      // Intercept first
    std::vector<std::pair<int, int>> pairs;   // indices into predictors
    std::vector<std::string> pair_labels;
    Eigen::MatrixXd correlations;             // n x pairs
    Eigen::MatrixXd vif;                      // n x predictors
    Eigen::VectorXd condition_number;         // n
    std::vector<Eigen::MatrixXd> vdp;         // n stacks of (p components x p coefficients)

    bool corr_flag(int i, int pair) const {
        return std::abs(correlations(i, pair)) > corr_threshold;
    }
    bool vif_flag(int i, int k) const { return vif(i, k) > vif_threshold; }
    bool cn_flag(int i) const { return condition_number[i] > cn_threshold; }
    bool vdp_flag(int i, int component, int k) const {
        return vdp[static_cast<std::size_t>(i)](component, k) > vdp_threshold;
    }
};

inline CollinearityReport collinearity_diagnostics(const Dataset& data,
                                                   const std::vector<std::string>& predictors,
                                                   const KernelSpec& kernel,
                                                   const DistanceMetric& metric) {
    data.validate();
    if (predictors.empty()) throw input_error("collinearity diagnostics need predictors");
    const int n = data.n();
    const int m = static_cast<int>(predictors.size());
    const int p = m + 1;
    const Eigen::MatrixXd design = detail::build_design(data, predictors);
    const Eigen::MatrixXd preds = design.rightCols(m);
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    CollinearityReport rep;
    rep.predictors = predictors;
    rep.coef_names = detail::coefficient_names(predictors);
    rep.pairs = variable_pairs(m);
    for (const auto& [a, b] : rep.pairs)
        rep.pair_labels.push_back(predictors[static_cast<std::size_t>(a)] + "." +
                                  predictors[static_cast<std::size_t>(b)]);
    rep.correlations.resize(n, static_cast<Eigen::Index>(rep.pairs.size()));
    rep.vif.resize(n, m);
    rep.condition_number.resize(n);
    rep.vdp.assign(static_cast<std::size_t>(n), Eigen::MatrixXd());

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    detail::parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        const double wsum = w.sum();
        detail::require_positive_weight_sum(wsum, i);

        // Local predictor correlation matrix (population form).
        const Eigen::RowVectorXd mu = (w.transpose() * preds) / wsum;
        const Eigen::MatrixXd centred = preds.rowwise() - mu;
        Eigen::MatrixXd cov =
            (centred.transpose() * w.asDiagonal() * centred) / wsum;
        cov = 0.5 * (cov + cov.transpose()).eval();
        Eigen::VectorXd sd = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
        Eigen::MatrixXd corr(m, m);
        bool degenerate = false;
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                if (a == b) {
                    corr(a, b) = 1.0;
                } else if (sd[a] > 0.0 && sd[b] > 0.0) {
                    corr(a, b) = std::clamp(cov(a, b) / (sd[a] * sd[b]), -1.0, 1.0);
                } else {
                    corr(a, b) = nan;
                    degenerate = true;
                }
            }
        }
        for (std::size_t q = 0; q < rep.pairs.size(); ++q)
            rep.correlations(i, static_cast<Eigen::Index>(q)) =
                corr(rep.pairs[q].first, rep.pairs[q].second);

        // VIFs: diagonal of the inverse correlation matrix; singular -> +inf.
        if (degenerate) {
            rep.vif.row(i).setConstant(inf);
        } else {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
            if (lu.isInvertible())
                rep.vif.row(i) = lu.inverse().diagonal().transpose();
            else
                rep.vif.row(i).setConstant(inf);
        }

        // CN / VDP from the weighted, column-unit-normed design.
        Eigen::MatrixXd xw = w.cwiseSqrt().asDiagonal() * design;
        for (int k = 0; k < p; ++k) {
            const double norm = xw.col(k).norm();
            if (norm > 0.0) xw.col(k) /= norm;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(xw, Eigen::ComputeThinV);
        const Eigen::VectorXd s = svd.singularValues();
        const double smax = s[0], smin = s[p - 1];
        rep.condition_number[i] = smin > 0.0 ? smax / smin : inf;
        // phi(k,j) = V(k,j)^2 / s_j^2, normalised over components j.
        Eigen::MatrixXd vdp(p, p);
        for (int k = 0; k < p; ++k) {
            Eigen::VectorXd phi(p);
            for (int j = 0; j < p; ++j) {
                const double sj = std::max(s[j], smax * 1e-150);
                const double r = svd.matrixV()(k, j) / sj;
                phi[j] = r * r;
            }
            const double total = phi.sum();
            for (int j = 0; j < p; ++j) vdp(j, k) = total > 0.0 ? phi[j] / total : nan;
        }
        rep.vdp[static_cast<std::size_t>(i)] = std::move(vdp);
    });
    return rep;
}

}  // namespace gwkit
