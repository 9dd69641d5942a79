#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/detail/parallel.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"

namespace gwkit {

struct GwdaSpec {
    enum class Method { lda, qda };
    Method method = Method::lda;
    // Empty -> GW-weighted priors; otherwise one positive weight per class
    // (sorted label order), summing to 1.
    std::vector<double> fixed_priors;
};

namespace detail {

struct ClassIndex {
    std::vector<std::string> labels;  // sorted
    std::vector<int> index;           // per observation
};

inline ClassIndex index_classes(const std::vector<std::string>& labels) {
    ClassIndex ci;
    std::map<std::string, int> seen;
    for (const auto& l : labels) seen.emplace(l, 0);
    for (auto& [label, idx] : seen) {
        idx = static_cast<int>(ci.labels.size());
        ci.labels.push_back(label);
    }
    ci.index.reserve(labels.size());
    for (const auto& l : labels) ci.index.push_back(seen[l]);
    return ci;
}

// Local GW discriminant rule at one calibration point: kernel-weighted class
// means and covariances under the supplied weights, then the log-scale
// assignment scores
// LP_j = (x-mu_j)' Sigma_j^-1 (x-mu_j)/2 + ln|Sigma_j|/2 - ln p_j.
struct GwdaLocal {
    Eigen::MatrixXd means;                // k x q
    std::vector<Eigen::MatrixXd> covs;    // 1 (lda, pooled) or k (qda)
    Eigen::VectorXd priors;               // k
    Eigen::VectorXd scores;               // k
    int predicted = 0;
    bool ridge_used = false;
};

inline GwdaLocal gwda_local(const Eigen::MatrixXd& values, const std::vector<int>& class_idx,
                            int k, const std::vector<std::string>& labels,
                            const Eigen::RowVectorXd& x, const WeightVector& w,
                            const GwdaSpec& spec, int location) {
    const int n = static_cast<int>(values.rows());
    const int q = static_cast<int>(values.cols());
    GwdaLocal out;
    out.means.resize(k, q);
    out.priors.resize(k);
    out.scores.resize(k);

    Eigen::VectorXd wsum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXi members = Eigen::VectorXi::Zero(k);
    for (int i = 0; i < n; ++i) {
        if (w[i] > 0.0) {
            wsum[class_idx[static_cast<std::size_t>(i)]] += w[i];
            members[class_idx[static_cast<std::size_t>(i)]] += 1;
        }
    }
    for (int j = 0; j < k; ++j) {
        if (members[j] < q + 1)
            throw numeric_error("class '" + labels[static_cast<std::size_t>(j)] +
                                "' has fewer than q+1 positively weighted observations in the "
                                "window at calibration index " +
                                std::to_string(location) + "; increase the bandwidth");
    }

    std::vector<Eigen::MatrixXd> scatter(static_cast<std::size_t>(k),
                                         Eigen::MatrixXd::Zero(q, q));
    out.means.setZero();
    for (int i = 0; i < n; ++i)
        out.means.row(class_idx[static_cast<std::size_t>(i)]) += w[i] * values.row(i);
    for (int j = 0; j < k; ++j) out.means.row(j) /= wsum[j];
    for (int i = 0; i < n; ++i) {
        const int j = class_idx[static_cast<std::size_t>(i)];
        const Eigen::RowVectorXd d = values.row(i) - out.means.row(j);
        scatter[static_cast<std::size_t>(j)].noalias() += w[i] * d.transpose() * d;
    }

    if (spec.method == GwdaSpec::Method::qda) {
        out.covs.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            out.covs[static_cast<std::size_t>(j)] = scatter[static_cast<std::size_t>(j)] / wsum[j];
    } else {
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(q, q);
        for (int j = 0; j < k; ++j) pooled += scatter[static_cast<std::size_t>(j)];
        out.covs.assign(1, pooled / wsum.sum());
    }

    if (spec.fixed_priors.empty()) {
        out.priors = wsum / wsum.sum();
    } else {
        for (int j = 0; j < k; ++j) out.priors[j] = spec.fixed_priors[static_cast<std::size_t>(j)];
    }

    // Cache one factorization per covariance (a single pooled one for lda).
    const int ncov = static_cast<int>(out.covs.size());
    std::vector<Eigen::LLT<Eigen::MatrixXd>> llt(static_cast<std::size_t>(ncov));
    std::vector<double> logdet(static_cast<std::size_t>(ncov));
    for (int c = 0; c < ncov; ++c) {
        Eigen::MatrixXd& cov = out.covs[static_cast<std::size_t>(c)];
        cov = 0.5 * (cov + cov.transpose()).eval();
        llt[static_cast<std::size_t>(c)].compute(cov);
        if (llt[static_cast<std::size_t>(c)].info() != Eigen::Success) {
            const double ridge = 1e-8 * std::max(cov.trace(), 1.0) / q;
            cov += ridge * Eigen::MatrixXd::Identity(q, q);
            out.ridge_used = true;
            llt[static_cast<std::size_t>(c)].compute(cov);
            if (llt[static_cast<std::size_t>(c)].info() != Eigen::Success)
                throw numeric_error("local covariance not positive definite at calibration "
                                    "index " +
                                    std::to_string(location) + "; increase the bandwidth");
        }
        double ld = 0.0;
        for (int r = 0; r < q; ++r)
            ld += std::log(llt[static_cast<std::size_t>(c)].matrixL()(r, r));
        logdet[static_cast<std::size_t>(c)] = 2.0 * ld;
    }

    for (int j = 0; j < k; ++j) {
        const std::size_t c = ncov == 1 ? 0 : static_cast<std::size_t>(j);
        const Eigen::VectorXd d = (x - out.means.row(j)).transpose();
        const double maha = d.dot(llt[c].solve(d));
        out.scores[j] = 0.5 * maha + 0.5 * logdet[c] - std::log(out.priors[j]);
    }
    out.scores.minCoeff(&out.predicted);
    return out;
}

}  // namespace detail

struct GwdaResult {
    std::vector<std::string> class_labels;  // sorted
    std::vector<std::string> predictors;
    std::vector<int> predicted;                         // class index per location
    std::vector<std::string> predicted_labels;
    Eigen::MatrixXd scores;                             // n x k (LP_j, smaller = more likely)
    std::vector<Eigen::MatrixXd> class_means;           // n stacks of k x q
    std::vector<std::vector<Eigen::MatrixXd>> covariances;  // pooled (1) or per class (k)
    std::vector<std::string> warnings;
};

inline GwdaResult gwda_fit_predict(const Dataset& data, const std::vector<std::string>& labels,
                                   const std::vector<std::string>& predictors,
                                   const GwdaSpec& spec, const KernelSpec& kernel,
                                   const DistanceMetric& metric) {
    data.validate();
    const int n = data.n();
    if (static_cast<int>(labels.size()) != n)
        throw input_error("class label column length does not match the dataset");
    const detail::ClassIndex ci = detail::index_classes(labels);
    const int k = static_cast<int>(ci.labels.size());
    if (k < 2) throw input_error("discriminant analysis needs at least 2 classes");
    if (!spec.fixed_priors.empty()) {
        if (static_cast<int>(spec.fixed_priors.size()) != k)
            throw input_error("fixed priors must supply one weight per class");
        double total = 0.0;
        for (double p : spec.fixed_priors) {
            if (!(p > 0.0)) throw input_error("fixed priors must be positive");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-8) throw input_error("fixed priors must sum to 1");
    }

    const Dataset sub = data.select(predictors);
    const Eigen::MatrixXd& values = sub.values;
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    GwdaResult res;
    res.class_labels = ci.labels;
    res.predictors = predictors;
    res.predicted.assign(static_cast<std::size_t>(n), 0);
    res.predicted_labels.assign(static_cast<std::size_t>(n), std::string());
    res.scores.resize(n, k);
    res.class_means.assign(static_cast<std::size_t>(n), Eigen::MatrixXd());
    res.covariances.assign(static_cast<std::size_t>(n), {});
    std::vector<int> ridge(static_cast<std::size_t>(n), 0);

    detail::parallel_for(n, [&](int i) {
        const WeightVector w = weight_vector(dist.col(i), kernel);
        detail::GwdaLocal local = detail::gwda_local(values, ci.index, k, ci.labels,
                                                     values.row(i), w, spec, i);
        res.predicted[static_cast<std::size_t>(i)] = local.predicted;
        res.predicted_labels[static_cast<std::size_t>(i)] =
            ci.labels[static_cast<std::size_t>(local.predicted)];
        res.scores.row(i) = local.scores.transpose();
        res.class_means[static_cast<std::size_t>(i)] = std::move(local.means);
        res.covariances[static_cast<std::size_t>(i)] = std::move(local.covs);
        ridge[static_cast<std::size_t>(i)] = local.ridge_used ? 1 : 0;
    });

    int ridged = 0;
    for (int f : ridge) ridged += f;
    if (ridged > 0)
        res.warnings.push_back("ridge regularisation applied to the local covariance at " +
                               std::to_string(ridged) + " location(s)");
    return res;
}

// Leave-one-out misclassification count; degenerate windows poison the score
// with +inf so bandwidth search avoids them.
inline double gwda_cv_score(const Dataset& data, const std::vector<std::string>& labels,
                            const std::vector<std::string>& predictors, const GwdaSpec& spec,
                            const KernelSpec& kernel, const DistanceMetric& metric) {
    data.validate();
    const int n = data.n();
    if (static_cast<int>(labels.size()) != n)
        throw input_error("class label column length does not match the dataset");
    const detail::ClassIndex ci = detail::index_classes(labels);
    const int k = static_cast<int>(ci.labels.size());
    if (k < 2) throw input_error("discriminant analysis needs at least 2 classes");
    const Dataset sub = data.select(predictors);
    const Eigen::MatrixXd& values = sub.values;
    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);

    Eigen::VectorXd miss(n);
    detail::parallel_for(n, [&](int i) {
        WeightVector w;
        try {
            w = weight_vector(dist.col(i), kernel);
            w[i] = 0.0;
            const detail::GwdaLocal local = detail::gwda_local(values, ci.index, k, ci.labels,
                                                               values.row(i), w, spec, i);
            miss[i] = local.predicted == ci.index[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
        } catch (const input_error&) {
            miss[i] = std::numeric_limits<double>::infinity();
        } catch (const numeric_error&) {
            miss[i] = std::numeric_limits<double>::infinity();
        }
    });
    return miss.sum();
}

// Counts with predicted classes on rows and actual classes on columns.
struct ConfusionMatrix {
    std::vector<std::string> labels;  // sorted union
    Eigen::MatrixXi counts;           // k x k
    int total = 0;
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& actual,
                                        const std::vector<std::string>& predicted) {
    if (actual.size() != predicted.size())
        throw input_error("actual and predicted label vectors differ in length");
    std::vector<std::string> both = actual;
    both.insert(both.end(), predicted.begin(), predicted.end());
    const detail::ClassIndex ci = detail::index_classes(both);
    ConfusionMatrix cm;
    cm.labels = ci.labels;
    const int k = static_cast<int>(ci.labels.size());
    cm.counts = Eigen::MatrixXi::Zero(k, k);
    const std::size_t n = actual.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int a = ci.index[i];
        const int p = ci.index[n + i];
        cm.counts(p, a) += 1;
    }
    cm.total = static_cast<int>(n);
    return cm;
}

inline double classification_rate(const ConfusionMatrix& cm) {
    if (cm.total == 0) throw input_error("empty confusion matrix");
    return static_cast<double>(cm.counts.trace()) / cm.total;
}

inline double classification_rate(const std::vector<std::string>& actual,
                                  const std::vector<std::string>& predicted) {
    return classification_rate(confusion_matrix(actual, predicted));
}

}  // namespace gwkit
