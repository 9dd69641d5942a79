#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/dataset.hpp"
#include "gwkit/discriminant.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/pca.hpp"
#include "gwkit/regression.hpp"

namespace gwkit {

using BandwidthObjective = std::function<double(double)>;

struct BandwidthResult {
    double bandwidth = 0.0;
    double score = std::numeric_limits<double>::infinity();
    std::vector<std::string> warnings;
};

struct BandwidthProfile {
    Eigen::VectorXd bandwidths;  // ascending
    Eigen::VectorXd scores;      // +inf sentinels kept
    double argmin = 0.0;
    double argmin_score = std::numeric_limits<double>::infinity();
    std::string objective_label;
};

namespace detail {

// Evaluation cache; keys are the actual probed bandwidths (integers in
// adaptive mode), so the final pick can break ties toward the smaller value.
struct ObjectiveCache {
    const BandwidthObjective& objective;
    bool adaptive;
    double lower, upper;
    std::map<double, double> seen;

    double probe(double b) {
        if (adaptive) b = std::round(b);
        b = std::clamp(b, lower, upper);
        auto it = seen.find(b);
        if (it != seen.end()) return it->second;
        double s = objective(b);
        if (std::isnan(s)) s = std::numeric_limits<double>::infinity();
        seen.emplace(b, s);
        return s;
    }
};

}  // namespace detail

// Golden-section minimization of a bandwidth objective. Adaptive mode probes
// integers and finishes with an exact sweep of the final bracket. Returns the
// best evaluated bandwidth; ties go to the smaller one. A 10-point grid is
// checked afterwards and a warning records any value that beats the optimum
// (multiple minima).
inline BandwidthResult golden_section(const BandwidthObjective& objective, double lower,
                                      double upper, bool adaptive, bool guard = true) {
    if (!(lower <= upper)) throw input_error("bandwidth search needs lower <= upper");
    if (adaptive) {
        lower = std::ceil(lower);
        upper = std::floor(upper);
        if (!(lower <= upper)) throw input_error("empty integer bandwidth range");
    }
    detail::ObjectiveCache cache{objective, adaptive, lower, upper, {}};
    cache.probe(lower);
    cache.probe(upper);

    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    const double tol = adaptive ? 1.0 : std::max(1e-4 * (upper - lower), 1e-9);
    double lo = lower, hi = upper;
    double c = hi - ratio * (hi - lo);
    double d = lo + ratio * (hi - lo);
    while (hi - lo > tol) {
        if (cache.probe(c) <= cache.probe(d))
            hi = d;
        else
            lo = c;
        c = hi - ratio * (hi - lo);
        d = lo + ratio * (hi - lo);
    }
    if (adaptive)
        for (double b = std::floor(lo); b <= std::ceil(hi); b += 1.0) cache.probe(b);

    BandwidthResult best;
    for (const auto& [b, s] : cache.seen) {
        if (s < best.score) {
            best.score = s;
            best.bandwidth = b;
        }
    }
    if (std::isinf(best.score))
        throw numeric_error("no valid bandwidth in [" + std::to_string(lower) + ", " +
                            std::to_string(upper) + "]: objective is +inf everywhere");

    if (guard) {
        for (int g = 0; g < 10; ++g) {
            const double b = lower + (upper - lower) * g / 9.0;
            const double s = cache.probe(b);
            if (s < best.score)
                best.warnings.push_back(
                    "bandwidth objective has another minimum near " +
                    std::to_string(adaptive ? std::round(b) : b) +
                    " (score " + std::to_string(s) + ") that beats the selected optimum; "
                    "inspect the full profile");
        }
    }
    return best;
}

inline BandwidthProfile grid_profile(const BandwidthObjective& objective,
                                     std::vector<double> bandwidths,
                                     const std::string& label = "cv") {
    if (bandwidths.empty()) throw input_error("grid_profile needs at least one bandwidth");
    std::sort(bandwidths.begin(), bandwidths.end());
    BandwidthProfile profile;
    profile.objective_label = label;
    profile.bandwidths.resize(static_cast<Eigen::Index>(bandwidths.size()));
    profile.scores.resize(static_cast<Eigen::Index>(bandwidths.size()));
    for (std::size_t i = 0; i < bandwidths.size(); ++i) {
        profile.bandwidths[static_cast<Eigen::Index>(i)] = bandwidths[i];
        double s = objective(bandwidths[i]);
        if (std::isnan(s)) s = std::numeric_limits<double>::infinity();
        profile.scores[static_cast<Eigen::Index>(i)] = s;
    }
    profile.argmin = profile.bandwidths[0];
    profile.argmin_score = profile.scores[0];
    for (Eigen::Index i = 1; i < profile.scores.size(); ++i) {
        if (profile.scores[i] < profile.argmin_score) {
            profile.argmin_score = profile.scores[i];
            profile.argmin = profile.bandwidths[i];
        }
    }
    return profile;
}

namespace detail {

inline KernelSpec kernel_at(KernelFunction function, bool adaptive, double bandwidth) {
    if (adaptive) return KernelSpec::adaptive(function, static_cast<int>(std::llround(bandwidth)));
    return KernelSpec::fixed(function, bandwidth);
}

template <typename Fn>
double guarded_score(Fn&& fn) {
    try {
        return fn();
    } catch (const input_error&) {
        return std::numeric_limits<double>::infinity();
    } catch (const numeric_error&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace detail

// Objective factories: bandwidth -> score callables with failures mapped to
// +inf so the search can route around them.

inline BandwidthObjective gwr_cv_objective(const Dataset& data, const std::string& response,
                                           const std::vector<std::string>& predictors,
                                           KernelFunction function, bool adaptive,
                                           const DistanceMetric& metric) {
    return [&data, response, predictors, function, adaptive, metric](double b) {
        return detail::guarded_score([&] {
            return gwr_cv_score(data, response, predictors,
                                detail::kernel_at(function, adaptive, b), metric);
        });
    };
}

inline BandwidthObjective gwr_aicc_objective(const Dataset& data, const std::string& response,
                                             const std::vector<std::string>& predictors,
                                             KernelFunction function, bool adaptive,
                                             const DistanceMetric& metric) {
    return [&data, response, predictors, function, adaptive, metric](double b) {
        return detail::guarded_score([&] {
            return gwr_basic(data, response, predictors,
                             detail::kernel_at(function, adaptive, b), metric)
                .aicc;
        });
    };
}

inline BandwidthObjective gwpca_cv_objective(const Dataset& data, int k, KernelFunction function,
                                             bool adaptive, const DistanceMetric& metric) {
    return [&data, k, function, adaptive, metric](double b) {
        return detail::guarded_score([&] {
            return gwpca_cv_score(data, detail::kernel_at(function, adaptive, b), metric, k);
        });
    };
}

inline BandwidthObjective gwda_cv_objective(const Dataset& data,
                                            const std::vector<std::string>& labels,
                                            const std::vector<std::string>& predictors,
                                            const GwdaSpec& spec, KernelFunction function,
                                            bool adaptive, const DistanceMetric& metric) {
    return [&data, labels, predictors, spec, function, adaptive, metric](double b) {
        return detail::guarded_score([&] {
            return gwda_cv_score(data, labels, predictors, spec,
                                 detail::kernel_at(function, adaptive, b), metric);
        });
    };
}

// Default adaptive (neighbour-count) search bounds.
inline std::pair<int, int> adaptive_bounds_regression(int n, int p) {
    return {std::min(2 * (p + 1), n), n};
}

inline std::pair<int, int> adaptive_bounds_gwpca(int n, int k) {
    return {std::min(k + 2, n), n};
}

inline std::pair<int, int> adaptive_bounds_gwda(int n, int q, int n_classes) {
    return {std::min(std::max(2 * (q + 1), (q + 2) * n_classes), n), n};
}

// Fixed-bandwidth bounds from the observed distance range.
inline std::pair<double, double> fixed_bounds(const Eigen::MatrixXd& dist) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index j = 0; j < dist.cols(); ++j) {
        for (Eigen::Index i = 0; i < dist.rows(); ++i) {
            const double d = dist(i, j);
            if (d > 0.0 && d < lo) lo = d;
            if (d > hi) hi = d;
        }
    }
    if (!(hi > 0.0)) throw input_error("all locations coincide: no usable distance range");
    if (std::isinf(lo)) lo = hi;
    return {lo, hi};
}

// Per-observation CV contributions, dispatched by model kind; the sum equals
// the corresponding *_cv_score exactly.
struct CvSpec {
    enum class Model { gwr, gwpca };
    Model model = Model::gwr;
    std::string response;                // gwr only
    std::vector<std::string> variables;  // gwr predictors / gwpca variables
    int components = 1;                  // gwpca only
};

inline Eigen::VectorXd cv_contributions(const CvSpec& spec, const Dataset& data,
                                        const KernelSpec& kernel, const DistanceMetric& metric) {
    switch (spec.model) {
        case CvSpec::Model::gwr:
            return gwr_cv_contrib(data, spec.response, spec.variables, kernel, metric);
        case CvSpec::Model::gwpca:
            return gwpca_cv_contrib(spec.variables.empty() ? data : data.select(spec.variables),
                                    kernel, metric, spec.components);
    }
    throw input_error("unknown CV model kind");
}

inline double cv_score(const CvSpec& spec, const Dataset& data, const KernelSpec& kernel,
                       const DistanceMetric& metric) {
    return cv_contributions(spec, data, kernel, metric).sum();
}

}  // namespace gwkit
