#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/errors.hpp"

namespace gwkit {

enum class KernelFunction { boxcar, bisquare, tricube, gaussian, exponential };

inline std::string kernel_name(KernelFunction f) {
    switch (f) {
        case KernelFunction::boxcar: return "boxcar";
        case KernelFunction::bisquare: return "bisquare";
        case KernelFunction::tricube: return "tricube";
        case KernelFunction::gaussian: return "gaussian";
        case KernelFunction::exponential: return "exponential";
    }
    return "?";
}

inline KernelFunction kernel_from_name(const std::string& name) {
    if (name == "boxcar") return KernelFunction::boxcar;
    if (name == "bisquare") return KernelFunction::bisquare;
    if (name == "tricube") return KernelFunction::tricube;
    if (name == "gaussian") return KernelFunction::gaussian;
    if (name == "exponential") return KernelFunction::exponential;
    throw input_error("unknown kernel function: " + name);
}

// Kernel family plus bandwidth. Fixed mode stores a distance r (or b for the
// continuous kernels, same scalar); adaptive mode stores a neighbour count N
// whose Nth-nearest-neighbour distance sets the radius per calibration point.
struct KernelSpec {
    enum class Mode { fixed, adaptive };

    KernelFunction function = KernelFunction::bisquare;
    Mode mode = Mode::fixed;
    double radius = 0.0;      // fixed mode
    int neighbours = 0;       // adaptive mode

    static KernelSpec fixed(KernelFunction f, double r) {
        if (!(r > 0.0)) throw input_error("fixed bandwidth must be > 0");
        KernelSpec spec;
        spec.function = f;
        spec.mode = Mode::fixed;
        spec.radius = r;
        return spec;
    }

    static KernelSpec adaptive(KernelFunction f, int n_neighbours) {
        if (n_neighbours < 1) throw input_error("adaptive bandwidth must be >= 1 neighbour");
        KernelSpec spec;
        spec.function = f;
        spec.mode = Mode::adaptive;
        spec.neighbours = n_neighbours;
        return spec;
    }

    bool adaptive() const { return mode == Mode::adaptive; }

    double bandwidth_value() const {
        return adaptive() ? static_cast<double>(neighbours) : radius;
    }

    std::string describe() const {
        return kernel_name(function) + (adaptive() ? ", adaptive N=" + std::to_string(neighbours)
                                                   : ", fixed bw=" + std::to_string(radius));
    }
};

using WeightVector = Eigen::VectorXd;

// Radius actually used at one calibration point: the stored r in fixed mode,
// the Nth smallest entry of d (self-distance included when present) in
// adaptive mode.
inline double effective_radius(const Eigen::VectorXd& distances, const KernelSpec& spec) {
    if (!spec.adaptive()) return spec.radius;
    const int n = static_cast<int>(distances.size());
    if (spec.neighbours > n)
        throw input_error("adaptive bandwidth N=" + std::to_string(spec.neighbours) +
                          " exceeds the number of observations (" + std::to_string(n) + ")");
    std::vector<double> sorted(distances.data(), distances.data() + n);
    auto nth = sorted.begin() + (spec.neighbours - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());
    return *nth;
}

// Table-1 weight for a single distance. radius is r for the compact kernels
// and b for gaussian/exponential.
inline double kernel_weight(KernelFunction f, double d, double radius) {
    switch (f) {
        case KernelFunction::boxcar:
            return d <= radius ? 1.0 : 0.0;
        case KernelFunction::bisquare: {
            if (d > radius) return 0.0;
            const double u = 1.0 - (d / radius) * (d / radius);
            return u * u;
        }
        case KernelFunction::tricube: {
            if (d > radius) return 0.0;
            const double t = (d / radius);
            const double u = 1.0 - t * t * t;
            return u * u * u;
        }
        case KernelFunction::gaussian:
            return std::exp(-0.5 * (d / radius) * (d / radius));
        case KernelFunction::exponential:
            return std::exp(-d / radius);
    }
    return 0.0;
}

// Geographic weights for one calibration point, given its distances to all
// observations.
inline WeightVector weight_vector(const Eigen::VectorXd& distances, const KernelSpec& spec) {
    const double radius = effective_radius(distances, spec);
    if (!(radius > 0.0))
        throw input_error("degenerate bandwidth: effective radius is zero (duplicate locations?)");
    WeightVector w(distances.size());
    for (int j = 0; j < distances.size(); ++j)
        w[j] = kernel_weight(spec.function, distances[j], radius);
    return w;
}

}  // namespace gwkit
