#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "gwkit/errors.hpp"

namespace gwkit {

// Mean Earth radius in metres; geodesic distances are great-circle.
inline constexpr double kEarthRadiusMetres = 6371009.0;

// Calibration geometry: one row per location. Projected x/y in length
// units, or lon/lat degrees when used with the geodesic metric.
struct PointSet {
    Eigen::MatrixXd coords;  // n x 2

    int size() const { return static_cast<int>(coords.rows()); }

    void validate() const {
        if (coords.rows() < 1 || coords.cols() != 2)
            throw input_error("PointSet requires an n x 2 coordinate matrix with n >= 1");
        for (int i = 0; i < coords.rows(); ++i) {
            if (!std::isfinite(coords(i, 0)) || !std::isfinite(coords(i, 1)))
                throw input_error("non-finite coordinate at row " + std::to_string(i));
        }
    }

    void validate_lonlat() const {
        validate();
        for (int i = 0; i < coords.rows(); ++i) {
            const double lon = coords(i, 0), lat = coords(i, 1);
            if (lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0)
                throw input_error("geodesic coordinates out of range at row " + std::to_string(i) +
                                  " (need lon in [-180,180], lat in [-90,90])");
        }
    }
};

// Minkowski-family metric with optional axis rotation, or great-circle.
struct DistanceMetric {
    enum class Kind { minkowski, geodesic };

    Kind kind = Kind::minkowski;
    double p = 2.0;      // Minkowski power, >= 1
    double theta = 0.0;  // axis rotation in radians, [0, 2*pi)

    static DistanceMetric euclidean() { return {Kind::minkowski, 2.0, 0.0}; }

    static DistanceMetric minkowski(double p, double theta = 0.0) {
        if (!(p >= 1.0)) throw input_error("Minkowski power must satisfy p >= 1");
        if (!(theta >= 0.0) || theta >= 2.0 * std::numbers::pi)
            throw input_error("rotation angle must lie in [0, 2*pi)");
        return {Kind::minkowski, p, theta};
    }

    static DistanceMetric geodesic() { return {Kind::geodesic, 2.0, 0.0}; }

    bool is_geodesic() const { return kind == Kind::geodesic; }
};

namespace detail {

inline double minkowski_distance(double du, double dv, double p) {
    if (p == 2.0) return std::hypot(du, dv);
    if (p == 1.0) return std::abs(du) + std::abs(dv);
    return std::pow(std::pow(std::abs(du), p) + std::pow(std::abs(dv), p), 1.0 / p);
}

inline double haversine_metres(double lon1, double lat1, double lon2, double lat2) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double phi1 = lat1 * rad, phi2 = lat2 * rad;
    const double dphi = (lat2 - lat1) * rad, dlam = (lon2 - lon1) * rad;
    const double s1 = std::sin(0.5 * dphi), s2 = std::sin(0.5 * dlam);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return kEarthRadiusMetres * 2.0 * std::asin(std::sqrt(std::min(1.0, h)));
}

}  // namespace detail

// All pairwise distances: zero diagonal, symmetric. Minkowski distances are
// computed after rotating axes by theta; geodesic distances are great-circle
// metres from lon/lat degrees.
inline Eigen::MatrixXd distance_matrix(const PointSet& points, const DistanceMetric& metric) {
    if (metric.is_geodesic())
        points.validate_lonlat();
    else
        points.validate();

    const int n = points.size();
    Eigen::MatrixXd coords = points.coords;
    if (!metric.is_geodesic() && metric.theta != 0.0) {
        const double c = std::cos(metric.theta), s = std::sin(metric.theta);
        Eigen::Matrix2d rotation;
        rotation << c, -s, s, c;
        coords = points.coords * rotation;
    }

    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d;
            if (metric.is_geodesic()) {
                d = detail::haversine_metres(coords(i, 0), coords(i, 1), coords(j, 0), coords(j, 1));
            } else {
                d = detail::minkowski_distance(coords(i, 0) - coords(j, 0),
                                               coords(i, 1) - coords(j, 1), metric.p);
            }
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

}  // namespace gwkit
