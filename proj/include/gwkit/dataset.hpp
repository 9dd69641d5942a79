#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwkit/errors.hpp"
#include "gwkit/geometry.hpp"

namespace gwkit {

// n observations of m named variables bound to point locations.
struct Dataset {
    PointSet points;
    Eigen::MatrixXd values;  // n x m
    std::vector<std::string> names;

    int n() const { return static_cast<int>(values.rows()); }
    int m() const { return static_cast<int>(values.cols()); }

    int column_index(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<int>(j);
        throw input_error("unknown variable: " + name);
    }

    Eigen::VectorXd column(const std::string& name) const { return values.col(column_index(name)); }

    Dataset select(const std::vector<std::string>& vars) const {
        Dataset out;
        out.points = points;
        out.names = vars;
        out.values.resize(n(), static_cast<Eigen::Index>(vars.size()));
        for (std::size_t j = 0; j < vars.size(); ++j)
            out.values.col(static_cast<Eigen::Index>(j)) = column(vars[j]);
        return out;
    }

    void validate() const {
        points.validate();
        if (values.rows() != points.coords.rows())
            throw input_error("value rows must match point count");
        if (static_cast<std::size_t>(values.cols()) != names.size())
            throw input_error("column count must equal variable name count");
        std::set<std::string> unique(names.begin(), names.end());
        if (unique.size() != names.size()) throw input_error("variable names must be unique");
        for (int i = 0; i < values.rows(); ++i)
            for (int j = 0; j < values.cols(); ++j)
                if (!std::isfinite(values(i, j)))
                    throw input_error("non-finite value at row " + std::to_string(i) +
                                      ", variable " + names[static_cast<std::size_t>(j)]);
    }
};

// Column-wise (x - mean)/sd with global moments, sd on the n-1 divisor.
inline Dataset standardize_global(const Dataset& data) {
    Dataset out = data;
    const int n = data.n();
    if (n < 2) throw input_error("standardization needs at least 2 observations");
    for (int j = 0; j < data.m(); ++j) {
        const double mean = data.values.col(j).mean();
        const double ss = (data.values.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / (n - 1));
        if (!(sd > 0.0))
            throw input_error("zero-variance column: " + data.names[static_cast<std::size_t>(j)]);
        out.values.col(j) = (data.values.col(j).array() - mean) / sd;
    }
    return out;
}

}  // namespace gwkit
