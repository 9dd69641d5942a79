#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gwkit/dataset.hpp"
#include "gwkit/errors.hpp"

namespace gwkit {

namespace detail {

// RFC 4180-style row splitter: quoted fields, doubled quotes, CR tolerance.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char ch;
    while (in.get(ch)) {
        any = true;
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    if (quoted) throw input_error("unterminated quoted field at end of file");
    if (any && (!field.empty() || !row.empty())) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    // ERANGE still delivers the nearest representable value (denormal or
    // +-inf); the caller's finiteness check deals with overflow.
    return end == s.c_str() + s.size() && (errno == 0 || errno == ERANGE);
}

inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// A loaded CSV: coordinates plus every numeric column as an analysis
// variable; non-numeric columns are kept aside as label columns (usable for
// class labels, never as analysis variables).
struct CsvData {
    Dataset dataset;
    std::vector<std::string> label_names;
    std::vector<std::vector<std::string>> label_values;

    bool has_labels(const std::string& name) const {
        return std::find(label_names.begin(), label_names.end(), name) != label_names.end();
    }
    const std::vector<std::string>& labels(const std::string& name) const {
        const auto it = std::find(label_names.begin(), label_names.end(), name);
        if (it == label_names.end())
            throw input_error("no label column named '" + name + "' in the input file");
        return label_values[static_cast<std::size_t>(it - label_names.begin())];
    }
};

inline CsvData load_csv(const std::string& path, const std::string& x_col,
                        const std::string& y_col) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open input file '" + path + "'");
    const auto rows = detail::parse_csv(in);
    if (rows.size() < 2)
        throw input_error("input file '" + path + "' needs a header row and at least one data row");
    const std::vector<std::string>& header = rows.front();
    const std::size_t ncol = header.size();
    for (std::size_t c = 0; c < ncol; ++c)
        for (std::size_t c2 = c + 1; c2 < ncol; ++c2)
            if (header[c] == header[c2])
                throw input_error("duplicate column name '" + header[c] + "' in header");
    const std::size_t n = rows.size() - 1;
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() != ncol)
            throw input_error("row " + std::to_string(r) + " has " +
                              std::to_string(rows[r].size()) + " fields, expected " +
                              std::to_string(ncol));

    const auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw input_error("missing column '" + name + "' in '" + path + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t xi = column_index(x_col);
    const std::size_t yi = column_index(y_col);

    CsvData out;
    out.dataset.points.coords.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t r = 0; r < n; ++r) {
        for (int k = 0; k < 2; ++k) {
            const std::size_t c = k == 0 ? xi : yi;
            double v;
            if (!detail::parse_double(rows[r + 1][c], v) || !std::isfinite(v))
                throw input_error("column '" + header[c] + "', data row " +
                                  std::to_string(r + 1) + ": coordinate value '" +
                                  rows[r + 1][c] + "' is not a finite number");
            out.dataset.points.coords(static_cast<Eigen::Index>(r), k) = v;
        }
    }

    std::vector<std::pair<std::size_t, std::vector<double>>> numeric;
    for (std::size_t c = 0; c < ncol; ++c) {
        if (c == xi || c == yi) continue;
        std::vector<double> parsed(n);
        bool is_numeric = true;
        for (std::size_t r = 0; r < n && is_numeric; ++r)
            is_numeric = detail::parse_double(rows[r + 1][c], parsed[r]);
        if (is_numeric) {
            for (std::size_t r = 0; r < n; ++r)
                if (!std::isfinite(parsed[r]))
                    throw input_error("column '" + header[c] + "', data row " +
                                      std::to_string(r + 1) + ": non-finite value '" +
                                      rows[r + 1][c] + "'");
            numeric.emplace_back(c, std::move(parsed));
        } else {
            out.label_names.push_back(header[c]);
            auto& col = out.label_values.emplace_back();
            col.reserve(n);
            for (std::size_t r = 0; r < n; ++r) col.push_back(rows[r + 1][c]);
        }
    }

    out.dataset.values.resize(static_cast<Eigen::Index>(n),
                              static_cast<Eigen::Index>(numeric.size()));
    for (std::size_t j = 0; j < numeric.size(); ++j) {
        out.dataset.names.push_back(header[numeric[j].first]);
        for (std::size_t r = 0; r < n; ++r)
            out.dataset.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                numeric[j].second[r];
    }
    if (out.dataset.m() > 0) out.dataset.validate();
    return out;
}

// Flat per-location results ready for CSV/GeoJSON export. Coordinates are
// optional (zero columns = plain table, e.g. a bandwidth profile).
struct ResultTable {
    std::vector<std::string> coord_names{"x", "y"};
    Eigen::MatrixXd coords;  // n x 2 or n x 0
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // n x columns
    std::vector<std::string> text_columns;
    std::vector<std::vector<std::string>> text_values;

    void check() const {
        const Eigen::Index n = values.rows();
        if (coords.size() > 0 && coords.rows() != n)
            throw input_error("result table coordinate row count mismatch");
        if (values.cols() != static_cast<Eigen::Index>(columns.size()))
            throw input_error("result table column label mismatch");
        if (text_values.size() != text_columns.size())
            throw input_error("result table text column label mismatch");
        for (const auto& col : text_values)
            if (static_cast<Eigen::Index>(col.size()) != n)
                throw input_error("result table text column row count mismatch");
    }
};

inline void write_csv(const ResultTable& table, const std::string& path) {
    table.check();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write output file '" + path + "'");
    const bool with_coords = table.coords.size() > 0;
    std::string line;
    bool first = true;
    const auto emit = [&](const std::string& cell) {
        if (!first) line += ',';
        line += detail::csv_escape(cell);
        first = false;
    };
    if (with_coords)
        for (const auto& c : table.coord_names) emit(c);
    for (const auto& c : table.text_columns) emit(c);
    for (const auto& c : table.columns) emit(c);
    out << line << '\n';
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        line.clear();
        first = true;
        if (with_coords)
            for (Eigen::Index k = 0; k < table.coords.cols(); ++k)
                emit(detail::format17(table.coords(i, k)));
        for (const auto& col : table.text_values) emit(col[static_cast<std::size_t>(i)]);
        for (Eigen::Index c = 0; c < table.values.cols(); ++c)
            emit(detail::format17(table.values(i, c)));
        out << line << '\n';
    }
    if (!out) throw input_error("failed while writing '" + path + "'");
}

// RFC 7946 point features carrying the same properties as the CSV columns.
inline void write_geojson(const ResultTable& table, const std::string& path) {
    table.check();
    if (table.coords.size() == 0)
        throw input_error("GeoJSON export needs coordinates in the result table");
    nlohmann::json root;
    root["type"] = "FeatureCollection";
    auto& features = root["features"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        nlohmann::json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"},
                         {"coordinates", {table.coords(i, 0), table.coords(i, 1)}}};
        auto& props = f["properties"] = nlohmann::json::object();
        for (std::size_t c = 0; c < table.text_columns.size(); ++c)
            props[table.text_columns[c]] = table.text_values[c][static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            const double v = table.values(i, c);
            if (std::isfinite(v))
                props[table.columns[static_cast<std::size_t>(c)]] = v;
            else  // JSON has no inf/nan; keep the sentinel readable
                props[table.columns[static_cast<std::size_t>(c)]] = detail::format17(v);
        }
        features.push_back(std::move(f));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write output file '" + path + "'");
    out << root.dump(1, '\t') << '\n';
    if (!out) throw input_error("failed while writing '" + path + "'");
}

// Election-result labelling: winner shares within [45,55] percent (inclusive)
// become "Borderline", anything else keeps the winner's label.
inline std::vector<std::string> derive_election_classes(
    const Eigen::VectorXd& winner_share, const std::vector<std::string>& winner_labels) {
    if (winner_share.size() != static_cast<Eigen::Index>(winner_labels.size()))
        throw input_error("winner share and label vectors differ in length");
    std::vector<std::string> classes;
    classes.reserve(winner_labels.size());
    for (Eigen::Index i = 0; i < winner_share.size(); ++i) {
        const double s = winner_share[i];
        if (!(s >= 0.0 && s <= 100.0))
            throw input_error("winner share " + std::to_string(s) + " at row " +
                              std::to_string(i) + " is outside [0,100]");
        if (s >= 45.0 && s <= 55.0)
            classes.emplace_back("Borderline");
        else
            classes.push_back(winner_labels[static_cast<std::size_t>(i)]);
    }
    return classes;
}

}  // namespace gwkit
