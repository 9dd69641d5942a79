// Command-line front end: loads CSV point data, runs the requested GW
// analysis, writes per-location tables (CSV/GeoJSON) and prints summaries.
// Exit codes: 0 success, 2 bad input, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwkit/gwkit.hpp"

namespace {

using namespace gwkit;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct CommonOpts {
    std::string input;
    std::string x_col = "x";
    std::string y_col = "y";
    std::string kernel = "bisquare";
    std::string bw = "auto";
    bool adaptive = false;
    double minkowski_p = 2.0;
    double theta = 0.0;
    bool geodesic = false;
    std::string output;
    std::string geojson;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_kernel = true) {
    cmd->add_option("--input", o.input, "input CSV with a header row")->required();
    cmd->add_option("--x", o.x_col, "x / longitude column (default x)");
    cmd->add_option("--y", o.y_col, "y / latitude column (default y)");
    cmd->add_option("--minkowski-p", o.minkowski_p, "Minkowski power p >= 1 (default 2)");
    cmd->add_option("--theta", o.theta, "axis rotation in radians, [0, 2*pi)");
    cmd->add_flag("--geodesic", o.geodesic, "great-circle distances from lon/lat degrees");
    cmd->add_option("--output", o.output, "write per-location results to this CSV");
    cmd->add_option("--geojson", o.geojson, "write per-location results to this GeoJSON");
    if (with_kernel) {
        cmd->add_option("--kernel", o.kernel,
                        "boxcar|bisquare|tricube|gaussian|exponential (default bisquare)");
        cmd->add_option("--bw", o.bw, "bandwidth value, or 'auto' to optimize");
        cmd->add_flag("--adaptive", o.adaptive, "bandwidth counts nearest neighbours");
    }
}

DistanceMetric metric_of(const CommonOpts& o) {
    if (o.geodesic) return DistanceMetric::geodesic();
    return DistanceMetric::minkowski(o.minkowski_p, o.theta);
}

std::string metric_label(const CommonOpts& o) {
    if (o.geodesic) return "geodesic";
    std::string s = "minkowski p=" + format_number(o.minkowski_p);
    if (o.theta != 0.0) s += " theta=" + format_number(o.theta);
    return s;
}

bool bw_is_auto(const CommonOpts& o) { return o.bw == "auto"; }

double parse_bw_value(const CommonOpts& o) {
    try {
        std::size_t used = 0;
        const double v = std::stod(o.bw, &used);
        if (used != o.bw.size()) throw std::invalid_argument(o.bw);
        return v;
    } catch (const std::exception&) {
        throw input_error("--bw must be a number or 'auto', got '" + o.bw + "'");
    }
}

KernelSpec kernel_at_bw(const CommonOpts& o, double bw) {
    const KernelFunction f = kernel_from_name(o.kernel);
    if (o.adaptive) return KernelSpec::adaptive(f, static_cast<int>(std::llround(bw)));
    return KernelSpec::fixed(f, bw);
}

void print_bandwidth(double bw, bool adaptive) {
    if (adaptive)
        std::cout << "bandwidth: " << static_cast<long long>(std::llround(bw)) << " (adaptive)\n";
    else
        std::cout << "bandwidth: " << format_number(bw) << " (fixed)\n";
}

void run_log(const CommonOpts& o, const std::string& what, double bw,
             std::optional<std::uint64_t> seed = std::nullopt) {
    std::cerr << "log: " << what << " input=" << o.input << " kernel=" << o.kernel
              << (o.adaptive ? " adaptive N=" : " fixed bw=") << format_number(bw)
              << " metric=" << metric_label(o);
    if (seed) std::cerr << " seed=" << *seed;
    std::cerr << "\n";
}

void export_table(const CommonOpts& o, const ResultTable& table) {
    if (!o.output.empty()) write_csv(table, o.output);
    if (!o.geojson.empty()) write_geojson(table, o.geojson);
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(tok);
        }
    }
    return out;
}

void print_five_number(const std::vector<std::string>& names, const Eigen::MatrixXd& five) {
    std::printf("%-14s %12s %12s %12s %12s %12s\n", "coefficient", "min", "q1", "median", "q3",
                "max");
    for (Eigen::Index k = 0; k < five.rows(); ++k)
        std::printf("%-14s %12.5g %12.5g %12.5g %12.5g %12.5g\n",
                    names[static_cast<std::size_t>(k)].c_str(), five(k, 0), five(k, 1),
                    five(k, 2), five(k, 3), five(k, 4));
}

struct BwSearchOutcome {
    double bandwidth;
    std::vector<std::string> warnings;
};

BwSearchOutcome search_bandwidth(const BandwidthObjective& objective, const CommonOpts& o,
                                 const Eigen::MatrixXd& dist, int lower_adaptive, int n) {
    BandwidthResult r;
    if (o.adaptive) {
        r = golden_section(objective, lower_adaptive, n, true);
    } else {
        const auto [lo, hi] = fixed_bounds(dist);
        r = golden_section(objective, lo, hi, false);
    }
    return {r.bandwidth, r.warnings};
}

// ---------------------------------------------------------------- dist ----

int cmd_dist(const CommonOpts& o) {
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const Eigen::MatrixXd dist = distance_matrix(csv.dataset.points, metric_of(o));
    std::cerr << "log: dist input=" << o.input << " n=" << dist.rows()
              << " metric=" << metric_label(o) << "\n";
    ResultTable table;
    table.coords.resize(dist.rows(), 0);
    table.values = dist;
    for (Eigen::Index j = 0; j < dist.cols(); ++j)
        table.columns.push_back("d" + std::to_string(j));
    if (o.output.empty()) throw input_error("dist needs --output");
    write_csv(table, o.output);
    std::cout << "distances: " << dist.rows() << " x " << dist.cols() << " written to "
              << o.output << "\n";
    return 0;
}

// ---------------------------------------------------------------- gwss ----

int cmd_gwss(const CommonOpts& o, const std::vector<std::string>& vars_raw) {
    const auto vars = split_list(vars_raw);
    if (vars.empty()) throw input_error("gwss needs --vars");
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    if (bw_is_auto(o)) throw input_error("gwss needs an explicit --bw (no objective to optimize)");
    const double bw = parse_bw_value(o);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwss", bw);
    const GwssResult res = gwss(csv.dataset, vars, kernel, metric_of(o));

    ResultTable table;
    table.coords = csv.dataset.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    const int m = static_cast<int>(vars.size());
    const int np = static_cast<int>(res.pairs.size());
    table.values.resize(res.means.rows(), 2 * m + 2 * np);
    for (int j = 0; j < m; ++j) {
        table.columns.push_back("Mean_" + vars[static_cast<std::size_t>(j)]);
        table.values.col(j) = res.means.col(j);
    }
    for (int j = 0; j < m; ++j) {
        table.columns.push_back("SD_" + vars[static_cast<std::size_t>(j)]);
        table.values.col(m + j) = res.sds.col(j);
    }
    for (int q = 0; q < np; ++q) {
        table.columns.push_back("Cov_" + res.pair_labels[static_cast<std::size_t>(q)]);
        table.values.col(2 * m + q) = res.covariances.col(q);
    }
    for (int q = 0; q < np; ++q) {
        table.columns.push_back("Corr_" + res.pair_labels[static_cast<std::size_t>(q)]);
        table.values.col(2 * m + np + q) = res.correlations.col(q);
    }
    export_table(o, table);
    if (!res.undefined_correlations.empty())
        std::cerr << "warning: " << res.undefined_correlations.size()
                  << " undefined local correlation(s) (zero local sd)\n";
    std::cout << "gwss: " << res.means.rows() << " locations, " << table.columns.size()
              << " statistic surfaces\n";
    return 0;
}

// --------------------------------------------------------------- gwpca ----

int cmd_gwpca(const CommonOpts& o, const std::vector<std::string>& vars_raw, int k,
              bool raw_scale, const std::string& loadings_path, const std::string& scores_path) {
    const auto vars = split_list(vars_raw);
    if (vars.empty()) throw input_error("gwpca needs --vars");
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    Dataset data = csv.dataset.select(vars);
    if (!raw_scale) data = standardize_global(data);
    const DistanceMetric metric = metric_of(o);

    double bw;
    if (bw_is_auto(o)) {
        const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
        const auto objective =
            gwpca_cv_objective(data, k, kernel_from_name(o.kernel), o.adaptive, metric);
        const auto outcome = search_bandwidth(objective, o, dist,
                                              adaptive_bounds_gwpca(data.n(), k).first, data.n());
        for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        bw = outcome.bandwidth;
    } else {
        bw = parse_bw_value(o);
    }
    print_bandwidth(bw, o.adaptive);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwpca", bw);

    const GwpcaResult res = gwpca(data, kernel, metric, k, !scores_path.empty());
    const int m = data.m();
    ResultTable table;
    table.coords = data.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    table.values.resize(res.eigenvalues.rows(), 2 * m);
    for (int c = 0; c < m; ++c) {
        table.columns.push_back("Eval_" + std::to_string(c + 1));
        table.values.col(c) = res.eigenvalues.col(c);
    }
    for (int c = 0; c < m; ++c) {
        table.columns.push_back("PTV_" + std::to_string(c + 1));
        table.values.col(m + c) = res.ptv.col(c);
    }
    export_table(o, table);

    if (!loadings_path.empty()) {
        // long format: one row per location x component x variable
        const Eigen::Index rows = static_cast<Eigen::Index>(res.loadings.size()) * m * m;
        ResultTable lt;
        lt.coords.resize(rows, 0);
        lt.columns = {"location", "component", "variable", "loading"};
        lt.values.resize(rows, 4);
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < res.loadings.size(); ++i)
            for (int c = 0; c < m; ++c)
                for (int v = 0; v < m; ++v, ++r)
                    lt.values.row(r) << static_cast<double>(i), c + 1.0, v + 0.0,
                        res.loadings[i](v, c);
        write_csv(lt, loadings_path);
    }
    if (!scores_path.empty()) {
        // each observation scored at its own calibration point
        ResultTable st;
        st.coords = data.points.coords;
        st.coord_names = {o.x_col, o.y_col};
        st.values.resize(data.n(), m);
        for (int c = 0; c < m; ++c) st.columns.push_back("Score_" + std::to_string(c + 1));
        for (int i = 0; i < data.n(); ++i)
            st.values.row(i) = res.scores[static_cast<std::size_t>(i)].row(i);
        write_csv(st, scores_path);
    }
    std::cout << "gwpca: " << data.n() << " locations, " << m << " variables, k=" << k << "\n";
    return 0;
}

// ----------------------------------------------------------------- gwr ----

void append_fit_columns(ResultTable& table, const GwrFit& fit, const AdjustedPValues* adj) {
    const int n = fit.n(), p = fit.p();
    const int blocks = adj != nullptr ? 8 : 3;
    table.values.resize(n, p * blocks + 2);
    int col = 0;
    const auto add = [&](const std::string& name, const Eigen::VectorXd& v) {
        table.columns.push_back(name);
        table.values.col(col++) = v;
    };
    for (int k = 0; k < p; ++k) {
        const std::string& name = fit.coef_names[static_cast<std::size_t>(k)];
        add(name, fit.coefficients.col(k));
        add(name + "_SE", fit.std_errors.col(k));
        add(name + "_t", fit.t_values.col(k));
        if (adj != nullptr) {
            add(name + "_p", adj->p_original.col(k));
            add(name + "_p_bh", adj->p_bh.col(k));
            add(name + "_p_by", adj->p_by.col(k));
            add(name + "_p_bo", adj->p_bonferroni.col(k));
            add(name + "_p_fb", adj->p_fb.col(k));
        }
    }
    add("yhat", fit.fitted);
    add("residual", fit.residuals);
}

int cmd_gwr(const CommonOpts& o, const std::string& response,
            const std::vector<std::string>& predictors_raw, const std::string& objective_name) {
    const auto predictors = split_list(predictors_raw);
    if (response.empty() || predictors.empty())
        throw input_error("gwr needs --response and --predictors");
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const Dataset& data = csv.dataset;
    const DistanceMetric metric = metric_of(o);
    const int p = static_cast<int>(predictors.size()) + 1;

    double bw;
    if (bw_is_auto(o)) {
        const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
        BandwidthObjective objective;
        if (objective_name == "aicc")
            objective = gwr_aicc_objective(data, response, predictors,
                                           kernel_from_name(o.kernel), o.adaptive, metric);
        else if (objective_name == "cv")
            objective = gwr_cv_objective(data, response, predictors, kernel_from_name(o.kernel),
                                         o.adaptive, metric);
        else
            throw input_error("--objective must be cv or aicc");
        const auto outcome = search_bandwidth(
            objective, o, dist, adaptive_bounds_regression(data.n(), p).first, data.n());
        for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        bw = outcome.bandwidth;
    } else {
        bw = parse_bw_value(o);
    }
    print_bandwidth(bw, o.adaptive);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwr", bw);

    const GwrFit fit = gwr_basic(data, response, predictors, kernel, metric);
    const AdjustedPValues adj = adjust_all(fit);

    ResultTable table;
    table.coords = data.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    append_fit_columns(table, fit, &adj);
    export_table(o, table);

    const CoefficientSummary summary = coefficient_summary(fit);
    print_five_number(summary.coef_names, summary.five);
    std::printf("AICc: %.6f  enp: %.4f  tr(S): %.4f  sigma2: %.6g  RSS: %.6g\n", fit.aicc,
                fit.enp, fit.tr_s, fit.sigma2_hat, fit.residuals.squaredNorm());
    return 0;
}

// ----------------------------------------------------------- gwr-mixed ----

int cmd_gwr_mixed(const CommonOpts& o, const std::string& response,
                  const std::vector<std::string>& local_raw,
                  const std::vector<std::string>& global_raw, bool local_intercept) {
    const auto locals = split_list(local_raw);
    const auto globals = split_list(global_raw);
    if (response.empty()) throw input_error("gwr-mixed needs --response");
    if (locals.empty() && local_intercept == false && globals.empty())
        throw input_error("gwr-mixed needs at least one of --local-vars / --global-vars");
    if (bw_is_auto(o))
        throw input_error("gwr-mixed reuses a caller-chosen bandwidth; pass a numeric --bw "
                          "(select one first with the bw subcommand)");
    const double bw = parse_bw_value(o);
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwr-mixed", bw);

    const MixedGwrFit fit = gwr_mixed(csv.dataset, response, locals, globals, !local_intercept,
                                      kernel, metric_of(o));
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";

    std::cout << "back-fitting: " << fit.iterations << " iterations, "
              << (fit.converged ? "converged" : "NOT converged") << "\n";
    std::cout << "Estimated global coefficients:";
    for (Eigen::Index j = 0; j < fit.global_coefficients.size(); ++j)
        std::cout << " " << fit.global_names[static_cast<std::size_t>(j)] << "="
                  << format_number(fit.global_coefficients[j]);
    std::cout << "\n";

    const int kb = static_cast<int>(fit.local_coefficients.cols());
    if (kb > 0) {
        Eigen::MatrixXd five(kb, 5);
        for (int k = 0; k < kb; ++k) {
            std::vector<double> col(fit.local_coefficients.col(k).data(),
                                    fit.local_coefficients.col(k).data() +
                                        fit.local_coefficients.rows());
            std::sort(col.begin(), col.end());
            five(k, 0) = col.front();
            five(k, 1) = detail::quantile_type7(col, 0.25);
            five(k, 2) = detail::quantile_type7(col, 0.50);
            five(k, 3) = detail::quantile_type7(col, 0.75);
            five(k, 4) = col.back();
        }
        print_five_number(fit.local_names, five);
    }

    ResultTable table;
    table.coords = csv.dataset.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    table.values.resize(fit.fitted.size(), kb + 2);
    for (int k = 0; k < kb; ++k) {
        table.columns.push_back(fit.local_names[static_cast<std::size_t>(k)]);
        table.values.col(k) = fit.local_coefficients.col(k);
    }
    table.columns.push_back("yhat");
    table.values.col(kb) = fit.fitted;
    table.columns.push_back("residual");
    table.values.col(kb + 1) = fit.residuals;
    export_table(o, table);
    return 0;
}

// ---------------------------------------------------------- gwr-hetero ----

int cmd_gwr_hetero(const CommonOpts& o, const std::string& response,
                   const std::vector<std::string>& predictors_raw) {
    const auto predictors = split_list(predictors_raw);
    if (response.empty() || predictors.empty())
        throw input_error("gwr-hetero needs --response and --predictors");
    if (bw_is_auto(o))
        throw input_error("gwr-hetero needs a numeric --bw (select one with the bw subcommand)");
    const double bw = parse_bw_value(o);
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwr-hetero", bw);

    const HeteroGwrFit fit = gwr_hetero(csv.dataset, response, predictors, kernel, metric_of(o));
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "variance iteration: " << fit.iterations << " refits, "
              << (fit.converged ? "converged" : "NOT converged") << "\n";

    const int p = static_cast<int>(fit.coefficients.cols());
    ResultTable table;
    table.coords = csv.dataset.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    table.values.resize(fit.coefficients.rows(), p + 1);
    for (int k = 0; k < p; ++k) {
        table.columns.push_back(fit.coef_names[static_cast<std::size_t>(k)]);
        table.values.col(k) = fit.coefficients.col(k);
    }
    table.columns.push_back("local_variance");
    table.values.col(p) = fit.variances;
    export_table(o, table);
    return 0;
}

// ---------------------------------------------------------------- gwda ----

int cmd_gwda(const CommonOpts& o, const std::string& class_col, const std::string& share_col,
             const std::string& winner_col, const std::vector<std::string>& predictors_raw,
             const std::string& method) {
    const auto predictors = split_list(predictors_raw);
    if (predictors.empty()) throw input_error("gwda needs --predictors");
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const Dataset& data = csv.dataset;

    std::vector<std::string> classes;
    if (!class_col.empty()) {
        if (csv.has_labels(class_col))
            classes = csv.labels(class_col);
        else
            throw input_error("--class-col '" + class_col + "' is not a label column");
    } else if (!share_col.empty() && !winner_col.empty()) {
        classes = derive_election_classes(data.column(share_col), csv.labels(winner_col));
    } else {
        throw input_error("gwda needs --class-col, or --share-col with --winner-col");
    }

    GwdaSpec spec;
    if (method == "lda")
        spec.method = GwdaSpec::Method::lda;
    else if (method == "qda")
        spec.method = GwdaSpec::Method::qda;
    else
        throw input_error("--method must be lda or qda");

    const DistanceMetric metric = metric_of(o);
    const int q = static_cast<int>(predictors.size());
    detail::ClassIndex ci = detail::index_classes(classes);

    double bw;
    if (bw_is_auto(o)) {
        const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
        const auto objective = gwda_cv_objective(data, classes, predictors, spec,
                                                 kernel_from_name(o.kernel), o.adaptive, metric);
        const auto outcome = search_bandwidth(
            objective, o, dist,
            adaptive_bounds_gwda(data.n(), q, static_cast<int>(ci.labels.size())).first,
            data.n());
        for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        bw = outcome.bandwidth;
    } else {
        bw = parse_bw_value(o);
    }
    print_bandwidth(bw, o.adaptive);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "gwda", bw);

    const GwdaResult res = gwda_fit_predict(data, classes, predictors, spec, kernel, metric);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

    const ConfusionMatrix cm = confusion_matrix(classes, res.predicted_labels);
    std::cout << "confusion matrix (rows predicted, columns actual):\n";
    std::printf("%-12s", "");
    for (const auto& l : cm.labels) std::printf(" %10s", l.c_str());
    std::printf(" %10s\n", "Total");
    for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
        std::printf("%-12s", cm.labels[static_cast<std::size_t>(r)].c_str());
        for (Eigen::Index c = 0; c < cm.counts.cols(); ++c)
            std::printf(" %10d", cm.counts(r, c));
        std::printf(" %10d\n", static_cast<int>(cm.counts.row(r).sum()));
    }
    std::printf("%-12s", "Total");
    for (Eigen::Index c = 0; c < cm.counts.cols(); ++c)
        std::printf(" %10d", static_cast<int>(cm.counts.col(c).sum()));
    std::printf(" %10d\n", cm.total);
    std::printf("classification rate: %.4f\n", classification_rate(cm));

    ResultTable table;
    table.coords = data.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    table.text_columns = {"actual", "predicted"};
    table.text_values = {classes, res.predicted_labels};
    const int k = static_cast<int>(res.class_labels.size());
    table.values.resize(res.scores.rows(), k);
    for (int j = 0; j < k; ++j) {
        table.columns.push_back("LP_" + res.class_labels[static_cast<std::size_t>(j)]);
        table.values.col(j) = res.scores.col(j);
    }
    export_table(o, table);
    return 0;
}

// ------------------------------------------------------------------ bw ----

int cmd_bw(const CommonOpts& o, const std::string& model, const std::string& objective_name,
           const std::string& response, const std::vector<std::string>& vars_raw, int k,
           bool raw_scale, const std::string& class_col, const std::string& method,
           const std::string& profile_path, int grid_points) {
    const auto vars = split_list(vars_raw);
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    const DistanceMetric metric = metric_of(o);
    const KernelFunction f = kernel_from_name(o.kernel);

    Dataset data = csv.dataset;
    BandwidthObjective objective;
    int lower_adaptive = 2;
    std::string label = objective_name;
    if (model == "gwr") {
        if (response.empty() || vars.empty())
            throw input_error("bw --model gwr needs --response and --predictors");
        if (objective_name == "aicc")
            objective = gwr_aicc_objective(data, response, vars, f, o.adaptive, metric);
        else if (objective_name == "cv")
            objective = gwr_cv_objective(data, response, vars, f, o.adaptive, metric);
        else
            throw input_error("--objective must be cv or aicc");
        lower_adaptive =
            adaptive_bounds_regression(data.n(), static_cast<int>(vars.size()) + 1).first;
    } else if (model == "gwpca") {
        if (vars.empty()) throw input_error("bw --model gwpca needs --vars");
        data = data.select(vars);
        if (!raw_scale) data = standardize_global(data);
        if (objective_name != "cv")
            throw input_error("gwpca bandwidths are selected by cv only");
        objective = gwpca_cv_objective(data, k, f, o.adaptive, metric);
        lower_adaptive = adaptive_bounds_gwpca(data.n(), k).first;
    } else if (model == "gwda") {
        if (vars.empty() || class_col.empty())
            throw input_error("bw --model gwda needs --predictors and --class-col");
        if (objective_name != "cv")
            throw input_error("gwda bandwidths are selected by cv only");
        const auto classes = csv.labels(class_col);
        GwdaSpec spec;
        spec.method = method == "qda" ? GwdaSpec::Method::qda : GwdaSpec::Method::lda;
        objective = gwda_cv_objective(data, classes, vars, spec, f, o.adaptive, metric);
        const auto ci = detail::index_classes(classes);
        lower_adaptive = adaptive_bounds_gwda(data.n(), static_cast<int>(vars.size()),
                                              static_cast<int>(ci.labels.size()))
                             .first;
    } else {
        throw input_error("--model must be gwr, gwpca or gwda");
    }

    const Eigen::MatrixXd dist = distance_matrix(data.points, metric);
    const auto outcome = search_bandwidth(objective, o, dist, lower_adaptive, data.n());
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    print_bandwidth(outcome.bandwidth, o.adaptive);
    run_log(o, "bw " + model + " objective=" + label, outcome.bandwidth);

    if (!profile_path.empty()) {
        double lo, hi;
        if (o.adaptive) {
            lo = lower_adaptive;
            hi = data.n();
        } else {
            const auto bounds = fixed_bounds(dist);
            lo = bounds.first;
            hi = bounds.second;
        }
        std::vector<double> grid;
        for (int g = 0; g < grid_points; ++g) {
            double b = lo + (hi - lo) * g / std::max(1, grid_points - 1);
            if (o.adaptive) b = std::round(b);
            grid.push_back(b);
        }
        const BandwidthProfile profile = grid_profile(objective, grid, label);
        ResultTable table;
        table.coords.resize(profile.bandwidths.size(), 0);
        table.columns = {"bandwidth", "score"};
        table.values.resize(profile.bandwidths.size(), 2);
        table.values.col(0) = profile.bandwidths;
        table.values.col(1) = profile.scores;
        write_csv(table, profile_path);
        std::cout << "profile: " << profile.bandwidths.size() << " points written to "
                  << profile_path << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ mc ----

int cmd_mc(const CommonOpts& o, const std::string& model, const std::string& response,
           const std::vector<std::string>& vars_raw, int k, bool raw_scale, int nsim,
           std::uint64_t seed, bool seed_given, bool reoptimize) {
    if (nsim > 0 && !seed_given) throw input_error("mc needs --seed whenever --nsim > 0");
    const auto vars = split_list(vars_raw);
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    if (bw_is_auto(o)) throw input_error("mc needs a numeric --bw");
    const double bw = parse_bw_value(o);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    const DistanceMetric metric = metric_of(o);
    run_log(o, "mc " + model + " nsim=" + std::to_string(nsim), bw, seed);

    if (model == "gwss") {
        if (vars.empty()) throw input_error("mc --model gwss needs --vars");
        const McReport rep = montecarlo_gwss(csv.dataset, vars, kernel, metric, nsim, seed);
        ResultTable table;
        table.coords = csv.dataset.points.coords;
        table.coord_names = {o.x_col, o.y_col};
        const Eigen::Index L = static_cast<Eigen::Index>(rep.labels.size());
        table.values.resize(rep.pseudo_p.rows(), 2 * L);
        for (Eigen::Index c = 0; c < L; ++c) {
            table.columns.push_back(rep.labels[static_cast<std::size_t>(c)] + "_p");
            table.values.col(c) = rep.pseudo_p.col(c);
        }
        for (Eigen::Index c = 0; c < L; ++c) {
            table.columns.push_back(rep.labels[static_cast<std::size_t>(c)] + "_sig");
            table.values.col(L + c) = rep.flags.col(c).cast<double>().matrix();
        }
        export_table(o, table);
        int flagged = rep.flags.sum();
        std::cout << "mc gwss: " << flagged << " flagged (location, statistic) pairs at alpha="
                  << format_number(rep.alpha) << "\n";
        return 0;
    }
    if (model == "gwr") {
        if (response.empty() || vars.empty())
            throw input_error("mc --model gwr needs --response and --predictors");
        const McCoefficientReport rep =
            montecarlo_gwr(csv.dataset, response, vars, kernel, metric, nsim, seed);
        std::cout << "Monte Carlo coefficient test (" << nsim << " permutations):\n";
        for (std::size_t j = 0; j < rep.coef_names.size(); ++j)
            std::printf("%-14s p = %.4f\n", rep.coef_names[j].c_str(),
                        rep.pseudo_p[static_cast<Eigen::Index>(j)]);
        if (!o.output.empty()) {
            ResultTable table;
            table.coords.resize(static_cast<Eigen::Index>(rep.coef_names.size()), 0);
            table.text_columns = {"coefficient"};
            table.text_values = {rep.coef_names};
            table.columns = {"true_variance", "pseudo_p"};
            table.values.resize(static_cast<Eigen::Index>(rep.coef_names.size()), 2);
            table.values.col(0) = rep.true_stat;
            table.values.col(1) = rep.pseudo_p;
            write_csv(table, o.output);
        }
        return 0;
    }
    if (model == "gwpca") {
        if (vars.empty()) throw input_error("mc --model gwpca needs --vars");
        Dataset data = csv.dataset.select(vars);
        if (!raw_scale) data = standardize_global(data);
        const McPcaReport rep =
            montecarlo_gwpca(data, k, kernel, metric, nsim, seed, reoptimize);
        std::printf("Monte Carlo eigenvalue test: SD = %.6g, p = %.4f (%d permutations%s)\n",
                    rep.true_stat, rep.pseudo_p, nsim,
                    rep.reoptimized ? ", re-optimized bandwidths" : "");
        if (!o.output.empty()) {
            ResultTable table;
            table.coords.resize(rep.sim_stats.size(), 0);
            table.columns = {"sim_sd"};
            table.values.resize(rep.sim_stats.size(), 1);
            table.values.col(0) = rep.sim_stats;
            write_csv(table, o.output);
        }
        return 0;
    }
    throw input_error("--model must be gwss, gwr or gwpca");
}

// ---------------------------------------------------------------- diag ----

int cmd_diag(const CommonOpts& o, const std::vector<std::string>& predictors_raw) {
    const auto predictors = split_list(predictors_raw);
    if (predictors.empty()) throw input_error("diag needs --predictors");
    const CsvData csv = load_csv(o.input, o.x_col, o.y_col);
    if (bw_is_auto(o)) throw input_error("diag needs a numeric --bw");
    const double bw = parse_bw_value(o);
    const KernelSpec kernel = kernel_at_bw(o, bw);
    run_log(o, "diag", bw);

    const CollinearityReport rep =
        collinearity_diagnostics(csv.dataset, predictors, kernel, metric_of(o));
    const int n = static_cast<int>(rep.condition_number.size());
    const int m = static_cast<int>(rep.predictors.size());
    const int p = m + 1;
    const int npairs = static_cast<int>(rep.pairs.size());

    ResultTable table;
    table.coords = csv.dataset.points.coords;
    table.coord_names = {o.x_col, o.y_col};
    table.values.resize(n, npairs + m + 1 + p);
    int col = 0;
    for (int q = 0; q < npairs; ++q) {
        table.columns.push_back("Corr_" + rep.pair_labels[static_cast<std::size_t>(q)]);
        table.values.col(col++) = rep.correlations.col(q);
    }
    for (int j = 0; j < m; ++j) {
        table.columns.push_back("VIF_" + rep.predictors[static_cast<std::size_t>(j)]);
        table.values.col(col++) = rep.vif.col(j);
    }
    table.columns.push_back("CN");
    table.values.col(col++) = rep.condition_number;
    // VDP of the weakest component (largest condition index) per coefficient
    for (int k = 0; k < p; ++k) {
        table.columns.push_back("VDP_" + rep.coef_names[static_cast<std::size_t>(k)]);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = rep.vdp[static_cast<std::size_t>(i)](p - 1, k);
        table.values.col(col++) = v;
    }
    export_table(o, table);

    int cn_flags = 0, vif_flags = 0, corr_flags = 0;
    for (int i = 0; i < n; ++i) {
        if (rep.cn_flag(i)) ++cn_flags;
        for (int j = 0; j < m; ++j) vif_flags += rep.vif_flag(i, j) ? 1 : 0;
        for (int q = 0; q < npairs; ++q) corr_flags += rep.corr_flag(i, q) ? 1 : 0;
    }
    std::printf("collinearity: CN>%.0f at %d/%d locations; VIF>%.0f at %d cells; |corr|>%.1f at "
                "%d cells\n",
                CollinearityReport::cn_threshold, cn_flags, n,
                CollinearityReport::vif_threshold, vif_flags,
                CollinearityReport::corr_threshold, corr_flags);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geographically weighted modelling tool"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string response, objective_name = "cv", model, class_col, share_col, winner_col;
    std::string method = "lda", loadings_path, scores_path, profile_path;
    std::vector<std::string> vars, locals, globals;
    int k = 2, nsim = 99, grid_points = 10;
    bool raw_scale = false, local_intercept = false, reoptimize = false;
    std::uint64_t seed = 0;

    auto* dist = app.add_subcommand("dist", "pairwise distance matrix");
    add_common(dist, o, false);

    auto* gwss_cmd = app.add_subcommand("gwss", "GW summary statistics");
    add_common(gwss_cmd, o);
    gwss_cmd->add_option("--vars", vars, "variables (comma-separated or repeated)");

    auto* gwpca_cmd = app.add_subcommand("gwpca", "GW principal components");
    add_common(gwpca_cmd, o);
    gwpca_cmd->add_option("--vars", vars, "variables");
    gwpca_cmd->add_option("--k", k, "components to retain (default 2)");
    gwpca_cmd->add_flag("--raw-scale", raw_scale, "skip global standardization");
    gwpca_cmd->add_option("--loadings", loadings_path, "write long-format loadings CSV");
    gwpca_cmd->add_option("--scores", scores_path, "write per-location scores CSV");

    auto* gwr_cmd = app.add_subcommand("gwr", "basic GW regression");
    add_common(gwr_cmd, o);
    gwr_cmd->add_option("--response", response, "response variable");
    gwr_cmd->add_option("--predictors", vars, "predictor variables");
    gwr_cmd->add_option("--objective", objective_name, "bandwidth objective: cv|aicc");

    auto* mixed_cmd = app.add_subcommand("gwr-mixed", "mixed (semi-parametric) GW regression");
    add_common(mixed_cmd, o);
    mixed_cmd->add_option("--response", response, "response variable");
    mixed_cmd->add_option("--local-vars", locals, "locally varying predictors");
    mixed_cmd->add_option("--global-vars", globals, "globally fixed predictors");
    mixed_cmd->add_flag("--local-intercept", local_intercept,
                        "intercept varies locally (default: global)");

    auto* hetero_cmd = app.add_subcommand("gwr-hetero", "heteroskedastic GW regression");
    add_common(hetero_cmd, o);
    hetero_cmd->add_option("--response", response, "response variable");
    hetero_cmd->add_option("--predictors", vars, "predictor variables");

    auto* gwda_cmd = app.add_subcommand("gwda", "GW discriminant analysis");
    add_common(gwda_cmd, o);
    gwda_cmd->add_option("--class-col", class_col, "label column with class names");
    gwda_cmd->add_option("--share-col", share_col,
                         "winner vote-share percents (derives Borderline classes)");
    gwda_cmd->add_option("--winner-col", winner_col, "winner label column for --share-col");
    gwda_cmd->add_option("--predictors", vars, "discriminating variables");
    gwda_cmd->add_option("--method", method, "lda|qda (default lda)");

    auto* bw_cmd = app.add_subcommand("bw", "bandwidth selection and profiling");
    add_common(bw_cmd, o);
    bw_cmd->add_option("--model", model, "gwr|gwpca|gwda");
    bw_cmd->add_option("--objective", objective_name, "cv|aicc (gwr only; default cv)");
    bw_cmd->add_option("--response", response, "gwr response");
    bw_cmd->add_option("--predictors,--vars", vars, "model variables");
    bw_cmd->add_option("--k", k, "gwpca components");
    bw_cmd->add_flag("--raw-scale", raw_scale, "gwpca: skip standardization");
    bw_cmd->add_option("--class-col", class_col, "gwda label column");
    bw_cmd->add_option("--method", method, "gwda: lda|qda");
    bw_cmd->add_option("--profile", profile_path, "write a bandwidth/score profile CSV");
    bw_cmd->add_option("--grid-points", grid_points, "profile grid size (default 10)");

    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo non-stationarity tests");
    add_common(mc_cmd, o);
    mc_cmd->add_option("--model", model, "gwss|gwr|gwpca");
    mc_cmd->add_option("--response", response, "gwr response");
    mc_cmd->add_option("--predictors,--vars", vars, "model variables");
    mc_cmd->add_option("--k", k, "gwpca components");
    mc_cmd->add_flag("--raw-scale", raw_scale, "gwpca: skip standardization");
    mc_cmd->add_option("--nsim", nsim, "permutations (default 99)");
    auto* seed_opt = mc_cmd->add_option("--seed", seed, "RNG seed (required when nsim > 0)");
    mc_cmd->add_flag("--reoptimize", reoptimize, "gwpca: re-estimate bandwidth per simulation");

    auto* diag_cmd = app.add_subcommand("diag", "local collinearity diagnostics");
    add_common(diag_cmd, o);
    diag_cmd->add_option("--predictors", vars, "model predictors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (dist->parsed()) return cmd_dist(o);
        if (gwss_cmd->parsed()) return cmd_gwss(o, vars);
        if (gwpca_cmd->parsed()) return cmd_gwpca(o, vars, k, raw_scale, loadings_path, scores_path);
        if (gwr_cmd->parsed()) return cmd_gwr(o, response, vars, objective_name);
        if (mixed_cmd->parsed()) return cmd_gwr_mixed(o, response, locals, globals, local_intercept);
        if (hetero_cmd->parsed()) return cmd_gwr_hetero(o, response, vars);
        if (gwda_cmd->parsed()) return cmd_gwda(o, class_col, share_col, winner_col, vars, method);
        if (bw_cmd->parsed())
            return cmd_bw(o, model, objective_name, response, vars, k, raw_scale, class_col,
                          method, profile_path, grid_points);
        if (mc_cmd->parsed())
            return cmd_mc(o, model, response, vars, k, raw_scale, nsim, seed,
                          seed_opt->count() > 0, reoptimize);
        if (diag_cmd->parsed()) return cmd_diag(o, vars);
        std::cerr << "error: no subcommand\n" << app.help() << "\n";
        return 2;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
