#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trendflow/field_fit.hpp"
#include "trendflow/flow.hpp"
#include "trendflow/forecast.hpp"
#include "trendflow/io_util.hpp"
#include "trendflow/model_io.hpp"
#include "trendflow/portrait.hpp"
#include "trendflow/series.hpp"
#include "trendflow/var_model.hpp"

namespace {

using namespace trendflow;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("TRENDFLOW_LOG");
    if (!env) return LogLevel::Info;
    const std::string value(env);
    if (value == "quiet") return LogLevel::Quiet;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::Info) std::cerr << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << message << "\n";
}

std::vector<int> parse_range(const std::string& text) {
    // "1..5" or "1,2,3"
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
    if (out.empty()) throw CLI::ValidationError("empty range '" + text + "'");
    return out;
}

Domain parse_box(const std::string& text, int expected_dim) {
    std::vector<double> nums;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) nums.push_back(parse_double(item));
    if (nums.size() % 2 != 0 || nums.empty())
        throw CLI::ValidationError("--box needs lo,hi pairs per axis");
    const int n = static_cast<int>(nums.size() / 2);
    if (expected_dim > 0 && n != expected_dim)
        throw CLI::ValidationError("--box covers " + std::to_string(n) + " axes, model has " +
                                   std::to_string(expected_dim));
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = nums[static_cast<size_t>(2 * i)];
        hi[i] = nums[static_cast<size_t>(2 * i + 1)];
    }
    return Domain::box(lo, hi);
}

struct CsvFlags {
    std::string input;
    std::string columns;
    std::string time_column;
    double dt = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--input", input, "input CSV file")->required();
        cmd->add_option("--columns", columns, "comma-separated variable columns (default: all)");
        cmd->add_option("--time-column", time_column, "column to treat as time labels");
        cmd->add_option("--dt", dt, "time units between rows (default 1.0)");
    }

    SeriesFrame load() const {
        CsvSchema schema;
        schema.time_column = time_column;
        schema.dt = dt;
        if (!columns.empty()) {
            std::stringstream ss(columns);
            std::string item;
            while (std::getline(ss, item, ',')) schema.columns.push_back(item);
        }
        return load_csv(input, schema);
    }
};

nlohmann::json options_json(const std::vector<std::pair<std::string, std::string>>& options) {
    nlohmann::json doc;
    for (const auto& [key, value] : options) doc[key] = value;
    return doc;
}

RescaleMode parse_rescale(const std::string& mode) {
    if (mode == "max") return RescaleMode::Max;
    if (mode == "none") return RescaleMode::None;
    throw CLI::ValidationError("--rescale must be max or none");
}

// ---------------------------------------------------------------------------

int run_fit(const CsvFlags& csv, const std::string& degree, const std::string& degrees,
            const std::string& basis, double ridge, const std::string& rescale_mode, int test_len,
            double step, const std::string& out_path) {
    SeriesFrame frame = csv.load();
    frame = rescale(frame, parse_rescale(rescale_mode));

    FitOptions fit_opts;
    fit_opts.ridge = ridge;
    fit_opts.basis_mode = basis == "separable" ? BasisMode::Separable : BasisMode::FullMultivariate;
    fit_opts.scaling = frame.scaling;
    std::vector<std::string> warnings;
    fit_opts.warnings = &warnings;

    int chosen_degree = 0;
    std::optional<PolyVectorField> model;
    if (degree == "auto") {
        EvalProtocol protocol;
        protocol.test_len = test_len;
        protocol.ds_step = step;
        DegreeSelection selection =
            select_degree(frame, parse_range(degrees), protocol, fit_opts);
        std::cout << degree_table_text(selection.table, frame.variable_names);
        std::cout << "selected degree: " << selection.best_degree << "\n";
        chosen_degree = selection.best_degree;
        model = std::move(selection.model);
    } else {
        chosen_degree = std::stoi(degree);
        model = fit(estimate_derivatives(frame), chosen_degree, fit_opts);
    }
    for (const auto& w : warnings) log_info("warning: " + w);

    const nlohmann::json provenance = options_json({{"command", "fit"},
                                                    {"input", csv.input},
                                                    {"degree", std::to_string(chosen_degree)},
                                                    {"degree_mode", degree},
                                                    {"basis", basis},
                                                    {"ridge", format_double(ridge)},
                                                    {"rescale", rescale_mode},
                                                    {"test_len", std::to_string(test_len)},
                                                    {"step", format_double(step)}});
    write_file_atomic(out_path, serialize(*model, provenance));
    log_info("wrote " + out_path);
    return 0;
}

int run_evaluate(const CsvFlags& csv, const std::string& degree, const std::string& degrees,
                 const std::string& lag, const std::string& lags, const std::string& basis,
                 double ridge, const std::string& rescale_mode, int test_len, int inner_test_len,
                 double step, const std::string& report_dir, const std::string& csv_out) {
    SeriesFrame raw = csv.load();
    auto [train_raw, test_raw] = split(raw, test_len);

    // Scale factors come from the training window only, then apply everywhere.
    std::vector<double> factors(static_cast<size_t>(raw.dimension()), 1.0);
    if (parse_rescale(rescale_mode) == RescaleMode::Max) {
        const SeriesFrame train_scaled = rescale(train_raw, RescaleMode::Max);
        factors = train_scaled.scaling->factors;
    }
    SeriesFrame frame = rescale(raw, RescaleMode::Explicit, factors);
    SeriesFrame train = rescale(train_raw, RescaleMode::Explicit, factors);

    FitOptions fit_opts;
    fit_opts.ridge = ridge;
    fit_opts.basis_mode = basis == "separable" ? BasisMode::Separable : BasisMode::FullMultivariate;
    fit_opts.scaling = frame.scaling;

    EvalProtocol inner;
    inner.test_len = inner_test_len > 0 ? inner_test_len : test_len;
    inner.ds_step = step;

    // Degree and lag are selected once on the initial training window, then
    // held fixed while coefficients are refit every walk-forward step.
    int ds_degree;
    if (degree == "auto") {
        DegreeSelection selection = select_degree(train, parse_range(degrees), inner, fit_opts);
        ds_degree = selection.best_degree;
        log_info("selected DS degree " + std::to_string(ds_degree));
        log_debug(degree_table_text(selection.table, frame.variable_names));
    } else {
        ds_degree = std::stoi(degree);
    }
    int var_p;
    if (lag == "auto") {
        LagSelection selection = select_lag(train, parse_range(lags), inner);
        var_p = selection.best_p;
        log_info("selected VAR lag " + std::to_string(var_p));
    } else {
        var_p = std::stoi(lag);
    }

    EvalReport ds_report = walk_forward(
        frame, test_len,
        [&](const SeriesFrame& window) {
            return fit(estimate_derivatives(window), ds_degree, fit_opts);
        },
        [&](const PolyVectorField& model, const SeriesFrame& window) {
            return advance(model, window.values.bottomRows(1).transpose(), window.dt, step);
        },
        "DS(" + std::to_string(ds_degree) + ")");
    EvalReport var_report = walk_forward(
        frame, test_len,
        [&](const SeriesFrame& window) { return fit_var(window, var_p); },
        [&](const VarModel& model, const SeriesFrame& window) {
            return predict_one(model, window.values);
        },
        "VAR(" + std::to_string(var_p) + ")");

    const ComparisonTable table = compare({ds_report, var_report});
    std::cout << table.text();
    if (!csv_out.empty()) {
        write_file_atomic(csv_out, table.csv());
        log_info("wrote " + csv_out);
    }
    if (!report_dir.empty()) {
        const std::string provenance =
            options_json({{"command", "evaluate"},
                          {"input", csv.input},
                          {"degree", std::to_string(ds_degree)},
                          {"lag", std::to_string(var_p)},
                          {"test_len", std::to_string(test_len)},
                          {"rescale", rescale_mode},
                          {"step", format_double(step)}})
                .dump();
        write_file_atomic(report_dir + "/ds_report.json", report_json(ds_report, provenance));
        write_file_atomic(report_dir + "/var_report.json", report_json(var_report, provenance));
        log_info("wrote reports under " + report_dir);
    }
    return 0;
}

int run_compare(const std::vector<std::string>& report_paths, const std::string& out_path) {
    std::vector<EvalReport> reports;
    for (const auto& path : report_paths) reports.push_back(report_from_json(read_file(path)));
    const ComparisonTable table = compare(reports);
    std::cout << table.text();
    if (!out_path.empty()) {
        write_file_atomic(out_path, table.csv());
        log_info("wrote " + out_path);
    }
    return 0;
}

int run_portrait(const std::string& model_path, const std::string& box_text,
                 const CsvFlags& csv, int grid, int seed_grid, bool with_trending,
                 int trending_grid, double horizon, const std::string& out_path,
                 const std::string& svg_path) {
    const PolyVectorField model = deserialize_field(read_file(model_path));

    Domain box;
    if (!box_text.empty()) {
        box = parse_box(box_text, model.dimension());
    } else if (!csv.input.empty()) {
        // working box [0, U]^n with U = 10x the scaled-data maximum per axis
        SeriesFrame frame = csv.load();
        if (frame.dimension() != model.dimension())
            throw std::invalid_argument("--input series dimension does not match the model");
        std::vector<double> factors(static_cast<size_t>(frame.dimension()), 1.0);
        if (model.scaling()) factors = model.scaling()->factors;
        frame = rescale(frame, RescaleMode::Explicit, factors);
        Eigen::VectorXd upper(frame.dimension());
        for (Eigen::Index j = 0; j < frame.dimension(); ++j) {
            const double m = frame.values.col(j).maxCoeff();
            if (!(m > 0.0))
                throw std::invalid_argument("variable '" + frame.variable_names[j] +
                                            "' has no positive maximum; pass --box explicitly");
            upper[j] = 10.0 * m;
        }
        box = Domain::box(Eigen::VectorXd::Zero(frame.dimension()), upper);
        log_info("working box from data: upper = 10x scaled maxima");
    } else {
        throw CLI::ValidationError("portrait needs --box, or --input to derive the working box");
    }

    ExportOptions opts;
    opts.grid = grid;
    opts.model_ref = model_path;
    opts.with_trending = with_trending;
    opts.trending_grid = trending_grid;
    opts.svg = !svg_path.empty();
    opts.portrait.seed_grid = seed_grid;
    opts.portrait.integration.horizon = horizon;
    opts.provenance =
        options_json({{"command", "portrait"},
                      {"model", model_path},
                      {"box", box_text.empty() ? "derived from --input" : box_text},
                      {"grid", std::to_string(grid)},
                      {"seed_grid", std::to_string(seed_grid)},
                      {"trending", with_trending ? "true" : "false"},
                      {"horizon", format_double(horizon)}});

    const PortraitExport result = export_portrait(model, box, opts);
    write_file_atomic(out_path, result.json_text);
    log_info("wrote " + out_path);
    if (!svg_path.empty()) {
        if (result.svg_text.empty()) {
            log_info(result.notice.empty() ? "SVG skipped" : result.notice);
        } else {
            write_file_atomic(svg_path, result.svg_text);
            log_info("wrote " + svg_path);
        }
    }
    return 0;
}

int run_trending(const std::string& model_path, const std::string& box_text, int grid,
                 double horizon, double step, const std::string& out_path) {
    const PolyVectorField model = deserialize_field(read_file(model_path));
    const Domain box = parse_box(box_text, model.dimension());
    PortraitOptions opts;
    opts.integration.horizon = horizon;
    opts.integration.step = step;
    const TrendingReport report = trending_check(model, box, grid, opts);
    const nlohmann::json provenance =
        options_json({{"command", "trending"},
                      {"model", model_path},
                      {"box", box_text},
                      {"grid", std::to_string(grid)},
                      {"horizon", format_double(horizon)},
                      {"step", format_double(step)}});
    write_file_atomic(out_path, trending_json(report, provenance));
    std::cout << "converged: " << report.converged << ", escaped: " << report.escaped
              << ", undecided: " << report.undecided << "\n";
    std::cout << (report.trending ? "trending within horizon" : "not trending within horizon")
              << "\n";
    for (const auto& note : report.theorem_notes) std::cout << note << "\n";
    log_info("wrote " + out_path);
    return 0;
}

int run_predict(const std::string& model_path, const CsvFlags& csv, int steps, double step,
                const std::string& out_path) {
    const std::string document = read_file(model_path);
    const std::string kind = document_kind(document);
    SeriesFrame raw = csv.load();
    if (steps < 1) throw CLI::ValidationError("--steps must be at least 1");

    std::vector<std::string> names = raw.variable_names;
    std::ostringstream out;
    out << "step,time";
    for (const auto& v : names) out << ",scaled_" << v;
    for (const auto& v : names) out << ",raw_" << v;
    out << "\n";

    if (kind == "poly_field") {
        const PolyVectorField model = deserialize_field(document);
        if (model.dimension() != raw.dimension())
            throw std::invalid_argument("model dimension does not match the input series");
        std::vector<double> factors(static_cast<size_t>(raw.dimension()), 1.0);
        if (model.scaling()) factors = model.scaling()->factors;
        const SeriesFrame scaled = rescale(raw, RescaleMode::Explicit, factors);

        Eigen::VectorXd state = scaled.values.bottomRows(1).transpose();
        const double t0 = static_cast<double>(scaled.length() - 1) * scaled.dt;
        for (int k = 1; k <= steps; ++k) {
            state = advance(model, state, scaled.dt, step);
            out << k << "," << format_double(t0 + k * scaled.dt);
            for (Eigen::Index j = 0; j < state.size(); ++j) out << "," << format_double(state[j]);
            for (Eigen::Index j = 0; j < state.size(); ++j)
                out << "," << format_double(state[j] * factors[static_cast<size_t>(j)]);
            out << "\n";
        }
    } else if (kind == "var") {
        const VarModel model = deserialize_var(document);
        if (model.dimension() != raw.dimension())
            throw std::invalid_argument("model dimension does not match the input series");
        Eigen::MatrixXd history = raw.values;
        const double t0 = static_cast<double>(raw.length() - 1) * raw.dt;
        for (int k = 1; k <= steps; ++k) {
            const Eigen::VectorXd next = predict_one(model, history);
            history.conservativeResize(history.rows() + 1, Eigen::NoChange);
            history.row(history.rows() - 1) = next.transpose();
            out << k << "," << format_double(t0 + k * raw.dt);
            for (Eigen::Index j = 0; j < next.size(); ++j) out << "," << format_double(next[j]);
            for (Eigen::Index j = 0; j < next.size(); ++j) out << "," << format_double(next[j]);
            out << "\n";
        }
    } else {
        throw std::invalid_argument("unknown model kind '" + kind + "'");
    }
    write_file_atomic(out_path, out.str());
    log_info("wrote " + out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trendflow: polynomial dynamical-system models for multivariate time series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit a field model to a series");
    CsvFlags fit_csv;
    fit_csv.attach(fit_cmd);
    std::string fit_degree = "auto", fit_degrees = "1..5", fit_basis = "full",
                fit_rescale = "max", fit_out;
    double fit_ridge = 0.0, fit_step = 0.01;
    int fit_test_len = 24;
    fit_cmd->add_option("--degree", fit_degree, "polynomial degree, or 'auto'");
    fit_cmd->add_option("--degrees", fit_degrees, "degree range for auto selection (e.g. 1..5)");
    fit_cmd->add_option("--basis", fit_basis, "monomial basis: full or separable");
    fit_cmd->add_option("--ridge", fit_ridge, "Tikhonov damping");
    fit_cmd->add_option("--rescale", fit_rescale, "per-variable rescaling: max or none");
    fit_cmd->add_option("--test-len", fit_test_len, "walk-forward window for degree selection");
    fit_cmd->add_option("--step", fit_step, "RK4 step for one-step predictions");
    fit_cmd->add_option("--out", fit_out, "output model file")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "walk-forward comparison against a VAR baseline");
    CsvFlags eval_csv;
    eval_csv.attach(eval_cmd);
    std::string eval_model = "ds", eval_baseline = "var";
    std::string eval_degree = "auto", eval_degrees = "1..5", eval_lag = "auto", eval_lags = "1..4",
                eval_basis = "full", eval_rescale = "max", eval_report_dir, eval_csv_out;
    double eval_ridge = 0.0, eval_step = 0.01;
    int eval_test_len = 24, eval_inner_test_len = 0;
    eval_cmd->add_option("--model", eval_model, "model family to evaluate (ds)")
        ->check(CLI::IsMember({"ds"}));
    eval_cmd->add_option("--baseline", eval_baseline, "baseline family (var)")
        ->check(CLI::IsMember({"var"}));
    eval_cmd->add_option("--degree", eval_degree, "DS degree, or 'auto'");
    eval_cmd->add_option("--degrees", eval_degrees, "degree range for auto selection");
    eval_cmd->add_option("--lag", eval_lag, "VAR lag, or 'auto'");
    eval_cmd->add_option("--lags", eval_lags, "lag range for auto selection");
    eval_cmd->add_option("--basis", eval_basis, "monomial basis: full or separable");
    eval_cmd->add_option("--ridge", eval_ridge, "Tikhonov damping");
    eval_cmd->add_option("--rescale", eval_rescale, "per-variable rescaling: max or none");
    eval_cmd->add_option("--test-len", eval_test_len, "test window length");
    eval_cmd->add_option("--inner-test-len", eval_inner_test_len,
                         "selection window (default: same as --test-len)");
    eval_cmd->add_option("--step", eval_step, "RK4 step for one-step predictions");
    eval_cmd->add_option("--report-dir", eval_report_dir, "write per-model report JSON here");
    eval_cmd->add_option("--csv-out", eval_csv_out, "write the comparison table as CSV");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "tabulate saved evaluation reports");
    std::vector<std::string> compare_reports;
    std::string compare_out;
    compare_cmd->add_option("--reports", compare_reports, "report JSON files")
        ->required()
        ->expected(-1);
    compare_cmd->add_option("--out", compare_out, "write the comparison table as CSV");

    // portrait
    auto* portrait_cmd = app.add_subcommand("portrait", "fixed points, basins, separatrices, SVG");
    std::string portrait_model, portrait_box, portrait_out, portrait_svg;
    int portrait_grid = 20, portrait_seed_grid = 20, portrait_trend_grid = 21;
    double portrait_horizon = 500.0;
    bool portrait_trending = false;
    CsvFlags portrait_csv;
    portrait_cmd->add_option("--model", portrait_model, "model JSON file")->required();
    portrait_cmd->add_option("--box", portrait_box, "working box lo,hi per axis (e.g. 0,1,0,1)");
    portrait_cmd->add_option("--input", portrait_csv.input,
                             "series CSV; derives the box as [0, 10*max]^n when --box is absent");
    portrait_cmd->add_option("--columns", portrait_csv.columns, "columns of --input to use");
    portrait_cmd->add_option("--time-column", portrait_csv.time_column,
                             "time-label column of --input");
    portrait_cmd->add_option("--grid", portrait_grid, "field sample grid per axis");
    portrait_cmd->add_option("--seed-grid", portrait_seed_grid, "Newton seed grid per axis");
    portrait_cmd->add_flag("--trending", portrait_trending, "embed a trending sweep");
    portrait_cmd->add_option("--trending-grid", portrait_trend_grid, "trending sweep grid");
    portrait_cmd->add_option("--horizon", portrait_horizon, "trajectory horizon");
    portrait_cmd->add_option("--out", portrait_out, "output portrait JSON")->required();
    portrait_cmd->add_option("--svg", portrait_svg, "output SVG file");

    // trending
    auto* trending_cmd = app.add_subcommand("trending", "grid sweep for the trending-flow property");
    std::string trending_model, trending_box, trending_out;
    int trending_grid = 21;
    double trending_horizon = 500.0, trending_step = 0.01;
    trending_cmd->add_option("--model", trending_model, "model JSON file")->required();
    trending_cmd->add_option("--box", trending_box, "working box lo,hi per axis")->required();
    trending_cmd->add_option("--grid", trending_grid, "samples per axis");
    trending_cmd->add_option("--horizon", trending_horizon, "trajectory horizon");
    trending_cmd->add_option("--step", trending_step, "RK4 step");
    trending_cmd->add_option("--out", trending_out, "output report JSON")->required();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "forecast from the end of a series");
    CsvFlags predict_csv;
    predict_csv.attach(predict_cmd);
    std::string predict_model, predict_out;
    int predict_steps = 1;
    double predict_step = 0.01;
    predict_cmd->add_option("--model", predict_model, "model JSON file")->required();
    predict_cmd->add_option("--steps", predict_steps, "forecast horizon in observation steps");
    predict_cmd->add_option("--step", predict_step, "RK4 step for field models");
    predict_cmd->add_option("--out", predict_out, "output CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 1;
    }

    try {
        if (*fit_cmd)
            return run_fit(fit_csv, fit_degree, fit_degrees, fit_basis, fit_ridge, fit_rescale,
                           fit_test_len, fit_step, fit_out);
        if (*eval_cmd)
            return run_evaluate(eval_csv, eval_degree, eval_degrees, eval_lag, eval_lags,
                                eval_basis, eval_ridge, eval_rescale, eval_test_len,
                                eval_inner_test_len, eval_step, eval_report_dir, eval_csv_out);
        if (*compare_cmd) return run_compare(compare_reports, compare_out);
        if (*portrait_cmd)
            return run_portrait(portrait_model, portrait_box, portrait_csv, portrait_grid,
                                portrait_seed_grid, portrait_trending, portrait_trend_grid,
                                portrait_horizon, portrait_out, portrait_svg);
        if (*trending_cmd)
            return run_trending(trending_model, trending_box, trending_grid, trending_horizon,
                                trending_step, trending_out);
        if (*predict_cmd)
            return run_predict(predict_model, predict_csv, predict_steps, predict_step,
                               predict_out);
    } catch (const CLI::ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 1;
}
