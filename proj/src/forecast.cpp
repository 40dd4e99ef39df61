#include "trendflow/forecast.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "trendflow/io_util.hpp"

namespace trendflow {

std::pair<Eigen::VectorXd, double> nse(const Eigen::MatrixXd& predictions,
                                       const Eigen::MatrixXd& truths) {
    if (predictions.rows() != truths.rows() || predictions.cols() != truths.cols())
        throw std::invalid_argument("nse: prediction and truth shapes differ");
    if (predictions.rows() == 0) throw std::invalid_argument("nse: empty inputs");

    const Eigen::Index n = truths.cols();
    Eigen::VectorXd per(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double denom = truths.col(j).squaredNorm();
        if (denom == 0.0)
            throw std::invalid_argument("nse: truth column " + std::to_string(j) +
                                        " is identically zero (normalization undefined)");
        per[j] = (predictions.col(j) - truths.col(j)).squaredNorm() / denom;
    }
    return {per, per.sum()};
}

namespace {

std::string fixed4(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4) << v;
    return ss.str();
}

}  // namespace

std::string ComparisonTable::text() const {
    std::vector<std::string> header{"Model"};
    for (const auto& v : variables) header.push_back(v);
    header.push_back("Total");

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        std::vector<std::string> line{row.model + (row.best ? " *" : "")};
        for (Eigen::Index j = 0; j < row.per_variable.size(); ++j)
            line.push_back(fixed4(row.per_variable[j]));
        line.push_back(fixed4(row.total));
        cells.push_back(std::move(line));
    }

    std::vector<size_t> width(header.size());
    for (size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& line) {
        for (size_t c = 0; c < line.size(); ++c) {
            out << std::left << std::setw(static_cast<int>(width[c])) << line[c];
            out << (c + 1 == line.size() ? "\n" : "  ");
        }
    };
    emit(header);
    for (size_t c = 0; c < header.size(); ++c)
        out << std::string(width[c], '-') << (c + 1 == header.size() ? "\n" : "  ");
    for (const auto& line : cells) emit(line);
    out << "(* = minimal total error)\n";
    return out.str();
}

std::string ComparisonTable::csv() const {
    std::ostringstream out;
    out << "model";
    for (const auto& v : variables) out << "," << v;
    out << ",total,best\n";
    for (const auto& row : rows) {
        out << row.model;
        for (Eigen::Index j = 0; j < row.per_variable.size(); ++j)
            out << "," << format_double(row.per_variable[j]);
        out << "," << format_double(row.total) << "," << (row.best ? 1 : 0) << "\n";
    }
    return out.str();
}

ComparisonTable compare(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("compare: no reports");
    ComparisonTable table;
    table.variables = reports.front().variable_names;
    for (const auto& r : reports) {
        if (r.variable_names != table.variables)
            throw std::invalid_argument("compare: reports cover different variables");
        if (r.test_len != reports.front().test_len)
            throw std::invalid_argument("compare: reports cover different test windows");
        table.rows.push_back({r.model, r.per_variable, r.total, false});
    }
    const double best =
        std::min_element(table.rows.begin(), table.rows.end(),
                         [](const auto& a, const auto& b) { return a.total < b.total; })
            ->total;
    for (auto& row : table.rows) row.best = (row.total == best);
    return table;
}

std::string report_json(const EvalReport& report, const std::string& provenance_json) {
    nlohmann::json doc;
    doc["kind"] = "eval_report";
    doc["provenance"] = nlohmann::json::parse(provenance_json);
    doc["model"] = report.model;
    doc["variables"] = report.variable_names;
    doc["test_len"] = report.test_len;
    doc["dt"] = format_double(report.dt);
    nlohmann::json per = nlohmann::json::array();
    for (Eigen::Index j = 0; j < report.per_variable.size(); ++j)
        per.push_back(format_double(report.per_variable[j]));
    doc["per_variable_error"] = per;
    doc["total_error"] = format_double(report.total);
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps) {
        nlohmann::json step;
        step["time"] = format_double(s.time);
        nlohmann::json pred = nlohmann::json::array(), truth = nlohmann::json::array();
        for (Eigen::Index j = 0; j < s.predicted.size(); ++j) {
            pred.push_back(format_double(s.predicted[j]));
            truth.push_back(format_double(s.truth[j]));
        }
        step["predicted"] = pred;
        step["true"] = truth;
        steps.push_back(step);
    }
    doc["steps"] = steps;
    return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& err) {
        throw std::invalid_argument(std::string("malformed report document: ") + err.what());
    }
    if (doc.value("kind", "") != "eval_report")
        throw std::invalid_argument("document is not an eval_report");
    EvalReport report;
    report.model = doc.at("model").get<std::string>();
    report.variable_names = doc.at("variables").get<std::vector<std::string>>();
    report.test_len = doc.at("test_len").get<int>();
    report.dt = parse_double(doc.at("dt").get<std::string>());
    const auto& per = doc.at("per_variable_error");
    report.per_variable.resize(static_cast<Eigen::Index>(per.size()));
    for (size_t j = 0; j < per.size(); ++j)
        report.per_variable[static_cast<Eigen::Index>(j)] =
            parse_double(per[j].get<std::string>());
    report.total = parse_double(doc.at("total_error").get<std::string>());
    for (const auto& step : doc.at("steps")) {
        PredictionStep s;
        s.time = parse_double(step.at("time").get<std::string>());
        const auto& pred = step.at("predicted");
        const auto& truth = step.at("true");
        s.predicted.resize(static_cast<Eigen::Index>(pred.size()));
        s.truth.resize(static_cast<Eigen::Index>(truth.size()));
        for (size_t j = 0; j < pred.size(); ++j)
            s.predicted[static_cast<Eigen::Index>(j)] = parse_double(pred[j].get<std::string>());
        for (size_t j = 0; j < truth.size(); ++j)
            s.truth[static_cast<Eigen::Index>(j)] = parse_double(truth[j].get<std::string>());
        report.steps.push_back(std::move(s));
    }
    return report;
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "time";
    for (const auto& v : report.variable_names) out << ",pred_" << v;
    for (const auto& v : report.variable_names) out << ",true_" << v;
    out << "\n";
    for (const auto& s : report.steps) {
        out << format_double(s.time);
        for (Eigen::Index j = 0; j < s.predicted.size(); ++j)
            out << "," << format_double(s.predicted[j]);
        for (Eigen::Index j = 0; j < s.truth.size(); ++j)
            out << "," << format_double(s.truth[j]);
        out << "\n";
    }
    return out.str();
}

}  // namespace trendflow
