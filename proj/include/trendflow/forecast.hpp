#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trendflow/series.hpp"

namespace trendflow {

struct PredictionStep {
    double time = 0.0;   // time of the predicted point, first sample at 0
    Eigen::VectorXd predicted;
    Eigen::VectorXd truth;
};

// Walk-forward scorecard: per-variable normalized squared errors over the
// test window plus their total, with the full per-step prediction log.
struct EvalReport {
    std::string model;
    std::vector<std::string> variable_names;
    int test_len = 0;
    double dt = 1.0;
    Eigen::VectorXd per_variable;
    double total = 0.0;
    std::vector<PredictionStep> steps;
};

// Per-variable sum of squared errors divided by the sum of squared true
// values; the total is the sum over variables. Throws when a variable's
// truth column is identically zero.
std::pair<Eigen::VectorXd, double> nse(const Eigen::MatrixXd& predictions,
                                       const Eigen::MatrixXd& truths);

// Walk-forward protocol shared by degree selection and final evaluation.
struct EvalProtocol {
    int test_len = 24;      // two years of monthly data
    double ds_step = 0.01;  // RK4 step for one-step field predictions
};

// Expanding-window one-step evaluation. For each of the last `test_len`
// points: fit on everything strictly before it, predict one step ahead from
// the last observed state, record the error, then absorb the true point into
// training. Predictions always start from true states, never from earlier
// predictions. fit_fn(train) -> model; predict_fn(model, train) -> next state.
template <typename FitFn, typename PredictFn>
EvalReport walk_forward(const SeriesFrame& frame, int test_len, FitFn&& fit_fn,
                        PredictFn&& predict_fn, std::string descriptor) {
    validate_frame(frame);
    const Eigen::Index t = frame.length();
    if (test_len < 1 || static_cast<Eigen::Index>(test_len) > t - 2)
        throw std::invalid_argument("walk_forward: test_len out of range");

    EvalReport report;
    report.model = std::move(descriptor);
    report.variable_names = frame.variable_names;
    report.test_len = test_len;
    report.dt = frame.dt;

    const Eigen::Index first_test = t - test_len;
    Eigen::MatrixXd predictions(test_len, frame.dimension());
    Eigen::MatrixXd truths(test_len, frame.dimension());
    for (int k = 0; k < test_len; ++k) {
        SeriesFrame train = frame;
        train.values = frame.values.topRows(first_test + k);
        Eigen::VectorXd predicted;
        try {
            auto model = fit_fn(train);
            predicted = predict_fn(model, train);
        } catch (const std::exception& err) {
            throw std::runtime_error("walk_forward failed at step " + std::to_string(k + 1) +
                                     " of " + std::to_string(test_len) + ": " + err.what());
        }
        const Eigen::VectorXd truth = frame.values.row(first_test + k).transpose();
        predictions.row(k) = predicted.transpose();
        truths.row(k) = truth.transpose();
        report.steps.push_back(
            {static_cast<double>(first_test + k) * frame.dt, predicted, truth});
    }
    std::tie(report.per_variable, report.total) = nse(predictions, truths);
    return report;
}

struct ComparisonTable {
    std::vector<std::string> variables;
    struct Row {
        std::string model;
        Eigen::VectorXd per_variable;
        double total = 0.0;
        bool best = false;
    };
    std::vector<Row> rows;

    std::string text() const;   // aligned table, one row per model
    std::string csv() const;
};

// Side-by-side table of reports covering the same variables and test window;
// rows with the minimal total are flagged.
ComparisonTable compare(const std::vector<EvalReport>& reports);

std::string report_json(const EvalReport& report, const std::string& provenance_json = "{}");
EvalReport report_from_json(const std::string& text);
std::string report_csv(const EvalReport& report);

}  // namespace trendflow
