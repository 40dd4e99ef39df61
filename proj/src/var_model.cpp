#include "trendflow/var_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trendflow {

namespace {

constexpr double kTieAbs = 1e-12;
constexpr double kTieRel = 1e-6;

}  // namespace

VarModel fit_var(const SeriesFrame& frame, int p, bool with_intercept) {
    validate_frame(frame);
    if (p < 1) throw std::invalid_argument("fit_var: p must be at least 1");
    const Eigen::Index t = frame.length();
    const Eigen::Index n = frame.dimension();
    if (t < n * p + p + 2)
        throw std::invalid_argument("fit_var: need at least " + std::to_string(n * p + p + 2) +
                                    " rows for p = " + std::to_string(p) + ", got " +
                                    std::to_string(t));

    const Eigen::Index rows = t - p;
    const Eigen::Index k = (with_intercept ? 1 : 0) + n * p;
    Eigen::MatrixXd design(rows, k);
    Eigen::Index col = 0;
    if (with_intercept) design.col(col++).setOnes();
    for (int lag = 1; lag <= p; ++lag) {
        design.middleCols(col, n) = frame.values.middleRows(p - lag, rows);
        col += n;
    }
    const Eigen::MatrixXd response = frame.values.bottomRows(rows);

    const auto qr = design.colPivHouseholderQr();
    if (qr.rank() < k)
        throw std::runtime_error("fit_var: rank-deficient regressor matrix; reduce p");
    const Eigen::MatrixXd beta = qr.solve(response);   // k x n

    VarModel model;
    model.p = p;
    model.has_intercept = with_intercept;
    model.fitted_on = t;
    model.intercept =
        with_intercept ? Eigen::VectorXd(beta.row(0).transpose()) : Eigen::VectorXd::Zero(n);
    const Eigen::Index base = with_intercept ? 1 : 0;
    for (int lag = 1; lag <= p; ++lag)
        model.lag_matrices.push_back(beta.middleRows(base + (lag - 1) * n, n).transpose());
    return model;
}

Eigen::VectorXd predict_one(const VarModel& model, const Eigen::MatrixXd& history) {
    const Eigen::Index n = model.dimension();
    if (history.cols() != n) throw std::invalid_argument("predict_one: history has wrong width");
    if (history.rows() < model.p)
        throw std::invalid_argument("predict_one: history shorter than p = " +
                                    std::to_string(model.p));
    Eigen::VectorXd out = model.intercept;
    for (int lag = 1; lag <= model.p; ++lag)
        out += model.lag_matrices[static_cast<size_t>(lag - 1)] *
               history.row(history.rows() - lag).transpose();
    return out;
}

LagSelection select_lag(const SeriesFrame& train, const std::vector<int>& p_range,
                        const EvalProtocol& protocol, bool with_intercept) {
    validate_frame(train);
    if (p_range.empty()) throw std::invalid_argument("select_lag: empty lag range");

    std::vector<LagTableRow> table;
    for (int p : p_range) {
        LagTableRow row;
        row.p = p;
        try {
            EvalReport report = walk_forward(
                train, protocol.test_len,
                [&](const SeriesFrame& window) { return fit_var(window, p, with_intercept); },
                [&](const VarModel& model, const SeriesFrame& window) {
                    return predict_one(model, window.values);
                },
                "VAR(" + std::to_string(p) + ")");
            row.per_variable = report.per_variable;
            row.total_error = report.total;
        } catch (const std::exception& err) {
            row.total_error = std::numeric_limits<double>::quiet_NaN();
            row.failure = err.what();
        }
        table.push_back(std::move(row));
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : table)
        if (row.failure.empty()) best = std::min(best, row.total_error);
    if (!std::isfinite(best)) throw std::runtime_error("select_lag: every candidate lag failed");

    int best_p = -1;
    for (const auto& row : table) {
        if (!row.failure.empty()) continue;
        if (row.total_error <= best + kTieAbs + kTieRel * best)
            if (best_p < 0 || row.p < best_p) best_p = row.p;
    }
    return {fit_var(train, best_p, with_intercept), best_p, std::move(table)};
}

}  // namespace trendflow
