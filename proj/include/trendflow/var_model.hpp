#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "trendflow/forecast.hpp"
#include "trendflow/series.hpp"

namespace trendflow {

// VAR(p): x_t = intercept + A_1 x_{t-1} + ... + A_p x_{t-p}.
struct VarModel {
    int p = 1;
    Eigen::VectorXd intercept;
    std::vector<Eigen::MatrixXd> lag_matrices;
    bool has_intercept = true;
    Eigen::Index fitted_on = 0;   // rows of the fitting frame

    Eigen::Index dimension() const { return intercept.size(); }
};

// Equation-by-equation OLS of x_t on [1, x_{t-1}, ..., x_{t-p}].
VarModel fit_var(const SeriesFrame& frame, int p, bool with_intercept = true);

// One-step forecast from the last p rows of `history` (chronological order).
Eigen::VectorXd predict_one(const VarModel& model, const Eigen::MatrixXd& history);

struct LagTableRow {
    int p = 0;
    Eigen::VectorXd per_variable;
    double total_error = 0.0;
    std::string failure;
};

struct LagSelection {
    VarModel model;   // best lag, refit on all of train
    int best_p = 0;
    std::vector<LagTableRow> table;
};

// Walk-forward lag selection; minimal total error wins, near-ties go to the
// smaller p.
LagSelection select_lag(const SeriesFrame& train, const std::vector<int>& p_range,
                        const EvalProtocol& protocol, bool with_intercept = true);

}  // namespace trendflow
