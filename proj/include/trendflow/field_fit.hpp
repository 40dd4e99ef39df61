#pragma once

#include <string>
#include <vector>

#include "trendflow/forecast.hpp"
#include "trendflow/poly_field.hpp"
#include "trendflow/series.hpp"

namespace trendflow {

enum class EpsConstraint { None, NonPositive, NonNegative };

struct FitOptions {
    double ridge = 0.0;
    BasisMode basis_mode = BasisMode::FullMultivariate;
    EpsConstraint eps_constraint = EpsConstraint::None;
    // High-degree monomial designs on short series are often rank-deficient;
    // by default the solver retries with ridge 1e-8 and records a warning.
    bool rank_fallback = true;
    std::vector<std::string>* warnings = nullptr;
    Domain domain;                        // carried onto the model; empty = nonnegative orthant
    std::optional<ScalingSpec> scaling;   // carried onto the model
};

// Least-squares fit of a cross-coupled polynomial field: each component i is
// regressed independently on [state_i | cross monomials] via a column-pivoted
// QR decomposition. eps_i is the coefficient on state_i.
PolyVectorField fit(const DerivativeSamples& samples, int degree, const FitOptions& opts = {});

struct DegreeTableRow {
    int degree = 0;
    Eigen::VectorXd per_variable;
    double total_error = 0.0;
    std::string failure;   // empty on success
};

struct DegreeSelection {
    PolyVectorField model;   // best degree, refit on all of train
    int best_degree = 0;
    std::vector<DegreeTableRow> table;
};

// Walk-forward degree selection on an inner split of `train`: every degree is
// scored with the same expanding-window protocol as the final evaluation, the
// smallest total error wins, and near-ties go to the smaller degree.
DegreeSelection select_degree(const SeriesFrame& train, const std::vector<int>& degrees,
                              const EvalProtocol& protocol, const FitOptions& opts = {});

std::string degree_table_text(const std::vector<DegreeTableRow>& table,
                              const std::vector<std::string>& variable_names);

}  // namespace trendflow
