#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trendflow {

// Per-variable record of what was divided out of a raw series. `factors[j]`
// is the constant divisor applied to variable j (1.0 = untouched);
// `divisor_ids[j]` / `adjuster_ids[j]` name exogenous series that were divided
// out pointwise, empty when none.
struct ScalingSpec {
    std::vector<double> factors;
    std::vector<std::string> divisor_ids;
    std::vector<std::string> adjuster_ids;

    static ScalingSpec identity(int n_vars);
};

// Uniformly sampled multivariate time series. Rows are consecutive time
// points spaced `dt` apart, columns are variables.
struct SeriesFrame {
    std::vector<std::string> variable_names;
    Eigen::MatrixXd values;   // T x n
    double dt = 1.0;
    std::string origin_label;
    std::optional<ScalingSpec> scaling;

    Eigen::Index length() const { return values.rows(); }
    Eigen::Index dimension() const { return values.cols(); }
    int index_of(const std::string& variable) const;   // -1 when absent
};

// Throws std::invalid_argument when the frame violates its invariants
// (T >= 2, dt > 0, unique names matching the column count, finite values).
void validate_frame(const SeriesFrame& frame);

// States paired with forward-difference derivative estimates. Row k holds
// values[k] and (values[k+1] - values[k]) / dt, so M = T - 1.
struct DerivativeSamples {
    Eigen::MatrixXd states;   // M x n
    Eigen::MatrixXd derivs;   // M x n
    double dt = 1.0;
};

// Column layout of a CSV file. `columns` lists the variables to load in
// order (empty = every column except `time_column`). The time column, when
// named, is skipped for computation.
struct CsvSchema {
    std::vector<std::string> columns;
    std::string time_column;
    double dt = 1.0;
};

SeriesFrame load_csv(const std::string& path, const CsvSchema& schema = {});

// Divides each targeted variable v by its divisor series d (v(t)/d(t)), then
// by the adjuster growth factor a(t)/a(0) when an adjuster is supplied.
// Divisor/adjuster frames must be single-column, time-aligned with `frame`,
// and strictly positive.
SeriesFrame normalize_by_exogenous(const SeriesFrame& frame,
                                   const std::map<std::string, SeriesFrame>& divisors,
                                   const std::map<std::string, SeriesFrame>& adjusters = {});

enum class RescaleMode { Max, None, Explicit };

// Divides every variable by a positive factor (its maximum in Max mode, the
// given factor in Explicit mode) and records the factors in the scaling spec.
SeriesFrame rescale(const SeriesFrame& frame, RescaleMode mode,
                    const std::vector<double>& factors = {});

DerivativeSamples estimate_derivatives(const SeriesFrame& frame);

// Head/tail split: train = first T - test_len rows, test = last test_len
// rows. Requires 2 <= test_len <= T - 3 so training keeps at least 3 points.
std::pair<SeriesFrame, SeriesFrame> split(const SeriesFrame& frame, int test_len);

}  // namespace trendflow
