#include "trendflow/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace trendflow {

ScalingSpec ScalingSpec::identity(int n_vars) {
    ScalingSpec spec;
    spec.factors.assign(static_cast<size_t>(n_vars), 1.0);
    spec.divisor_ids.assign(static_cast<size_t>(n_vars), "");
    spec.adjuster_ids.assign(static_cast<size_t>(n_vars), "");
    return spec;
}

int SeriesFrame::index_of(const std::string& variable) const {
    for (size_t j = 0; j < variable_names.size(); ++j) {
        if (variable_names[j] == variable) return static_cast<int>(j);
    }
    return -1;
}

void validate_frame(const SeriesFrame& frame) {
    if (frame.values.rows() < 2) throw std::invalid_argument("series frame needs at least 2 rows");
    if (!(frame.dt > 0.0)) throw std::invalid_argument("series frame dt must be positive");
    if (static_cast<Eigen::Index>(frame.variable_names.size()) != frame.values.cols())
        throw std::invalid_argument("variable name count does not match column count");
    std::set<std::string> unique(frame.variable_names.begin(), frame.variable_names.end());
    if (unique.size() != frame.variable_names.size())
        throw std::invalid_argument("duplicate variable names");
    if (!frame.values.allFinite()) throw std::invalid_argument("series frame contains non-finite values");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        size_t a = cell.find_first_not_of(" \t\r");
        size_t b = cell.find_last_not_of(" \t\r");
        cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

ScalingSpec scaling_or_identity(const SeriesFrame& frame) {
    return frame.scaling ? *frame.scaling
                         : ScalingSpec::identity(static_cast<int>(frame.dimension()));
}

}  // namespace

SeriesFrame load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty file: " + path);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_csv_line(line);

    std::set<std::string> header_set(header.begin(), header.end());
    if (header_set.size() != header.size())
        throw std::invalid_argument("duplicate variable names in header of " + path);

    // Columns requested by the schema, or every non-time column.
    std::vector<std::string> wanted = schema.columns;
    if (wanted.empty()) {
        for (const auto& name : header)
            if (name != schema.time_column) wanted.push_back(name);
    }
    std::vector<int> col_index;
    for (const auto& name : wanted) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::invalid_argument("missing column '" + name + "' in " + path);
        col_index.push_back(static_cast<int>(it - header.begin()));
    }

    std::vector<std::vector<double>> rows;
    size_t row_number = 1;   // header was row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        std::vector<double> row(wanted.size());
        for (size_t k = 0; k < col_index.size(); ++k) {
            const size_t c = static_cast<size_t>(col_index[k]);
            if (c >= cells.size() || cells[c].empty())
                throw std::invalid_argument("missing value at row " + std::to_string(row_number) +
                                            ", column " + wanted[k]);
            size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[c], &consumed);
            } catch (const std::exception&) {
                throw std::invalid_argument("non-numeric value '" + cells[c] + "' at row " +
                                            std::to_string(row_number) + ", column " + wanted[k]);
            }
            if (consumed != cells[c].size() || !std::isfinite(v))
                throw std::invalid_argument("non-numeric value '" + cells[c] + "' at row " +
                                            std::to_string(row_number) + ", column " + wanted[k]);
            row[k] = v;
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw std::invalid_argument("fewer than 2 data rows in " + path);

    SeriesFrame frame;
    frame.variable_names = wanted;
    frame.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(wanted.size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < wanted.size(); ++c)
            frame.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    frame.dt = schema.dt;
    frame.origin_label = path;
    validate_frame(frame);
    return frame;
}

SeriesFrame normalize_by_exogenous(const SeriesFrame& frame,
                                   const std::map<std::string, SeriesFrame>& divisors,
                                   const std::map<std::string, SeriesFrame>& adjusters) {
    validate_frame(frame);
    SeriesFrame out = frame;
    ScalingSpec spec = scaling_or_identity(frame);

    auto check_aligned = [&](const SeriesFrame& exo, const std::string& role,
                             const std::string& var) {
        if (exo.values.rows() != frame.values.rows() || exo.dt != frame.dt)
            throw std::invalid_argument(role + " series for '" + var +
                                        "' is not time-aligned with the frame");
        if (exo.values.cols() != 1)
            throw std::invalid_argument(role + " series for '" + var + "' must be single-column");
        if ((exo.values.array() <= 0.0).any())
            throw std::invalid_argument(role + " series for '" + var + "' must be strictly positive");
    };

    for (const auto& [var, divisor] : divisors) {
        const int j = frame.index_of(var);
        if (j < 0) throw std::invalid_argument("unknown variable '" + var + "'");
        check_aligned(divisor, "divisor", var);
        out.values.col(j) = frame.values.col(j).array() / divisor.values.col(0).array();
        spec.divisor_ids[static_cast<size_t>(j)] =
            divisor.origin_label.empty() ? var + "-divisor" : divisor.origin_label;
    }
    for (const auto& [var, adjuster] : adjusters) {
        const int j = frame.index_of(var);
        if (j < 0) throw std::invalid_argument("unknown variable '" + var + "'");
        check_aligned(adjuster, "adjuster", var);
        // growth factor a(t)/a(0), normalized to 1 at the first sample
        const Eigen::ArrayXd growth = adjuster.values.col(0).array() / adjuster.values(0, 0);
        out.values.col(j) = out.values.col(j).array() / growth;
        spec.adjuster_ids[static_cast<size_t>(j)] =
            adjuster.origin_label.empty() ? var + "-adjuster" : adjuster.origin_label;
    }
    out.scaling = std::move(spec);
    return out;
}

SeriesFrame rescale(const SeriesFrame& frame, RescaleMode mode,
                    const std::vector<double>& factors) {
    validate_frame(frame);
    if (mode == RescaleMode::None) return frame;

    const Eigen::Index n = frame.dimension();
    std::vector<double> applied(static_cast<size_t>(n), 1.0);
    if (mode == RescaleMode::Max) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double m = frame.values.col(j).maxCoeff();
            if (!(m > 0.0))
                throw std::invalid_argument("variable '" + frame.variable_names[j] +
                                            "' has no positive maximum; cannot max-rescale");
            applied[static_cast<size_t>(j)] = m;
        }
    } else {
        if (factors.size() != static_cast<size_t>(n))
            throw std::invalid_argument("explicit rescale needs one factor per variable");
        for (double f : factors)
            if (!(f > 0.0)) throw std::invalid_argument("rescale factors must be positive");
        applied = factors;
    }

    SeriesFrame out = frame;
    ScalingSpec spec = scaling_or_identity(frame);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values.col(j) /= applied[static_cast<size_t>(j)];
        spec.factors[static_cast<size_t>(j)] *= applied[static_cast<size_t>(j)];
    }
    out.scaling = std::move(spec);
    return out;
}

DerivativeSamples estimate_derivatives(const SeriesFrame& frame) {
    validate_frame(frame);
    const Eigen::Index m = frame.values.rows() - 1;
    DerivativeSamples samples;
    samples.states = frame.values.topRows(m);
    samples.derivs = (frame.values.bottomRows(m) - frame.values.topRows(m)) / frame.dt;
    samples.dt = frame.dt;
    return samples;
}

std::pair<SeriesFrame, SeriesFrame> split(const SeriesFrame& frame, int test_len) {
    validate_frame(frame);
    const Eigen::Index t = frame.values.rows();
    if (test_len < 2 || static_cast<Eigen::Index>(test_len) > t - 3)
        throw std::invalid_argument("test_len must satisfy 2 <= test_len <= T - 3 (T = " +
                                    std::to_string(t) + ", test_len = " + std::to_string(test_len) +
                                    ")");
    SeriesFrame train = frame;
    SeriesFrame test = frame;
    train.values = frame.values.topRows(t - test_len);
    test.values = frame.values.bottomRows(test_len);
    return {std::move(train), std::move(test)};
}

}  // namespace trendflow
