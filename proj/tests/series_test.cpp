#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "trendflow/series.hpp"

using namespace trendflow;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = ::testing::TempDir() + name;
    std::ofstream out(path);
    out << content;
    return path;
}

SeriesFrame make_frame(const Eigen::MatrixXd& values, double dt = 1.0) {
    SeriesFrame frame;
    frame.values = values;
    frame.dt = dt;
    for (Eigen::Index j = 0; j < values.cols(); ++j)
        frame.variable_names.push_back("v" + std::to_string(j));
    return frame;
}

}  // namespace

TEST(load_csv, parses_numeric_table) {
    const auto path = write_temp("basic.csv", "a,b\n1,2\n3,4\n5,6\n");
    const SeriesFrame frame = load_csv(path);
    EXPECT_EQ(frame.length(), 3);
    EXPECT_EQ(frame.dimension(), 2);
    EXPECT_EQ(frame.variable_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_DOUBLE_EQ(frame.values(2, 1), 6.0);
}

TEST(load_csv, rejects_blank_cell_with_location) {
    const auto path = write_temp("gap.csv", "a,b\n1,2\n3,\n5,6\n");
    try {
        load_csv(path);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& err) {
        EXPECT_NE(std::string(err.what()).find("missing value at row 3, column b"),
                  std::string::npos);
    }
}

TEST(load_csv, rejects_non_numeric_and_short_files) {
    const auto bad = write_temp("bad.csv", "a,b\n1,2\n3,oops\n");
    EXPECT_THROW(load_csv(bad), std::invalid_argument);
    const auto shrt = write_temp("short.csv", "a,b\n1,2\n");
    EXPECT_THROW(load_csv(shrt), std::invalid_argument);
    EXPECT_THROW(load_csv(::testing::TempDir() + "does_not_exist.csv"), std::invalid_argument);
}

TEST(load_csv, missing_column_and_duplicates) {
    const auto path = write_temp("cols.csv", "a,b\n1,2\n3,4\n");
    CsvSchema schema;
    schema.columns = {"a", "c"};
    EXPECT_THROW(load_csv(path, schema), std::invalid_argument);
    const auto dup = write_temp("dup.csv", "a,a\n1,2\n3,4\n");
    EXPECT_THROW(load_csv(dup), std::invalid_argument);
}

TEST(load_csv, time_column_is_skipped) {
    const auto path = write_temp("timed.csv", "month,a,b\n2008-01,1,2\n2008-02,3,4\n");
    CsvSchema schema;
    schema.time_column = "month";
    schema.dt = 1.0;
    const SeriesFrame frame = load_csv(path, schema);
    EXPECT_EQ(frame.dimension(), 2);
    EXPECT_EQ(frame.variable_names, (std::vector<std::string>{"a", "b"}));
}

TEST(load_csv, monthly_two_variable_layout) {
    // 144 monthly rows (12 years), two variables
    std::string content = "readers,edits\n";
    for (int i = 0; i < 144; ++i)
        content += std::to_string(100 + i) + "," + std::to_string(50 + i) + "\n";
    const auto path = write_temp("monthly.csv", content);
    const SeriesFrame frame = load_csv(path);
    EXPECT_EQ(frame.length(), 144);
    EXPECT_EQ(frame.dimension(), 2);
}

TEST(normalize_by_exogenous, constant_divisor_halves_column) {
    Eigen::MatrixXd values(3, 2);
    values << 2, 10, 4, 20, 6, 30;
    SeriesFrame frame = make_frame(values);

    SeriesFrame divisor = make_frame(Eigen::MatrixXd::Constant(3, 1, 2.0));
    divisor.variable_names = {"d"};
    const SeriesFrame out = normalize_by_exogenous(frame, {{"v0", divisor}});
    EXPECT_TRUE(out.values.col(0).isApprox(Eigen::Vector3d(1, 2, 3)));
    EXPECT_TRUE(out.values.col(1).isApprox(frame.values.col(1)));
    ASSERT_TRUE(out.scaling.has_value());
    EXPECT_FALSE(out.scaling->divisor_ids[0].empty());
    EXPECT_TRUE(out.scaling->divisor_ids[1].empty());
}

TEST(normalize_by_exogenous, self_divisor_gives_ones) {
    Eigen::MatrixXd values(3, 1);
    values << 2, 5, 9;
    SeriesFrame frame = make_frame(values);
    SeriesFrame divisor = make_frame(values);
    divisor.variable_names = {"d"};
    const SeriesFrame out = normalize_by_exogenous(frame, {{"v0", divisor}});
    EXPECT_TRUE(out.values.col(0).isApprox(Eigen::Vector3d::Ones()));
}

TEST(normalize_by_exogenous, adjuster_divides_by_growth_factor) {
    Eigen::MatrixXd values(3, 1);
    values << 10, 20, 30;
    SeriesFrame frame = make_frame(values);
    SeriesFrame adjuster = make_frame((Eigen::MatrixXd(3, 1) << 100, 200, 400).finished());
    adjuster.variable_names = {"a"};
    const SeriesFrame out = normalize_by_exogenous(frame, {}, {{"v0", adjuster}});
    // growth factors 1, 2, 4
    EXPECT_TRUE(out.values.col(0).isApprox(Eigen::Vector3d(10, 10, 7.5)));
}

TEST(normalize_by_exogenous, rejects_misalignment_and_nonpositive) {
    Eigen::MatrixXd values(3, 1);
    values << 1, 2, 3;
    SeriesFrame frame = make_frame(values);
    SeriesFrame wrong_len = make_frame(Eigen::MatrixXd::Constant(4, 1, 2.0));
    wrong_len.variable_names = {"d"};
    EXPECT_THROW(normalize_by_exogenous(frame, {{"v0", wrong_len}}), std::invalid_argument);
    SeriesFrame negative = make_frame((Eigen::MatrixXd(3, 1) << 1, -1, 1).finished());
    negative.variable_names = {"d"};
    EXPECT_THROW(normalize_by_exogenous(frame, {{"v0", negative}}), std::invalid_argument);
}

TEST(rescale, max_mode_maps_into_unit_interval) {
    Eigen::MatrixXd values(3, 2);
    values << 50, 1, 200, 2, 100, 4;
    const SeriesFrame out = rescale(make_frame(values), RescaleMode::Max);
    EXPECT_DOUBLE_EQ(out.values.col(0).maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(out.scaling->factors[0], 200.0);
    EXPECT_DOUBLE_EQ(out.scaling->factors[1], 4.0);
}

TEST(rescale, none_is_identity_and_zero_column_rejected) {
    Eigen::MatrixXd values(3, 1);
    values << 1, 2, 3;
    const SeriesFrame frame = make_frame(values);
    const SeriesFrame same = rescale(frame, RescaleMode::None);
    EXPECT_TRUE(same.values.isApprox(frame.values));

    EXPECT_THROW(rescale(make_frame(Eigen::MatrixXd::Zero(3, 1)), RescaleMode::Max),
                 std::invalid_argument);
    EXPECT_THROW(rescale(frame, RescaleMode::Explicit, {0.0}), std::invalid_argument);
}

TEST(rescale, round_trip_restores_values) {
    Eigen::MatrixXd values(4, 2);
    values << 3, 70, 9, 10, 27, 35, 81, 140;
    const SeriesFrame frame = make_frame(values);
    const SeriesFrame scaled = rescale(frame, RescaleMode::Max);
    Eigen::MatrixXd back = scaled.values;
    for (Eigen::Index j = 0; j < back.cols(); ++j)
        back.col(j) *= scaled.scaling->factors[static_cast<size_t>(j)];
    EXPECT_LT((back - frame.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(estimate_derivatives, linear_ramp_has_constant_derivative) {
    Eigen::MatrixXd values(3, 1);
    values << 0, 1, 2;
    const DerivativeSamples samples = estimate_derivatives(make_frame(values));
    EXPECT_EQ(samples.states.rows(), 2);
    EXPECT_TRUE(samples.derivs.isApprox(Eigen::MatrixXd::Ones(2, 1)));
    EXPECT_TRUE(samples.states.isApprox((Eigen::MatrixXd(2, 1) << 0, 1).finished()));
}

TEST(estimate_derivatives, constant_series_has_zero_derivative) {
    const DerivativeSamples samples =
        estimate_derivatives(make_frame(Eigen::MatrixXd::Constant(5, 2, 3.5)));
    EXPECT_DOUBLE_EQ(samples.derivs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(estimate_derivatives, respects_dt) {
    Eigen::MatrixXd values(2, 2);
    values << 1, 2, 3, 5;
    const DerivativeSamples samples = estimate_derivatives(make_frame(values, 0.5));
    EXPECT_EQ(samples.states.rows(), 1);
    EXPECT_TRUE(samples.states.row(0).isApprox(Eigen::RowVector2d(1, 2)));
    EXPECT_TRUE(samples.derivs.row(0).isApprox(Eigen::RowVector2d(4, 6)));
}

TEST(split_frame, counts_and_boundaries) {
    const SeriesFrame frame = make_frame(Eigen::MatrixXd::Random(10, 2));
    auto [train, test] = split(frame, 3);
    EXPECT_EQ(train.length(), 7);
    EXPECT_EQ(test.length(), 3);

    auto [min_train, max_test] = split(frame, 7);   // test_len = T - 3
    EXPECT_EQ(min_train.length(), 3);
    EXPECT_EQ(max_test.length(), 7);

    EXPECT_THROW(split(frame, 10), std::invalid_argument);
    EXPECT_THROW(split(frame, 8), std::invalid_argument);
    EXPECT_THROW(split(frame, 1), std::invalid_argument);
}

TEST(split_frame, concatenation_reproduces_frame) {
    const SeriesFrame frame = make_frame(Eigen::MatrixXd::Random(12, 3), 0.25);
    auto [train, test] = split(frame, 4);
    Eigen::MatrixXd glued(frame.length(), frame.dimension());
    glued << train.values, test.values;
    EXPECT_TRUE(glued.isApprox(frame.values));
    EXPECT_DOUBLE_EQ(train.dt, frame.dt);
    EXPECT_DOUBLE_EQ(test.dt, frame.dt);
}

// rescale is a change of units: derivatives of the rescaled frame equal
// rescaled derivatives of the original
TEST(rescale, commutes_with_differentiation) {
    const SeriesFrame frame = make_frame(Eigen::MatrixXd::Random(8, 2).array() + 2.0, 0.5);
    const SeriesFrame scaled = rescale(frame, RescaleMode::Max);
    const DerivativeSamples direct = estimate_derivatives(scaled);
    DerivativeSamples rescaled = estimate_derivatives(frame);
    for (Eigen::Index j = 0; j < 2; ++j) {
        rescaled.states.col(j) /= scaled.scaling->factors[static_cast<size_t>(j)];
        rescaled.derivs.col(j) /= scaled.scaling->factors[static_cast<size_t>(j)];
    }
    EXPECT_LT((direct.derivs - rescaled.derivs).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((direct.states - rescaled.states).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(normalize_by_exogenous, round_trip_restores_values) {
    Eigen::MatrixXd values(4, 2);
    values << 2, 3, 4, 5, 8, 7, 16, 9;
    SeriesFrame frame = make_frame(values);
    SeriesFrame divisor = make_frame((Eigen::MatrixXd(4, 1) << 1, 2, 4, 8).finished());
    divisor.variable_names = {"d"};
    const SeriesFrame out = normalize_by_exogenous(frame, {{"v1", divisor}});
    Eigen::MatrixXd back = out.values;
    back.col(1) = back.col(1).cwiseProduct(divisor.values.col(0));
    EXPECT_LT(((back - frame.values).cwiseQuotient(frame.values)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(validate_frame, rejects_invariant_violations) {
    SeriesFrame frame = make_frame(Eigen::MatrixXd::Random(3, 2));
    frame.dt = 0.0;
    EXPECT_THROW(validate_frame(frame), std::invalid_argument);
    frame.dt = 1.0;
    frame.variable_names = {"a"};
    EXPECT_THROW(validate_frame(frame), std::invalid_argument);
    frame.variable_names = {"a", "a"};
    EXPECT_THROW(validate_frame(frame), std::invalid_argument);
    frame.variable_names = {"a", "b"};
    frame.values(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(validate_frame(frame), std::invalid_argument);
}
