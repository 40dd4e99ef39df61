#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_models.hpp"
#include "trendflow/flow.hpp"

using namespace trendflow;
using namespace trendflow::testing;

namespace {

PolyVectorField decay_1d() {
    Eigen::VectorXd eps(1);
    eps << -1.0;
    return PolyVectorField(1, 1, BasisMode::Separable, eps, {{}},
                           Domain::box(Eigen::VectorXd::Constant(1, -10.0),
                                       Eigen::VectorXd::Constant(1, 10.0)));
}

// planar linear field x' = A x, built from the cross-coupled class
// (diagonal via eps, off-diagonal via degree-1 monomials)
PolyVectorField linear_field(const Eigen::Matrix2d& a) {
    Eigen::Vector2d eps(a(0, 0), a(1, 1));
    return PolyVectorField(2, 1, BasisMode::Separable, eps,
                           {{Monomial{{0, 1}, a(0, 1)}}, {Monomial{{1, 0}, a(1, 0)}}},
                           Domain::box2(-100, 100, -100, 100));
}

}  // namespace

TEST(advance, exponential_decay_closed_form) {
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    const Eigen::VectorXd x1 = advance(decay_1d(), x0, 1.0, 0.01);
    EXPECT_NEAR(x1[0], std::exp(-1.0), 1e-6);
}

TEST(advance, zero_field_keeps_state) {
    Eigen::Vector2d eps(0.0, 0.0);
    const PolyVectorField zero(2, 1, BasisMode::Separable, eps, {{}, {}},
                               Domain::nonnegative(2));
    Eigen::Vector2d s(0.4, 0.7);
    EXPECT_TRUE(advance(zero, s, 5.0, 0.1).isApprox(s));
}

TEST(advance, rotation_closed_form) {
    Eigen::Matrix2d a;
    a << 0, -1, 1, 0;
    const Eigen::VectorXd out =
        advance(linear_field(a), Eigen::Vector2d(1.0, 0.0), std::numbers::pi / 2.0, 0.001);
    EXPECT_NEAR(out[0], 0.0, 1e-6);
    EXPECT_NEAR(out[1], 1.0, 1e-6);
}

TEST(advance, rk4_order_at_least_3point9) {
    const auto model = decay_1d();
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    const double exact = std::exp(-1.0);
    std::vector<double> errors;
    for (double h : {0.1, 0.05, 0.025, 0.0125})
        errors.push_back(std::abs(advance(model, x0, 1.0, h)[0] - exact));
    for (size_t k = 0; k + 1 < errors.size(); ++k) {
        const double order = std::log2(errors[k] / errors[k + 1]);
        EXPECT_GE(order, 3.9) << "between h levels " << k << " and " << k + 1;
    }
}

TEST(advance, is_deterministic) {
    const auto model = model_a();
    const Eigen::Vector2d start(0.5, 0.5);
    const Eigen::VectorXd a = advance(model, start, 3.0, 0.01);
    const Eigen::VectorXd b = advance(model, start, 3.0, 0.01);
    EXPECT_EQ(a[0], b[0]);
    EXPECT_EQ(a[1], b[1]);
}

TEST(advance, composes_exactly_over_step_multiples) {
    const auto model = model_a();
    const Eigen::Vector2d start(0.5, 0.5);
    const double h = 0.01;
    const Eigen::VectorXd whole = advance(model, start, 0.3 + 0.4, h);
    const Eigen::VectorXd parts = advance(model, advance(model, start, 0.3, h), 0.4, h);
    EXPECT_EQ(whole[0], parts[0]);   // bit-identical
    EXPECT_EQ(whole[1], parts[1]);
}

TEST(advance, shortens_the_final_partial_step) {
    const auto model = decay_1d();
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    const Eigen::VectorXd out = advance(model, x0, 0.255, 0.1);   // 2 full + 0.055
    EXPECT_NEAR(out[0], std::exp(-0.255), 1e-6);
}

TEST(advance, matches_matrix_exponential_on_linear_fields) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::Matrix2d a;
        a << dist(rng), dist(rng), dist(rng), dist(rng);
        if (a.norm() > 5.0) a *= 5.0 / a.norm();
        const Eigen::Vector2d x0(0.8, -0.3);
        const Eigen::VectorXd numeric = advance(linear_field(a), x0, 1.0, 0.01);
        const Eigen::Vector2d exact = (a * 1.0).exp() * x0;
        EXPECT_LT((numeric - exact).norm(), 1e-6) << "A =\n" << a;
    }
}

TEST(advance, reports_blowup_with_time) {
    // x' = 0.0*x + y^2 coupled with y' = x^2 from a large start blows up
    Eigen::Vector2d eps(0.0, 0.0);
    const PolyVectorField model(2, 2, BasisMode::Separable, eps,
                                {{Monomial{{0, 2}, 1.0}}, {Monomial{{2, 0}, 1.0}}},
                                Domain::nonnegative(2));
    try {
        advance(model, Eigen::Vector2d(50.0, 50.0), 10.0, 0.05);
        FAIL() << "expected blow-up";
    } catch (const std::runtime_error& err) {
        EXPECT_NE(std::string(err.what()).find("blew up at t ="), std::string::npos);
    }
}

TEST(trajectory, starts_at_fixed_point_converges_immediately) {
    const auto model = contraction_2d();
    const Domain box = Domain::box2(-1, 1, -1, 1);
    const std::vector<Eigen::VectorXd> fps{Eigen::Vector2d::Zero()};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d::Zero(), box, fps);
    EXPECT_EQ(result.termination, Termination::Converged);
    EXPECT_EQ(result.fixed_point, 0);
    EXPECT_EQ(result.steps, 0);
}

TEST(trajectory, contraction_converges_to_origin) {
    const auto model = contraction_2d();
    const Domain box = Domain::box2(0, 1, 0, 1);
    const std::vector<Eigen::VectorXd> fps{Eigen::Vector2d::Zero()};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d(1.0, 0.5), box, fps);
    EXPECT_EQ(result.termination, Termination::Converged);
    EXPECT_EQ(result.fixed_point, 0);
    EXPECT_LT(result.final_state.norm(), 1e-4);
}

// deep in the large attractor's basin: settles near it
TEST(trajectory, model_a_attractor_basin) {
    const auto model = model_a();
    const Domain box = Domain::box2(0, 2, 0, 2);
    std::vector<Eigen::VectorXd> fps{
        Eigen::Vector2d::Zero(), Eigen::Vector2d(kModelASaddleX, kModelASaddleY),
        Eigen::Vector2d(kModelAAttractorX, kModelAAttractorY)};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d(0.8, 0.6), box, fps);
    EXPECT_EQ(result.termination, Termination::Converged);
    EXPECT_EQ(result.fixed_point, 2);
}

// near the origin the spiral leaves the nonnegative quadrant: the first
// coordinate dips below zero
TEST(trajectory, model_a_origin_basin_escapes) {
    const auto model = model_a();
    const Domain box = Domain::box2(0, 2, 0, 2);
    std::vector<Eigen::VectorXd> fps{
        Eigen::Vector2d::Zero(), Eigen::Vector2d(kModelAAttractorX, kModelAAttractorY)};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d(0.004, 0.02), box, fps);
    EXPECT_EQ(result.termination, Termination::Escaped);
    EXPECT_EQ(result.escape_axis, 0);
    EXPECT_TRUE(result.escape_below);
    EXPECT_FALSE(result.overflow);
    EXPECT_NEAR(result.end_time, 1.23, 0.05);
}

TEST(trajectory, horizon_on_closed_orbits) {
    const auto model = rotation_2d(Domain::box2(-2, 2, -2, 2));
    const Domain box = Domain::box2(-2, 2, -2, 2);
    IntegrationOptions opts;
    opts.horizon = 20.0;
    opts.path_stride = 0;
    const std::vector<Eigen::VectorXd> fps{Eigen::Vector2d::Zero()};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d(1.0, 0.0), box, fps, opts);
    EXPECT_EQ(result.termination, Termination::Horizon);
    EXPECT_NEAR(result.final_state.norm(), 1.0, 1e-6);
}

TEST(trajectory, path_times_strictly_increase) {
    const auto model = contraction_2d();
    const Domain box = Domain::box2(0, 1, 0, 1);
    const std::vector<Eigen::VectorXd> fps{Eigen::Vector2d::Zero()};
    // strides that do and do not divide the step count at termination
    for (int stride : {1, 7, 10}) {
        IntegrationOptions opts;
        opts.path_stride = stride;
        const TrajectoryResult result =
            trajectory(model, Eigen::Vector2d(1.0, 1.0), box, fps, opts);
        ASSERT_GE(result.path.size(), 2u);
        for (size_t k = 1; k < result.times.size(); ++k)
            EXPECT_GT(result.times[k], result.times[k - 1]);
        EXPECT_EQ(result.path.size(), result.times.size());
        EXPECT_EQ(result.times.back(), result.end_time);
    }
}

TEST(trajectory, csv_export_shape) {
    const auto model = contraction_2d();
    const Domain box = Domain::box2(0, 1, 0, 1);
    const std::vector<Eigen::VectorXd> fps{Eigen::Vector2d::Zero()};
    const TrajectoryResult result = trajectory(model, Eigen::Vector2d(0.5, 0.5), box, fps);
    const std::string csv = trajectory_csv(result, {"x", "y"});
    EXPECT_EQ(csv.substr(0, 9), "time,x,y\n");
    const size_t lines = std::count(csv.begin(), csv.end(), '\n');
    EXPECT_EQ(lines, result.path.size() + 1);
}

TEST(trajectory, rejects_start_outside_domain) {
    const auto model = contraction_2d();
    const Domain box = Domain::box2(0, 1, 0, 1);
    EXPECT_THROW(trajectory(model, Eigen::Vector2d(2.0, 0.5), box, {}), std::invalid_argument);
}
