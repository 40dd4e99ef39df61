#include <gtest/gtest.h>

#include <random>

#include "test_models.hpp"
#include "trendflow/poly_field.hpp"

using namespace trendflow;
using namespace trendflow::testing;

TEST(evaluate, origin_is_always_a_fixed_point) {
    for (const auto& model : {model_a(), model_b(), contraction_2d(), outward_2d()})
        EXPECT_DOUBLE_EQ(model.evaluate(Eigen::Vector2d::Zero()).norm(), 0.0);
}

// hand sum of the quartic terms under the direct-signed reading
TEST(evaluate, model_a_at_unit_point) {
    const Eigen::Vector2d f = model_a().evaluate(Eigen::Vector2d(1.0, 1.0));
    EXPECT_NEAR(f[0], 0.9184, 1e-12);
    EXPECT_NEAR(f[1], -0.8810, 1e-12);
}

TEST(evaluate, pure_linear_decay) {
    const Eigen::Vector2d f = contraction_2d().evaluate(Eigen::Vector2d(2.0, 3.0));
    EXPECT_DOUBLE_EQ(f[0], -2.0);
    EXPECT_DOUBLE_EQ(f[1], -3.0);
}

TEST(evaluate, rejects_bad_states) {
    const auto model = model_a();
    EXPECT_THROW(model.evaluate(Eigen::Vector3d::Zero()), std::invalid_argument);
    Eigen::Vector2d nan_state(0.0, std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(model.evaluate(nan_state), std::invalid_argument);
}

TEST(jacobian, model_a_origin_is_the_linear_part) {
    const Eigen::MatrixXd j = model_a().jacobian(Eigen::Vector2d::Zero());
    Eigen::Matrix2d expected;
    expected << -0.3570, -0.2637, 1.2710, -0.2243;
    EXPECT_LT((j - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(jacobian, model_b_origin_is_the_linear_part) {
    const Eigen::MatrixXd j = model_b().jacobian(Eigen::Vector2d::Zero());
    Eigen::Matrix2d expected;
    expected << -0.2677, 2.3520, 1.1757, -0.4655;
    EXPECT_LT((j - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(jacobian, diagonal_equals_eps_everywhere) {
    const auto model = model_a();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Eigen::Vector2d s(dist(rng), dist(rng));
        const Eigen::MatrixXd j = model.jacobian(s);
        EXPECT_DOUBLE_EQ(j(0, 0), model.eps()[0]);
        EXPECT_DOUBLE_EQ(j(1, 1), model.eps()[1]);
    }
}

// central-difference oracle, step 1e-6, at 100 random states in [0,1]^n
TEST(jacobian, matches_finite_differences) {
    // a 3-D full-basis model exercises the cross-monomial derivative paths
    const int n = 3, degree = 3;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coeff_dist(-0.5, 0.5);
    std::vector<std::vector<Monomial>> comps(3);
    Eigen::Vector3d eps(-0.3, 0.2, -0.1);
    for (int i = 0; i < n; ++i)
        for (const auto& exps : cross_monomial_exponents(n, i, degree, BasisMode::FullMultivariate))
            comps[static_cast<size_t>(i)].push_back({exps, coeff_dist(rng)});
    const PolyVectorField model(n, degree, BasisMode::FullMultivariate, eps, comps,
                                Domain::nonnegative(n));

    std::uniform_real_distribution<double> state_dist(0.0, 1.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::Vector3d s(state_dist(rng), state_dist(rng), state_dist(rng));
        const Eigen::MatrixXd analytic = model.jacobian(s);
        Eigen::MatrixXd numeric(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::Vector3d up = s, down = s;
            up[j] += h;
            down[j] -= h;
            numeric.col(j) = (model.evaluate(up) - model.evaluate(down)) / (2.0 * h);
        }
        const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
        EXPECT_LT((analytic - numeric).cwiseAbs().maxCoeff() / scale, 1e-5);
    }
}

// finite differences of order d+1 along any axis annihilate a degree-d field
TEST(evaluate, is_polynomial_of_the_stated_degree) {
    const auto model = model_a();   // degree 4
    const double h = 0.125;
    // 5th forward difference along y of component 0 at a base point
    const Eigen::Vector2d base(0.3, 0.2);
    double diff = 0.0;
    for (int k = 0; k <= 5; ++k) {
        const double sign = (5 - k) % 2 == 0 ? 1.0 : -1.0;
        const double binom = k == 0 || k == 5 ? 1 : (k == 1 || k == 4 ? 5 : 10);
        diff += sign * binom *
                model.evaluate(Eigen::Vector2d(base[0], base[1] + k * h))[0];
    }
    EXPECT_NEAR(diff, 0.0, 1e-10);
}

TEST(monomials, full_basis_count_matches_combinatorics) {
    // 3-D degree-4: monomials over the 2 other variables, total degree 1..4
    const auto exps = cross_monomial_exponents(3, 0, 4, BasisMode::FullMultivariate);
    EXPECT_EQ(exps.size(), 14u);
    for (const auto& e : exps) EXPECT_EQ(e[0], 0);
    // 2-D separable and full coincide
    const auto full2 = cross_monomial_exponents(2, 1, 4, BasisMode::FullMultivariate);
    const auto sep2 = cross_monomial_exponents(2, 1, 4, BasisMode::Separable);
    EXPECT_EQ(full2, sep2);
}

TEST(construction, rejects_invariant_violations) {
    Eigen::Vector2d eps(-1.0, -1.0);
    // constant monomial
    EXPECT_THROW(PolyVectorField(2, 2, BasisMode::Separable, eps,
                                 {{Monomial{{0, 0}, 1.0}}, {}}, Domain::nonnegative(2)),
                 std::invalid_argument);
    // self-variable monomial
    EXPECT_THROW(PolyVectorField(2, 2, BasisMode::Separable, eps,
                                 {{Monomial{{1, 0}, 1.0}}, {}}, Domain::nonnegative(2)),
                 std::invalid_argument);
    // mixed monomial in separable mode
    EXPECT_THROW(PolyVectorField(3, 2, BasisMode::Separable, Eigen::Vector3d::Zero(),
                                 {{Monomial{{0, 1, 1}, 1.0}}, {}, {}}, Domain::nonnegative(3)),
                 std::invalid_argument);
    // the same monomial is fine in full mode
    EXPECT_NO_THROW(PolyVectorField(3, 2, BasisMode::FullMultivariate, Eigen::Vector3d::Zero(),
                                    {{Monomial{{0, 1, 1}, 1.0}}, {}, {}},
                                    Domain::nonnegative(3)));
}

TEST(domain, bounds_and_escape_sides) {
    const Domain box = Domain::box2(0.0, 1.0, -1.0, 2.0);
    EXPECT_TRUE(box.bounded());
    EXPECT_TRUE(box.contains(Eigen::Vector2d(0.0, 2.0)));
    bool below = false;
    EXPECT_EQ(box.violated_axis(Eigen::Vector2d(-0.1, 0.0), below), 0);
    EXPECT_TRUE(below);
    EXPECT_EQ(box.violated_axis(Eigen::Vector2d(0.5, 2.5), below), 1);
    EXPECT_FALSE(below);
    EXPECT_FALSE(Domain::nonnegative(2).bounded());
    EXPECT_THROW(validate_domain(Domain::box2(1.0, 0.0, 0.0, 1.0), 2), std::invalid_argument);
}

TEST(make_planar_field, negate_quadratic_flips_only_w2) {
    const auto direct = model_a();
    const auto flipped = make_planar_field(-0.3570, -0.2243, kModelAv, kModelAw, true);
    EXPECT_DOUBLE_EQ(direct.component(1)[1].coeff, -6.9038);
    EXPECT_DOUBLE_EQ(flipped.component(1)[1].coeff, 6.9038);
    EXPECT_DOUBLE_EQ(flipped.component(1)[0].coeff, direct.component(1)[0].coeff);
    EXPECT_DOUBLE_EQ(flipped.component(0)[1].coeff, direct.component(0)[1].coeff);
}
