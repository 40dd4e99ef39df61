#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "trendflow/series.hpp"

namespace trendflow {

// Which monomials in the other variables each component may use.
//   FullMultivariate: all cross monomials of total degree 1..d.
//   Separable: powers of a single other variable only (sum of univariate
//   polynomials). The two coincide in 2-D.
enum class BasisMode { FullMultivariate, Separable };

// One term of a component polynomial: coeff * prod_j state_j^exponents[j].
// The exponent of the component's own variable is always zero and the total
// degree is at least one, so the origin stays a fixed point.
struct Monomial {
    std::vector<int> exponents;
    double coeff = 0.0;
    int total_degree() const;
};

// Axis-aligned region of state space. Upper bounds default to +infinity;
// escape tests allow `escape_margin` of slack below the lower bounds.
struct Domain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double escape_margin = 0.0;

    static Domain nonnegative(int n);                              // [0, inf)^n
    static Domain box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static Domain box2(double xlo, double xhi, double ylo, double yhi);

    bool bounded() const;
    bool contains(const Eigen::VectorXd& state) const;
    // First axis whose bound is violated beyond the margin, -1 if none.
    // `below` reports which side was crossed.
    int violated_axis(const Eigen::VectorXd& state, bool& below) const;
};

void validate_domain(const Domain& domain, int n);

// Cross-coupled polynomial vector field
//   dx_i/dt = eps_i * x_i + sum over monomials of the other variables.
// Immutable after construction; evaluation and Jacobian are pure.
class PolyVectorField {
  public:
    PolyVectorField(int dimension, int degree, BasisMode basis_mode, Eigen::VectorXd eps,
                    std::vector<std::vector<Monomial>> components, Domain domain,
                    std::optional<ScalingSpec> scaling = std::nullopt);

    int dimension() const { return n_; }
    int degree() const { return degree_; }
    BasisMode basis_mode() const { return basis_mode_; }
    const Eigen::VectorXd& eps() const { return eps_; }
    const std::vector<Monomial>& component(int i) const { return components_[static_cast<size_t>(i)]; }
    const std::vector<std::vector<Monomial>>& components() const { return components_; }
    const Domain& domain() const { return domain_; }
    const std::optional<ScalingSpec>& scaling() const { return scaling_; }

    Eigen::VectorXd evaluate(const Eigen::VectorXd& state) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& state) const;

    // Unchecked fast path for integrator loops; `out` must be sized n.
    void evaluate_into(const Eigen::VectorXd& state, Eigen::VectorXd& out) const;

  private:
    int n_;
    int degree_;
    BasisMode basis_mode_;
    Eigen::VectorXd eps_;
    std::vector<std::vector<Monomial>> components_;
    Domain domain_;
    std::optional<ScalingSpec> scaling_;
};

// Exponent vectors available to component `self` at the given degree and
// basis mode, in the deterministic order used by fitting and serialization
// (total degree ascending, then lexicographic with earlier variables taking
// higher powers first).
std::vector<std::vector<int>> cross_monomial_exponents(int dimension, int self, int degree,
                                                       BasisMode mode);

// Planar field x' = eps1*x + sum_k v[k]*y^(k+1), y' = eps2*y + sum_k w[k]*x^(k+1).
// Coefficients are taken exactly as given ("direct" reading of a tabulated
// coefficient list); set negate_quadratic to flip the sign of the tabulated
// x^2 entry instead (the alternative reading of tables printed against a
// "- w2 x^2" template).
PolyVectorField make_planar_field(double eps1, double eps2, const std::vector<double>& v,
                                  const std::vector<double>& w, bool negate_quadratic = false,
                                  Domain domain = Domain::nonnegative(2));

}  // namespace trendflow
