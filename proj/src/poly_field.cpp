#include "trendflow/poly_field.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace trendflow {

int Monomial::total_degree() const {
    return std::accumulate(exponents.begin(), exponents.end(), 0);
}

Domain Domain::nonnegative(int n) {
    Domain d;
    d.lower = Eigen::VectorXd::Zero(n);
    d.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    return d;
}

Domain Domain::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Domain d;
    d.lower = lo;
    d.upper = hi;
    return d;
}

Domain Domain::box2(double xlo, double xhi, double ylo, double yhi) {
    Eigen::VectorXd lo(2), hi(2);
    lo << xlo, ylo;
    hi << xhi, yhi;
    return box(lo, hi);
}

bool Domain::bounded() const {
    return lower.allFinite() && upper.allFinite();
}

bool Domain::contains(const Eigen::VectorXd& state) const {
    bool below = false;
    return violated_axis(state, below) < 0;
}

int Domain::violated_axis(const Eigen::VectorXd& state, bool& below) const {
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        if (!std::isfinite(state[i])) {
            below = false;
            return static_cast<int>(i);
        }
        if (state[i] < lower[i] - escape_margin) {
            below = true;
            return static_cast<int>(i);
        }
        if (state[i] > upper[i] + escape_margin) {
            below = false;
            return static_cast<int>(i);
        }
    }
    return -1;
}

void validate_domain(const Domain& domain, int n) {
    if (domain.lower.size() != n || domain.upper.size() != n)
        throw std::invalid_argument("domain bounds have wrong dimension");
    if (domain.escape_margin < 0.0) throw std::invalid_argument("escape margin must be nonnegative");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(domain.lower[i] < domain.upper[i]))
            throw std::invalid_argument("domain lower bound must be below upper bound on axis " +
                                        std::to_string(i));
}

PolyVectorField::PolyVectorField(int dimension, int degree, BasisMode basis_mode,
                                 Eigen::VectorXd eps, std::vector<std::vector<Monomial>> components,
                                 Domain domain, std::optional<ScalingSpec> scaling)
    : n_(dimension),
      degree_(degree),
      basis_mode_(basis_mode),
      eps_(std::move(eps)),
      components_(std::move(components)),
      domain_(std::move(domain)),
      scaling_(std::move(scaling)) {
    if (n_ < 1) throw std::invalid_argument("field dimension must be at least 1");
    if (degree_ < 1) throw std::invalid_argument("field degree must be at least 1");
    if (eps_.size() != n_) throw std::invalid_argument("eps must have one entry per variable");
    if (components_.size() != static_cast<size_t>(n_))
        throw std::invalid_argument("need one monomial list per component");
    validate_domain(domain_, n_);
    for (int i = 0; i < n_; ++i) {
        for (const Monomial& m : components_[static_cast<size_t>(i)]) {
            if (m.exponents.size() != static_cast<size_t>(n_))
                throw std::invalid_argument("monomial exponent vector has wrong dimension");
            for (int e : m.exponents)
                if (e < 0) throw std::invalid_argument("monomial exponents must be nonnegative");
            const int deg = m.total_degree();
            if (deg == 0)
                throw std::invalid_argument("constant monomial in component " + std::to_string(i) +
                                            " (the origin must stay a fixed point)");
            if (deg > degree_)
                throw std::invalid_argument("monomial degree exceeds the field degree");
            if (m.exponents[static_cast<size_t>(i)] != 0)
                throw std::invalid_argument("component " + std::to_string(i) +
                                            " has a monomial in its own variable");
            if (basis_mode_ == BasisMode::Separable) {
                int vars = 0;
                for (int e : m.exponents) vars += (e > 0);
                if (vars != 1)
                    throw std::invalid_argument("separable mode allows single-variable monomials only");
            }
        }
    }
}

Eigen::VectorXd PolyVectorField::evaluate(const Eigen::VectorXd& state) const {
    if (state.size() != n_) throw std::invalid_argument("state has wrong dimension");
    if (!state.allFinite()) throw std::invalid_argument("state has non-finite entries");
    Eigen::VectorXd out(n_);
    evaluate_into(state, out);
    return out;
}

void PolyVectorField::evaluate_into(const Eigen::VectorXd& state, Eigen::VectorXd& out) const {
    for (int i = 0; i < n_; ++i) {
        double acc = eps_[i] * state[i];
        for (const Monomial& m : components_[static_cast<size_t>(i)]) {
            double term = m.coeff;
            for (int j = 0; j < n_; ++j) {
                const int e = m.exponents[static_cast<size_t>(j)];
                for (int k = 0; k < e; ++k) term *= state[j];
            }
            acc += term;
        }
        out[i] = acc;
    }
}

Eigen::MatrixXd PolyVectorField::jacobian(const Eigen::VectorXd& state) const {
    if (state.size() != n_) throw std::invalid_argument("state has wrong dimension");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_, n_);
    jac.diagonal() = eps_;   // monomials never involve the component's own variable
    for (int i = 0; i < n_; ++i) {
        for (const Monomial& m : components_[static_cast<size_t>(i)]) {
            for (int j = 0; j < n_; ++j) {
                const int ej = m.exponents[static_cast<size_t>(j)];
                if (ej == 0) continue;
                double term = m.coeff * ej;
                for (int k = 0; k < ej - 1; ++k) term *= state[j];
                for (int l = 0; l < n_; ++l) {
                    if (l == j) continue;
                    const int el = m.exponents[static_cast<size_t>(l)];
                    for (int k = 0; k < el; ++k) term *= state[l];
                }
                jac(i, j) += term;
            }
        }
    }
    return jac;
}

namespace {

// All exponent vectors over `others` with the given total degree, earlier
// variables taking higher powers first.
void enumerate_degree(const std::vector<int>& others, size_t pos, int remaining,
                      std::vector<int>& current, int dimension,
                      std::vector<std::vector<int>>& out) {
    if (pos + 1 == others.size()) {
        std::vector<int> exps(static_cast<size_t>(dimension), 0);
        for (size_t k = 0; k + 1 < others.size(); ++k)
            exps[static_cast<size_t>(others[k])] = current[k];
        exps[static_cast<size_t>(others.back())] = remaining;
        out.push_back(std::move(exps));
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        enumerate_degree(others, pos + 1, remaining - e, current, dimension, out);
    }
}

}  // namespace

std::vector<std::vector<int>> cross_monomial_exponents(int dimension, int self, int degree,
                                                       BasisMode mode) {
    std::vector<int> others;
    for (int j = 0; j < dimension; ++j)
        if (j != self) others.push_back(j);

    std::vector<std::vector<int>> out;
    if (others.empty()) return out;   // 1-D field: pure linear decay

    if (mode == BasisMode::Separable) {
        for (int deg = 1; deg <= degree; ++deg) {
            for (int j : others) {
                std::vector<int> exps(static_cast<size_t>(dimension), 0);
                exps[static_cast<size_t>(j)] = deg;
                out.push_back(std::move(exps));
            }
        }
        return out;
    }
    std::vector<int> current(others.size(), 0);
    for (int deg = 1; deg <= degree; ++deg)
        enumerate_degree(others, 0, deg, current, dimension, out);
    return out;
}

PolyVectorField make_planar_field(double eps1, double eps2, const std::vector<double>& v,
                                  const std::vector<double>& w, bool negate_quadratic,
                                  Domain domain) {
    if (v.empty() || v.size() != w.size())
        throw std::invalid_argument("coefficient lists must be nonempty and the same length");
    const int degree = static_cast<int>(v.size());
    std::vector<std::vector<Monomial>> comps(2);
    for (int k = 0; k < degree; ++k) {
        Monomial my{{0, k + 1}, v[static_cast<size_t>(k)]};
        double wk = w[static_cast<size_t>(k)];
        if (negate_quadratic && k == 1) wk = -wk;
        Monomial mx{{k + 1, 0}, wk};
        comps[0].push_back(std::move(my));
        comps[1].push_back(std::move(mx));
    }
    Eigen::Vector2d eps(eps1, eps2);
    return PolyVectorField(2, degree, BasisMode::Separable, eps, std::move(comps),
                           std::move(domain));
}

}  // namespace trendflow
