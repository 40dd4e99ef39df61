#include "trendflow/field_fit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "trendflow/flow.hpp"

namespace trendflow {

namespace {

constexpr double kFallbackRidge = 1e-8;
// Near-ties between degrees (noise-free fits differ only by rounding) go to
// the smaller degree.
constexpr double kTieAbs = 1e-12;
constexpr double kTieRel = 1e-6;

Eigen::VectorXd solve_ls(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                         double ridge) {
    if (ridge > 0.0) {
        const Eigen::Index k = design.cols();
        Eigen::MatrixXd aug(design.rows() + k, k);
        aug.topRows(design.rows()) = design;
        aug.bottomRows(k) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(design.rows() + k);
        rhs.head(design.rows()) = target;
        return aug.colPivHouseholderQr().solve(rhs);
    }
    return design.colPivHouseholderQr().solve(target);
}

double monomial_value(const std::vector<int>& exponents, const Eigen::VectorXd& state) {
    double v = 1.0;
    for (Eigen::Index j = 0; j < state.size(); ++j)
        for (int k = 0; k < exponents[static_cast<size_t>(j)]; ++k) v *= state[j];
    return v;
}

}  // namespace

PolyVectorField fit(const DerivativeSamples& samples, int degree, const FitOptions& opts) {
    if (degree < 1) throw std::invalid_argument("fit: degree must be at least 1");
    if (samples.states.rows() != samples.derivs.rows() ||
        samples.states.cols() != samples.derivs.cols())
        throw std::invalid_argument("fit: states and derivs shapes differ");
    if (!samples.states.allFinite() || !samples.derivs.allFinite())
        throw std::invalid_argument("fit: samples contain non-finite values");
    if (opts.ridge < 0.0) throw std::invalid_argument("fit: ridge must be nonnegative");

    const int n = static_cast<int>(samples.states.cols());
    const Eigen::Index m = samples.states.rows();

    Domain domain = opts.domain.lower.size() == n ? opts.domain : Domain::nonnegative(n);

    Eigen::VectorXd eps(n);
    std::vector<std::vector<Monomial>> components(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto exponents = cross_monomial_exponents(n, i, degree, opts.basis_mode);
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(exponents.size());
        if (m < k && opts.ridge == 0.0)
            throw std::invalid_argument(
                "fit: underdetermined system for component " + std::to_string(i) + " (" +
                std::to_string(m) + " samples, " + std::to_string(k) +
                " basis columns); increase ridge or reduce degree");

        Eigen::MatrixXd design(m, k);
        design.col(0) = samples.states.col(i);
        for (size_t c = 0; c < exponents.size(); ++c)
            for (Eigen::Index r = 0; r < m; ++r)
                design(r, static_cast<Eigen::Index>(c) + 1) =
                    monomial_value(exponents[c], samples.states.row(r).transpose());

        double ridge = opts.ridge;
        if (ridge == 0.0) {
            const auto qr = design.colPivHouseholderQr();
            if (qr.rank() < k) {
                if (!opts.rank_fallback)
                    throw std::runtime_error("fit: rank-deficient design for component " +
                                             std::to_string(i) +
                                             "; increase ridge or reduce degree");
                ridge = kFallbackRidge;
                if (opts.warnings)
                    opts.warnings->push_back("component " + std::to_string(i) +
                                             ": rank-deficient design, refit with ridge 1e-8");
            }
        }
        Eigen::VectorXd theta = solve_ls(design, samples.derivs.col(i), ridge);

        if ((opts.eps_constraint == EpsConstraint::NonPositive && theta[0] > 0.0) ||
            (opts.eps_constraint == EpsConstraint::NonNegative && theta[0] < 0.0)) {
            // Clamp the self term at zero and refit the cross terms alone.
            Eigen::VectorXd cross =
                solve_ls(design.rightCols(k - 1), samples.derivs.col(i), ridge);
            theta.setZero();
            theta.tail(k - 1) = cross;
            if (opts.warnings)
                opts.warnings->push_back("component " + std::to_string(i) +
                                         ": eps clamped to 0 by sign constraint");
        }

        eps[i] = theta[0];
        auto& comp = components[static_cast<size_t>(i)];
        for (size_t c = 0; c < exponents.size(); ++c)
            comp.push_back({exponents[c], theta[static_cast<Eigen::Index>(c) + 1]});
    }
    return PolyVectorField(n, degree, opts.basis_mode, std::move(eps), std::move(components),
                           std::move(domain), opts.scaling);
}

DegreeSelection select_degree(const SeriesFrame& train, const std::vector<int>& degrees,
                              const EvalProtocol& protocol, const FitOptions& opts) {
    validate_frame(train);
    if (degrees.empty()) throw std::invalid_argument("select_degree: empty degree range");

    std::vector<DegreeTableRow> table;
    for (int degree : degrees) {
        DegreeTableRow row;
        row.degree = degree;
        try {
            EvalReport report = walk_forward(
                train, protocol.test_len,
                [&](const SeriesFrame& window) {
                    return fit(estimate_derivatives(window), degree, opts);
                },
                [&](const PolyVectorField& model, const SeriesFrame& window) {
                    return advance(model, window.values.bottomRows(1).transpose(), window.dt,
                                   protocol.ds_step);
                },
                "DS(" + std::to_string(degree) + ")");
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
    if (!std::isfinite(best))
        throw std::runtime_error("select_degree: every candidate degree failed");

    int best_degree = -1;
    for (const auto& row : table) {   // degrees are scanned in the given order;
        if (!row.failure.empty()) continue;
        if (row.total_error <= best + kTieAbs + kTieRel * best) {
            if (best_degree < 0 || row.degree < best_degree) best_degree = row.degree;
        }
    }

    DegreeSelection selection{fit(estimate_derivatives(train), best_degree, opts), best_degree,
                              std::move(table)};
    return selection;
}

std::string degree_table_text(const std::vector<DegreeTableRow>& table,
                              const std::vector<std::string>& variable_names) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Degree";
    for (const auto& v : variable_names) out << std::setw(14) << v;
    out << "Total\n";
    for (const auto& row : table) {
        out << std::left << std::setw(10) << row.degree;
        if (!row.failure.empty()) {
            out << "failed: " << row.failure << "\n";
            continue;
        }
        out << std::fixed << std::setprecision(6);
        for (Eigen::Index j = 0; j < row.per_variable.size(); ++j)
            out << std::setw(14) << row.per_variable[j];
        out << row.total_error << "\n";
        out << std::defaultfloat << std::setprecision(6);
    }
    return out.str();
}

}  // namespace trendflow
