#include "trendflow/flow.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "trendflow/io_util.hpp"

namespace trendflow {

namespace {

// Preallocated stage buffers; integration loops take millions of steps.
struct Rk4Workspace {
    Eigen::VectorXd k1, k2, k3, k4, stage;
    explicit Rk4Workspace(int n) : k1(n), k2(n), k3(n), k4(n), stage(n) {}
};

// One in-place RK4 step; returns false when the updated state is non-finite
// (a blown-up stage propagates into it).
bool rk4_step(const PolyVectorField& model, Eigen::VectorXd& state, double h, Rk4Workspace& ws) {
    model.evaluate_into(state, ws.k1);
    ws.stage = state + (h / 2.0) * ws.k1;
    model.evaluate_into(ws.stage, ws.k2);
    ws.stage = state + (h / 2.0) * ws.k2;
    model.evaluate_into(ws.stage, ws.k3);
    ws.stage = state + h * ws.k3;
    model.evaluate_into(ws.stage, ws.k4);
    state += (h / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
    return state.allFinite();
}

}  // namespace

Eigen::VectorXd advance(const PolyVectorField& model, Eigen::VectorXd state, double span,
                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
    if (!(span > 0.0)) throw std::invalid_argument("span must be positive");

    long n_steps = static_cast<long>(std::llround(span / h));
    if (n_steps < 0) n_steps = 0;
    double remainder = span - static_cast<double>(n_steps) * h;
    // Treat spans that are integer multiples of h (up to rounding) as exact,
    // so advancing a then b equals advancing a+b when both are multiples.
    if (std::abs(remainder) <= 1e-9 * h) {
        remainder = 0.0;
    } else if (remainder < 0.0) {
        --n_steps;
        remainder = span - static_cast<double>(n_steps) * h;
    }

    Rk4Workspace ws(model.dimension());
    for (long k = 0; k < n_steps; ++k) {
        if (!rk4_step(model, state, h, ws))
            throw std::runtime_error("integration blew up at t = " +
                                     format_double(static_cast<double>(k) * h) +
                                     " (non-finite state)");
    }
    if (remainder > 0.0) {
        if (!rk4_step(model, state, remainder, ws))
            throw std::runtime_error("integration blew up at t = " +
                                     format_double(static_cast<double>(n_steps) * h) +
                                     " (non-finite state)");
    }
    return state;
}

TrajectoryResult trajectory(const PolyVectorField& model, const Eigen::VectorXd& start,
                            const Domain& domain, const std::vector<Eigen::VectorXd>& fixed_points,
                            const IntegrationOptions& opts) {
    validate_domain(domain, model.dimension());
    if (start.size() != model.dimension()) throw std::invalid_argument("start has wrong dimension");
    if (!domain.contains(start)) throw std::invalid_argument("start is outside the domain");
    if (!(opts.step > 0.0)) throw std::invalid_argument("step h must be positive");

    TrajectoryResult result;
    result.final_state = start;
    auto record = [&](double t, const Eigen::VectorXd& s, bool force) {
        if (opts.path_stride <= 0 && !force) return;
        if (!force && opts.path_stride > 1 && (result.steps % opts.path_stride) != 0) return;
        if (!result.times.empty() && result.times.back() == t) return;   // already recorded
        result.times.push_back(t);
        result.path.push_back(s);
    };

    auto near_fixed_point = [&](const Eigen::VectorXd& s) -> int {
        for (size_t i = 0; i < fixed_points.size(); ++i)
            if ((s - fixed_points[i]).norm() < opts.convergence_radius) return static_cast<int>(i);
        return -1;
    };

    Eigen::VectorXd state = start;
    double t = 0.0;
    record(t, state, true);

    // Equilibrium start: converged before any step is taken.
    {
        const int fp = near_fixed_point(state);
        if (fp >= 0 && model.evaluate(state).norm() < opts.field_tol) {
            result.termination = Termination::Converged;
            result.fixed_point = fp;
            result.end_time = 0.0;
            result.final_state = state;
            return result;
        }
    }

    int settled = 0;
    int settled_fp = -1;
    Rk4Workspace ws(model.dimension());
    Eigen::VectorXd previous = state;
    Eigen::VectorXd field(model.dimension());
    while (t < opts.horizon) {
        previous = state;
        const bool ok = rk4_step(model, state, opts.step, ws);
        ++result.steps;
        t = static_cast<double>(result.steps) * opts.step;
        if (!ok) {
            result.termination = Termination::Escaped;
            result.overflow = true;
            result.escape_axis = -1;
            result.end_time = t;
            result.final_state = previous;   // last finite state
            record(t, previous, true);
            return result;
        }
        record(t, state, false);

        bool below = false;
        const int axis = domain.violated_axis(state, below);
        if (axis >= 0) {
            result.termination = Termination::Escaped;
            result.escape_axis = axis;
            result.escape_below = below;
            result.end_time = t;
            result.final_state = state;
            record(t, state, true);
            return result;
        }

        int fp = near_fixed_point(state);
        if (fp >= 0) {
            model.evaluate_into(state, field);
            if (field.norm() >= opts.field_tol) fp = -1;
        }
        if (fp >= 0) {
            if (fp == settled_fp || settled == 0) {
                settled_fp = fp;
                ++settled;
            } else {
                settled_fp = fp;
                settled = 1;
            }
            if (settled >= opts.settle_steps) {
                result.termination = Termination::Converged;
                result.fixed_point = fp;
                result.end_time = t;
                result.final_state = state;
                record(t, state, true);
                return result;
            }
        } else {
            settled = 0;
            settled_fp = -1;
        }
    }

    result.termination = Termination::Horizon;
    result.end_time = t;
    result.final_state = state;
    record(t, state, true);
    return result;
}

std::string trajectory_csv(const TrajectoryResult& result,
                           const std::vector<std::string>& variable_names) {
    std::ostringstream out;
    out << "time";
    for (const auto& name : variable_names) out << "," << name;
    out << "\n";
    for (size_t k = 0; k < result.path.size(); ++k) {
        out << format_double(result.times[k]);
        for (Eigen::Index j = 0; j < result.path[k].size(); ++j)
            out << "," << format_double(result.path[k][j]);
        out << "\n";
    }
    return out.str();
}

}  // namespace trendflow
