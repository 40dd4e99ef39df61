#pragma once

#include <Eigen/Dense>
#include <vector>

#include "trendflow/poly_field.hpp"

namespace trendflow {

struct IntegrationOptions {
    double step = 0.01;                 // RK4 step h
    double convergence_radius = 1e-4;   // distance to a supplied fixed point
    double field_tol = 1e-6;            // field norm at a converged state
    double horizon = 500.0;             // time budget before "undecided"
    int settle_steps = 10;              // consecutive steps satisfying both tests
    int path_stride = 1;                // record every k-th point; 0 = endpoints only
};

// One classical RK4 pass over `span`. The step count is round(span/h); a
// shortened final step absorbs any remainder. Throws std::runtime_error on a
// non-finite intermediate state, reporting the time reached.
Eigen::VectorXd advance(const PolyVectorField& model, Eigen::VectorXd state, double span,
                        double h);

enum class Termination { Converged, Escaped, Horizon };

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> path;
    Termination termination = Termination::Horizon;
    int fixed_point = -1;      // converged: index into the supplied list
    int escape_axis = -1;      // escaped: axis of the violated bound (-1 after overflow)
    bool escape_below = false;
    bool overflow = false;     // blow-up counted as escape, with diagnostics here
    double end_time = 0.0;
    Eigen::VectorXd final_state;
    long steps = 0;
};

// Integrates until the state settles at one of `fixed_points`, leaves
// `domain` (checked after each full step), or the horizon elapses.
TrajectoryResult trajectory(const PolyVectorField& model, const Eigen::VectorXd& start,
                            const Domain& domain, const std::vector<Eigen::VectorXd>& fixed_points,
                            const IntegrationOptions& opts = {});

// Writes a trajectory as CSV: a time column followed by one column per state
// variable.
std::string trajectory_csv(const TrajectoryResult& result,
                           const std::vector<std::string>& variable_names);

}  // namespace trendflow
