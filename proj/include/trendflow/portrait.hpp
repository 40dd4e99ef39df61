#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "trendflow/flow.hpp"
#include "trendflow/poly_field.hpp"

namespace trendflow {

struct PortraitOptions {
    int seed_grid = 20;              // Newton seeds per axis
    int newton_max_iter = 50;
    double newton_tol = 1e-10;       // field norm at an accepted root
    double dedup_radius = 1e-6;
    double hyperbolicity_tol = 1e-8;
    double fixed_point_tol = 1e-8;   // residual allowed by classify_fixed_point
    int nullcline_scan = 4096;       // subintervals of the 1-D cross-check scan
    double separatrix_offset = 1e-6;
    double separatrix_step = 0.005;
    double separatrix_horizon = 200.0;
    int separatrix_stride = 10;
    IntegrationOptions integration;  // basin labeling and trending sweeps
    std::vector<std::string>* diagnostics = nullptr;   // skipped-seed notes land here
};

enum class StabilityClass {
    AttractorNode,
    SpiralAttractor,
    RepellerNode,
    SpiralRepeller,
    Saddle,
    NonHyperbolic
};

std::string to_string(StabilityClass cls);

struct FixedPointRecord {
    Eigen::VectorXd location;
    double residual = 0.0;             // field norm at the location
    Eigen::VectorXcd eigenvalues;      // of the Jacobian there
    StabilityClass cls = StabilityClass::NonHyperbolic;
    bool inside_domain = true;         // relative to the model's own domain

    bool attracting() const {
        return cls == StabilityClass::AttractorNode || cls == StabilityClass::SpiralAttractor;
    }
};

// Newton iteration from a uniform seed grid over the bounded box, followed in
// 2-D (both eps nonzero) by a nullcline-intersection cross-check: a
// sign-change scan of x + V1(y(x))/eps1 along y(x) = -V2(x)/eps2. The origin
// is always reported. Results are deduplicated and sorted by coordinates.
std::vector<FixedPointRecord> find_fixed_points(const PolyVectorField& model, const Domain& box,
                                                const PortraitOptions& opts = {});

// The 2-D nullcline oracle on its own; an independent route to the planar
// fixed points.
std::vector<Eigen::Vector2d> nullcline_fixed_points(const PolyVectorField& model,
                                                    const Domain& box,
                                                    const PortraitOptions& opts = {});

// Eigenvalue classification at a point already known to be stationary
// (residual below opts.fixed_point_tol, else this throws).
FixedPointRecord classify_fixed_point(const PolyVectorField& model, const Eigen::VectorXd& point,
                                      const PortraitOptions& opts = {});

// Grid labels: >= 0 converged to that fixed-point index, -1 escaped,
// -2 undecided within the horizon.
struct BasinMap {
    Domain box;
    int grid = 0;   // samples per axis
    struct Sample {
        Eigen::VectorXd point;
        int label = -2;
    };
    std::vector<Sample> samples;
};

struct Separatrix {
    int saddle_index = 0;   // into the fixed-point list
    std::vector<Eigen::VectorXd> points;
};

// Labels every grid sample by trajectory termination and, for each planar
// saddle, traces its stable manifold by integrating the reversed field from
// two seeds offset along the stable eigenvector.
std::pair<BasinMap, std::vector<Separatrix>> basin_and_separatrix(
    const PolyVectorField& model, const Domain& box, int grid,
    const std::vector<FixedPointRecord>& fixed_points, const PortraitOptions& opts = {});

struct TrendingReport {
    Domain box;
    int grid = 0;
    std::vector<BasinMap::Sample> samples;
    long converged = 0;
    long escaped = 0;
    long undecided = 0;
    bool trending = false;                    // no undecided samples
    std::vector<std::string> theorem_notes;   // analytic shortcuts that applied
    std::vector<FixedPointRecord> fixed_points;
};

// Integrates every grid sample and tallies converged / escaped / undecided.
// When an analytic trending condition holds (all eps >= 0, or the planar form
// with V >= 0 across the box), the report notes "trending by cited theorem"
// while still carrying the numeric sweep.
TrendingReport trending_check(const PolyVectorField& model, const Domain& box, int grid,
                              const PortraitOptions& opts = {});

std::string trending_json(const TrendingReport& report,
                          const nlohmann::json& provenance = nlohmann::json::object());

// Resolves how a printed planar quartic coefficient table is to be read when
// its quadratic cross term is typeset with a leading minus: builds the model
// under both readings, and keeps the one whose portrait shows three fixed
// points in the box (spiral-attractor origin, a saddle, and an attractor).
struct SignResolution {
    PolyVectorField model;
    std::string convention;   // "direct" or "negated-quadratic"
    std::vector<FixedPointRecord> fixed_points;
};

SignResolution resolve_quadratic_sign(double eps1, double eps2, const std::vector<double>& v,
                                      const std::vector<double>& w, const Domain& box,
                                      const PortraitOptions& opts = {});

struct ExportOptions {
    int grid = 20;                                // field samples per axis
    std::vector<Eigen::VectorXd> trajectory_seeds;  // empty = automatic picks
    bool with_trending = false;
    int trending_grid = 21;
    bool svg = true;
    std::string model_ref;
    nlohmann::json provenance = nlohmann::json::object();
    PortraitOptions portrait;
};

struct PortraitExport {
    std::string json_text;
    std::string svg_text;   // empty when skipped
    std::string notice;     // set when the SVG was skipped (n > 3)
};

// Samples the field on a grid and assembles fixed points, nullclines (2-D),
// separatrices, and representative trajectories into portrait JSON plus a
// standalone SVG (single panel for n = 2, three coordinate-plane projections
// for n = 3, JSON only above that).
PortraitExport export_portrait(const PolyVectorField& model, const Domain& box,
                               const ExportOptions& opts = {});

}  // namespace trendflow
