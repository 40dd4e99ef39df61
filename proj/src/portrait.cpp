#include "trendflow/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "trendflow/io_util.hpp"
#include "trendflow/svg.hpp"

namespace trendflow {

namespace {

Eigen::VectorXd linspace(double lo, double hi, int count) {
    Eigen::VectorXd v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

// Row-major sweep over an n-dimensional grid with `per_axis` points per axis.
void for_each_grid_point(const Domain& box, int per_axis,
                         const std::function<void(const Eigen::VectorXd&)>& visit) {
    const int n = static_cast<int>(box.lower.size());
    std::vector<Eigen::VectorXd> axes;
    for (int i = 0; i < n; ++i) axes.push_back(linspace(box.lower[i], box.upper[i], per_axis));

    std::vector<int> idx(static_cast<size_t>(n), 0);
    Eigen::VectorXd point(n);
    while (true) {
        for (int i = 0; i < n; ++i) point[i] = axes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
        visit(point);
        int axis = n - 1;
        while (axis >= 0) {
            if (++idx[static_cast<size_t>(axis)] < per_axis) break;
            idx[static_cast<size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
}

// Newton iteration on the field; returns true when it lands on a root with
// residual below tol.
bool newton_root(const PolyVectorField& model, Eigen::VectorXd& point,
                 const PortraitOptions& opts) {
    const double huge = 1e8;
    for (int it = 0; it < opts.newton_max_iter; ++it) {
        const Eigen::VectorXd f = model.evaluate(point);
        if (f.norm() < opts.newton_tol) return true;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(model.jacobian(point));
        if (!lu.isInvertible()) return false;   // singular Jacobian: skip this seed
        point -= lu.solve(f);
        if (!point.allFinite() || point.norm() > huge) return false;
    }
    return model.evaluate(point).norm() < opts.newton_tol;
}

// Cross part of component i: everything except the eps_i * x_i self term.
double cross_term(const PolyVectorField& model, int i, const Eigen::VectorXd& state) {
    return model.evaluate(state)[i] - model.eps()[i] * state[i];
}

PolyVectorField negate_field(const PolyVectorField& model) {
    std::vector<std::vector<Monomial>> comps = model.components();
    for (auto& comp : comps)
        for (auto& m : comp) m.coeff = -m.coeff;
    return PolyVectorField(model.dimension(), model.degree(), model.basis_mode(), -model.eps(),
                           std::move(comps), model.domain(), model.scaling());
}

bool inside_box(const Domain& box, const Eigen::VectorXd& p, double slack) {
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] < box.lower[i] - slack || p[i] > box.upper[i] + slack) return false;
    return true;
}

struct EigenDecomposition {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
};

EigenDecomposition sorted_eigen(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
    Eigen::VectorXcd values = solver.eigenvalues();
    Eigen::MatrixXcd vectors = solver.eigenvectors();
    std::vector<Eigen::Index> order(static_cast<size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (values[a].real() != values[b].real()) return values[a].real() < values[b].real();
        return values[a].imag() < values[b].imag();
    });
    EigenDecomposition out;
    out.values.resize(values.size());
    out.vectors.resize(vectors.rows(), vectors.cols());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out.values[i] = values[order[static_cast<size_t>(i)]];
        out.vectors.col(i) = vectors.col(order[static_cast<size_t>(i)]);
    }
    return out;
}

}  // namespace

std::string to_string(StabilityClass cls) {
    switch (cls) {
        case StabilityClass::AttractorNode: return "attractor-node";
        case StabilityClass::SpiralAttractor: return "spiral-attractor";
        case StabilityClass::RepellerNode: return "repeller-node";
        case StabilityClass::SpiralRepeller: return "spiral-repeller";
        case StabilityClass::Saddle: return "saddle";
        case StabilityClass::NonHyperbolic: return "non-hyperbolic";
    }
    return "unknown";
}

FixedPointRecord classify_fixed_point(const PolyVectorField& model, const Eigen::VectorXd& point,
                                      const PortraitOptions& opts) {
    if (point.size() != model.dimension())
        throw std::invalid_argument("classify_fixed_point: wrong dimension");
    FixedPointRecord record;
    record.location = point;
    record.residual = model.evaluate(point).norm();
    if (record.residual >= opts.fixed_point_tol)
        throw std::invalid_argument("classify_fixed_point: residual " +
                                    format_double(record.residual) +
                                    " exceeds the fixed-point tolerance (not a fixed point)");

    record.eigenvalues = sorted_eigen(model.jacobian(point)).values;

    bool any_small = false, any_pos = false, any_neg = false, any_complex = false;
    for (Eigen::Index i = 0; i < record.eigenvalues.size(); ++i) {
        const auto& ev = record.eigenvalues[i];
        if (std::abs(ev.real()) < opts.hyperbolicity_tol) any_small = true;
        if (ev.real() > 0) any_pos = true;
        if (ev.real() < 0) any_neg = true;
        if (std::abs(ev.imag()) > 1e-10 * (1.0 + std::abs(ev))) any_complex = true;
    }
    if (any_small)
        record.cls = StabilityClass::NonHyperbolic;
    else if (any_pos && any_neg)
        record.cls = StabilityClass::Saddle;
    else if (any_neg)
        record.cls = any_complex ? StabilityClass::SpiralAttractor : StabilityClass::AttractorNode;
    else
        record.cls = any_complex ? StabilityClass::SpiralRepeller : StabilityClass::RepellerNode;

    record.inside_domain = model.domain().contains(point);
    return record;
}

std::vector<Eigen::Vector2d> nullcline_fixed_points(const PolyVectorField& model,
                                                    const Domain& box,
                                                    const PortraitOptions& opts) {
    if (model.dimension() != 2)
        throw std::invalid_argument("nullcline_fixed_points: planar models only");
    const double eps1 = model.eps()[0], eps2 = model.eps()[1];
    if (eps1 == 0.0 || eps2 == 0.0)
        throw std::invalid_argument("nullcline_fixed_points: needs nonzero eps");
    validate_domain(box, 2);
    if (!box.bounded()) throw std::invalid_argument("nullcline_fixed_points: box must be bounded");

    // y on the second nullcline, then the first nullcline's defect in x.
    auto y_of_x = [&](double x) {
        Eigen::Vector2d s(x, 0.0);
        return -cross_term(model, 1, s) / eps2;
    };
    auto defect = [&](double x) {
        Eigen::Vector2d s(0.0, y_of_x(x));
        return x + cross_term(model, 0, s) / eps1;
    };

    std::vector<double> roots;
    const double lo = box.lower[0], hi = box.upper[0];
    const int cells = std::max(16, opts.nullcline_scan);
    double prev_x = lo, prev_g = defect(lo);
    if (prev_g == 0.0) roots.push_back(lo);
    for (int k = 1; k <= cells; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / cells;
        const double g = defect(x);
        if (std::isfinite(g)) {
            if (g == 0.0) {
                roots.push_back(x);
            } else if (std::isfinite(prev_g) && prev_g != 0.0 && (g < 0) != (prev_g < 0)) {
                double a = prev_x, b = x, ga = prev_g;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (a + b);
                    const double gm = defect(mid);
                    if (gm == 0.0) {
                        a = b = mid;
                        break;
                    }
                    if ((gm < 0) == (ga < 0)) {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                roots.push_back(0.5 * (a + b));
            }
        }
        prev_x = x;
        prev_g = g;
    }

    std::vector<Eigen::Vector2d> points;
    for (double x : roots) {
        const double y = y_of_x(x);
        if (std::isfinite(y) && y >= box.lower[1] - 1e-9 && y <= box.upper[1] + 1e-9)
            points.emplace_back(x, y);
    }
    return points;
}

std::vector<FixedPointRecord> find_fixed_points(const PolyVectorField& model, const Domain& box,
                                                const PortraitOptions& opts) {
    const int n = model.dimension();
    validate_domain(box, n);
    if (!box.bounded())
        throw std::invalid_argument("find_fixed_points: box must be bounded (clip the domain)");
    if (opts.seed_grid < 2) throw std::invalid_argument("find_fixed_points: seed_grid must be >= 2");

    std::vector<Eigen::VectorXd> roots;
    auto add_root = [&](const Eigen::VectorXd& candidate) {
        if (!inside_box(box, candidate, 1e-9)) return;
        for (const auto& existing : roots)
            if ((existing - candidate).norm() < opts.dedup_radius) return;
        roots.push_back(candidate);
    };

    // The origin is a root by construction (no constant monomials).
    add_root(Eigen::VectorXd::Zero(n));

    long skipped = 0;
    for_each_grid_point(box, opts.seed_grid, [&](const Eigen::VectorXd& seed) {
        Eigen::VectorXd point = seed;
        if (newton_root(model, point, opts))
            add_root(point);
        else
            ++skipped;
    });
    if (skipped > 0 && opts.diagnostics)
        opts.diagnostics->push_back(std::to_string(skipped) +
                                    " Newton seeds skipped (singular Jacobian or divergence)");

    // Planar cross-check along the nullclines; catches roots whose Newton
    // basins the seed grid misses.
    if (n == 2 && model.eps()[0] != 0.0 && model.eps()[1] != 0.0) {
        for (const auto& candidate : nullcline_fixed_points(model, box, opts)) {
            Eigen::VectorXd point = candidate;
            if (newton_root(model, point, opts))
                add_root(point);
            else if (model.evaluate(candidate).norm() < opts.newton_tol)
                add_root(candidate);
        }
    }

    std::sort(roots.begin(), roots.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return a[i] < b[i];
        return false;
    });

    PortraitOptions classify_opts = opts;
    classify_opts.fixed_point_tol = std::max(opts.fixed_point_tol, 10.0 * opts.newton_tol);
    std::vector<FixedPointRecord> records;
    for (const auto& root : roots)
        records.push_back(classify_fixed_point(model, root, classify_opts));
    return records;
}

namespace {

std::vector<Separatrix> trace_separatrices(const PolyVectorField& model, const Domain& box,
                                           const std::vector<FixedPointRecord>& fixed_points,
                                           const PortraitOptions& opts) {
    std::vector<Separatrix> out;
    if (model.dimension() != 2) return out;

    const PolyVectorField reversed = negate_field(model);

    Domain trace_box = box;
    trace_box.escape_margin = 0.0;

    for (size_t idx = 0; idx < fixed_points.size(); ++idx) {
        const auto& fp = fixed_points[idx];
        if (fp.cls != StabilityClass::Saddle) continue;

        // Stop targets exclude the saddle itself: the seeds start within its
        // convergence radius and must flow away along the manifold.
        std::vector<Eigen::VectorXd> fp_locations;
        for (size_t other = 0; other < fixed_points.size(); ++other)
            if (other != idx) fp_locations.push_back(fixed_points[other].location);

        const EigenDecomposition eig = sorted_eigen(model.jacobian(fp.location));
        // Stable direction: the eigenvector of the negative eigenvalue
        // (sorted first for a planar saddle).
        const Eigen::Vector2d stable = eig.vectors.col(0).real().normalized();

        for (int side : {-1, +1}) {
            Eigen::VectorXd seed =
                fp.location + static_cast<double>(side) * opts.separatrix_offset *
                                  Eigen::VectorXd(stable);
            if (!trace_box.contains(seed)) continue;

            IntegrationOptions iopts;
            iopts.step = opts.separatrix_step;
            iopts.horizon = opts.separatrix_horizon;
            iopts.path_stride = opts.separatrix_stride;
            iopts.convergence_radius = opts.integration.convergence_radius;
            iopts.field_tol = opts.integration.field_tol;
            TrajectoryResult branch = trajectory(reversed, seed, trace_box, fp_locations, iopts);

            Separatrix sep;
            sep.saddle_index = static_cast<int>(idx);
            sep.points = branch.path;
            // Clip the exit point back onto the box edge.
            if (branch.termination == Termination::Escaped && !branch.overflow &&
                sep.points.size() >= 2) {
                Eigen::VectorXd& last = sep.points.back();
                const Eigen::VectorXd& prev = sep.points[sep.points.size() - 2];
                double t_clip = 1.0;
                for (Eigen::Index i = 0; i < 2; ++i) {
                    const double d = last[i] - prev[i];
                    if (d == 0.0) continue;
                    if (last[i] > box.upper[i]) t_clip = std::min(t_clip, (box.upper[i] - prev[i]) / d);
                    if (last[i] < box.lower[i]) t_clip = std::min(t_clip, (box.lower[i] - prev[i]) / d);
                }
                if (t_clip < 1.0 && t_clip >= 0.0) last = prev + t_clip * (last - prev);
            }
            if (sep.points.size() >= 2) out.push_back(std::move(sep));
        }
    }
    return out;
}

}  // namespace

std::pair<BasinMap, std::vector<Separatrix>> basin_and_separatrix(
    const PolyVectorField& model, const Domain& box, int grid,
    const std::vector<FixedPointRecord>& fixed_points, const PortraitOptions& opts) {
    validate_domain(box, model.dimension());
    if (!box.bounded()) throw std::invalid_argument("basin_and_separatrix: box must be bounded");
    if (grid < 2) throw std::invalid_argument("basin_and_separatrix: grid must be >= 2");

    std::vector<Eigen::VectorXd> fp_locations;
    for (const auto& fp : fixed_points) fp_locations.push_back(fp.location);

    IntegrationOptions iopts = opts.integration;
    iopts.path_stride = 0;

    BasinMap map;
    map.box = box;
    map.grid = grid;
    for_each_grid_point(box, grid, [&](const Eigen::VectorXd& start) {
        const TrajectoryResult result = trajectory(model, start, box, fp_locations, iopts);
        int label = -2;
        if (result.termination == Termination::Converged)
            label = result.fixed_point;
        else if (result.termination == Termination::Escaped)
            label = -1;
        map.samples.push_back({start, label});
    });

    return {std::move(map), trace_separatrices(model, box, fixed_points, opts)};
}

TrendingReport trending_check(const PolyVectorField& model, const Domain& box, int grid,
                              const PortraitOptions& opts) {
    validate_domain(box, model.dimension());
    if (!box.bounded()) throw std::invalid_argument("trending_check: box must be bounded");
    if (grid < 2) throw std::invalid_argument("trending_check: grid must be >= 2");

    TrendingReport report;
    report.box = box;
    report.grid = grid;
    report.fixed_points = find_fixed_points(model, box, opts);

    std::vector<Eigen::VectorXd> fp_locations;
    for (const auto& fp : report.fixed_points) fp_locations.push_back(fp.location);

    IntegrationOptions iopts = opts.integration;
    iopts.path_stride = 0;

    bool cross_nonneg = true;
    for_each_grid_point(box, grid, [&](const Eigen::VectorXd& start) {
        const TrajectoryResult result = trajectory(model, start, box, fp_locations, iopts);
        int label = -2;
        if (result.termination == Termination::Converged) {
            label = result.fixed_point;
            ++report.converged;
        } else if (result.termination == Termination::Escaped) {
            label = -1;
            ++report.escaped;
        } else {
            ++report.undecided;
        }
        report.samples.push_back({start, label});
        for (int i = 0; i < model.dimension(); ++i)
            if (cross_term(model, i, start) < 0.0) cross_nonneg = false;
    });
    report.trending = report.undecided == 0;

    if ((model.eps().array() >= 0.0).all())
        report.theorem_notes.push_back("trending by cited theorem (eps >= 0)");
    if (model.dimension() == 2 && cross_nonneg && (box.lower.array() >= 0.0).all())
        report.theorem_notes.push_back("trending by cited theorem (n = 2, V >= 0 on the box)");
    return report;
}

std::string trending_json(const TrendingReport& report, const nlohmann::json& provenance) {
    nlohmann::json doc;
    doc["kind"] = "trending_report";
    doc["provenance"] = provenance;
    nlohmann::json box;
    nlohmann::json lower = nlohmann::json::array(), upper = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.box.lower.size(); ++i) {
        lower.push_back(format_double(report.box.lower[i]));
        upper.push_back(format_double(report.box.upper[i]));
    }
    box["lower"] = lower;
    box["upper"] = upper;
    doc["box"] = box;
    doc["grid"] = report.grid;
    doc["counts"] = {{"converged", report.converged},
                     {"escaped", report.escaped},
                     {"undecided", report.undecided}};
    doc["trending_within_horizon"] = report.trending;
    doc["theorem_notes"] = report.theorem_notes;
    nlohmann::json fps = nlohmann::json::array();
    for (const auto& fp : report.fixed_points) {
        nlohmann::json rec;
        nlohmann::json loc = nlohmann::json::array();
        for (Eigen::Index i = 0; i < fp.location.size(); ++i)
            loc.push_back(format_double(fp.location[i]));
        rec["location"] = loc;
        rec["class"] = to_string(fp.cls);
        fps.push_back(rec);
    }
    doc["fixed_points"] = fps;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : report.samples) {
        nlohmann::json rec;
        nlohmann::json pt = nlohmann::json::array();
        for (Eigen::Index i = 0; i < s.point.size(); ++i) pt.push_back(format_double(s.point[i]));
        rec["point"] = pt;
        rec["outcome"] =
            s.label >= 0 ? "converged" : (s.label == -1 ? "escaped" : "undecided");
        if (s.label >= 0) rec["fixed_point"] = s.label;
        samples.push_back(rec);
    }
    doc["samples"] = samples;
    return doc.dump(2) + "\n";
}

SignResolution resolve_quadratic_sign(double eps1, double eps2, const std::vector<double>& v,
                                      const std::vector<double>& w, const Domain& box,
                                      const PortraitOptions& opts) {
    auto matches_expected_portrait = [&](const std::vector<FixedPointRecord>& fps) {
        if (fps.size() < 3) return false;
        bool origin_spiral = false, has_saddle = false, has_positive_attractor = false;
        for (const auto& fp : fps) {
            const bool at_origin = fp.location.norm() < 1e-9;
            if (at_origin && fp.cls == StabilityClass::SpiralAttractor) origin_spiral = true;
            if (fp.cls == StabilityClass::Saddle) has_saddle = true;
            if (!at_origin && fp.attracting()) has_positive_attractor = true;
        }
        return origin_spiral && has_saddle && has_positive_attractor;
    };

    PolyVectorField direct = make_planar_field(eps1, eps2, v, w, false);
    PolyVectorField negated = make_planar_field(eps1, eps2, v, w, true);
    const auto fps_direct = find_fixed_points(direct, box, opts);
    const auto fps_negated = find_fixed_points(negated, box, opts);
    const bool direct_ok = matches_expected_portrait(fps_direct);
    const bool negated_ok = matches_expected_portrait(fps_negated);

    if (direct_ok == negated_ok)
        throw std::runtime_error(
            direct_ok ? "resolve_quadratic_sign: both readings show the expected portrait"
                      : "resolve_quadratic_sign: neither reading shows the expected portrait");
    if (direct_ok) return {std::move(direct), "direct", fps_direct};
    return {std::move(negated), "negated-quadratic", fps_negated};
}

// --- portrait export -------------------------------------------------------

namespace {

nlohmann::json point_json(const Eigen::VectorXd& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(format_double(p[i]));
    return arr;
}

// Nullcline polyline sampled along the free axis; split into segments where
// the dependent coordinate leaves the box.
std::vector<std::vector<Eigen::VectorXd>> nullcline_polylines(const PolyVectorField& model,
                                                              const Domain& box, int component,
                                                              int samples) {
    std::vector<std::vector<Eigen::VectorXd>> segments;
    const double eps_i = model.eps()[component];
    if (eps_i == 0.0) return segments;
    const int free_axis = component == 0 ? 1 : 0;
    const int dep_axis = component;

    std::vector<Eigen::VectorXd> current;
    const Eigen::VectorXd ticks = linspace(box.lower[free_axis], box.upper[free_axis], samples);
    for (int k = 0; k < samples; ++k) {
        Eigen::Vector2d probe = Eigen::Vector2d::Zero();
        probe[free_axis] = ticks[k];
        const double dep = -cross_term(model, component, probe) / eps_i;
        Eigen::VectorXd point(2);
        point[free_axis] = ticks[k];
        point[dep_axis] = dep;
        if (std::isfinite(dep) && dep >= box.lower[dep_axis] && dep <= box.upper[dep_axis]) {
            current.push_back(point);
        } else if (current.size() >= 2) {
            segments.push_back(std::move(current));
            current.clear();
        } else {
            current.clear();
        }
    }
    if (current.size() >= 2) segments.push_back(std::move(current));
    return segments;
}

struct PanelMap {
    double x0, y0, w, h;   // screen rectangle
    double lox, hix, loy, hiy;
    int ax, ay;            // world axes drawn on this panel

    std::pair<double, double> to_screen(const Eigen::VectorXd& p) const {
        const double sx = x0 + (p[ax] - lox) / (hix - lox) * w;
        const double sy = y0 + (hiy - p[ay]) / (hiy - loy) * h;
        return {sx, sy};
    }
};

void draw_panel(SvgCanvas& canvas, const PanelMap& map, const PolyVectorField& model,
                const Domain& box, const std::vector<FixedPointRecord>& fps,
                const std::vector<Separatrix>& separatrices,
                const std::vector<std::pair<int, std::vector<std::vector<Eigen::VectorXd>>>>&
                    nullclines,
                const std::vector<TrajectoryResult>& trajectories, int quiver_grid,
                const Eigen::VectorXd& slice) {
    canvas.rect(map.x0, map.y0, map.w, map.h, "none", "#888888");
    canvas.text(map.x0 + 4, map.y0 + map.h + 16, "x" + std::to_string(map.ax + 1), 12);
    canvas.text(map.x0 - 16, map.y0 + 12, "x" + std::to_string(map.ay + 1), 12);

    // quiver on the panel plane through `slice`; arrow length scales with
    // the screen-space field norm, the largest filling one grid cell
    const Eigen::VectorXd xt = linspace(map.lox, map.hix, quiver_grid);
    const Eigen::VectorXd yt = linspace(map.loy, map.hiy, quiver_grid);
    struct Arrow {
        double sx, sy, dx, dy, norm;
    };
    std::vector<Arrow> arrows;
    double max_norm = 0.0;
    for (int i = 0; i < quiver_grid; ++i) {
        for (int j = 0; j < quiver_grid; ++j) {
            Eigen::VectorXd p = slice;
            p[map.ax] = xt[i];
            p[map.ay] = yt[j];
            const Eigen::VectorXd f = model.evaluate(p);
            auto [sx, sy] = map.to_screen(p);
            const double dx = f[map.ax] / (map.hix - map.lox) * map.w;
            const double dy = -f[map.ay] / (map.hiy - map.loy) * map.h;
            const double norm = std::hypot(dx, dy);
            arrows.push_back({sx, sy, dx, dy, norm});
            max_norm = std::max(max_norm, norm);
        }
    }
    const double cell = map.w / static_cast<double>(quiver_grid);
    for (const auto& a : arrows) {
        if (max_norm == 0.0 || a.norm == 0.0) continue;
        const double len = 0.85 * cell * (a.norm / max_norm);
        const double ex = a.sx + a.dx / a.norm * len;
        const double ey = a.sy + a.dy / a.norm * len;
        canvas.line(a.sx, a.sy, ex, ey, "#b0b0b0", 1.0);
        canvas.circle(ex, ey, 1.2, "#b0b0b0");
    }

    for (const auto& [component, segs] : nullclines) {
        const std::string color = component == 0 ? "#1f77b4" : "#2ca02c";
        for (const auto& seg : segs) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : seg) pts.push_back(map.to_screen(p));
            canvas.polyline(pts, color, 1.5);
        }
    }

    for (const auto& t : trajectories) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : t.path)
            if (inside_box(box, p, 0.0)) pts.push_back(map.to_screen(p));
        canvas.polyline(pts, "#9467bd", 1.2);
    }

    for (const auto& sep : separatrices) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : sep.points) pts.push_back(map.to_screen(p));
        canvas.polyline(pts, "#d62728", 1.5, "6,4");
    }

    for (const auto& fp : fps) {
        auto [sx, sy] = map.to_screen(fp.location);
        switch (fp.cls) {
            case StabilityClass::AttractorNode:
                canvas.circle(sx, sy, 5, "#000000");
                break;
            case StabilityClass::SpiralAttractor:
                canvas.circle(sx, sy, 5, "#000000");
                canvas.circle(sx, sy, 8, "none", "#000000");
                break;
            case StabilityClass::Saddle:
                canvas.circle(sx, sy, 5, "#ff7f0e", "#000000");
                break;
            case StabilityClass::RepellerNode:
            case StabilityClass::SpiralRepeller:
                canvas.circle(sx, sy, 5, "#ffffff", "#000000");
                break;
            case StabilityClass::NonHyperbolic:
                canvas.circle(sx, sy, 5, "#cccccc", "#000000");
                break;
        }
    }
}

}  // namespace

PortraitExport export_portrait(const PolyVectorField& model, const Domain& box,
                               const ExportOptions& opts) {
    const int n = model.dimension();
    validate_domain(box, n);
    if (!box.bounded()) throw std::invalid_argument("export_portrait: box must be bounded");
    if (opts.grid < 2) throw std::invalid_argument("export_portrait: grid must be >= 2");

    const std::vector<FixedPointRecord> fps = find_fixed_points(model, box, opts.portrait);
    const std::vector<Separatrix> separatrices =
        trace_separatrices(model, box, fps, opts.portrait);

    std::vector<std::pair<int, std::vector<std::vector<Eigen::VectorXd>>>> nullclines;
    if (n == 2)
        for (int component = 0; component < 2; ++component) {
            auto segs = nullcline_polylines(model, box, component, 256);
            if (!segs.empty()) nullclines.emplace_back(component, std::move(segs));
        }

    // representative trajectories
    std::vector<Eigen::VectorXd> seeds = opts.trajectory_seeds;
    if (seeds.empty()) {
        const std::vector<std::vector<double>> fractions = {
            {0.5, 0.5}, {0.25, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.75, 0.25}};
        for (const auto& frac : fractions) {
            Eigen::VectorXd seed(n);
            for (int i = 0; i < n; ++i) {
                const double f = frac[static_cast<size_t>(i % 2)];
                seed[i] = box.lower[i] + f * (box.upper[i] - box.lower[i]);
            }
            seeds.push_back(seed);
        }
    }
    std::vector<Eigen::VectorXd> fp_locations;
    for (const auto& fp : fps) fp_locations.push_back(fp.location);
    IntegrationOptions traj_opts = opts.portrait.integration;
    traj_opts.path_stride = 25;
    std::vector<TrajectoryResult> trajectories;
    for (const auto& seed : seeds)
        if (box.contains(seed))
            trajectories.push_back(trajectory(model, seed, box, fp_locations, traj_opts));

    // --- JSON document
    nlohmann::json doc;
    doc["kind"] = "portrait";
    doc["model_ref"] = opts.model_ref;
    doc["provenance"] = opts.provenance;
    nlohmann::json jbox;
    jbox["lower"] = point_json(box.lower);
    jbox["upper"] = point_json(box.upper);
    doc["box"] = jbox;
    doc["grid"] = opts.grid;

    nlohmann::json field_samples = nlohmann::json::array();
    for_each_grid_point(box, opts.grid, [&](const Eigen::VectorXd& p) {
        nlohmann::json rec;
        rec["point"] = point_json(p);
        rec["field"] = point_json(model.evaluate(p));
        field_samples.push_back(std::move(rec));
    });
    doc["field_samples"] = field_samples;

    nlohmann::json jfps = nlohmann::json::array();
    for (const auto& fp : fps) {
        nlohmann::json rec;
        rec["location"] = point_json(fp.location);
        rec["residual"] = format_double(fp.residual);
        rec["class"] = to_string(fp.cls);
        nlohmann::json eigs = nlohmann::json::array();
        for (Eigen::Index i = 0; i < fp.eigenvalues.size(); ++i)
            eigs.push_back({{"re", format_double(fp.eigenvalues[i].real())},
                            {"im", format_double(fp.eigenvalues[i].imag())}});
        rec["eigenvalues"] = eigs;
        rec["inside_domain"] = fp.inside_domain;
        jfps.push_back(std::move(rec));
    }
    doc["fixed_points"] = jfps;

    nlohmann::json jnull = nlohmann::json::array();
    for (const auto& [component, segs] : nullclines)
        for (const auto& seg : segs) {
            nlohmann::json rec;
            rec["component"] = component;
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : seg) pts.push_back(point_json(p));
            rec["points"] = pts;
            jnull.push_back(std::move(rec));
        }
    doc["nullclines"] = jnull;

    nlohmann::json jsep = nlohmann::json::array();
    for (const auto& sep : separatrices) {
        nlohmann::json rec;
        rec["saddle_index"] = sep.saddle_index;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : sep.points) pts.push_back(point_json(p));
        rec["points"] = pts;
        jsep.push_back(std::move(rec));
    }
    doc["separatrices"] = jsep;

    nlohmann::json jtraj = nlohmann::json::array();
    for (size_t k = 0; k < trajectories.size(); ++k) {
        const auto& t = trajectories[k];
        nlohmann::json rec;
        rec["start"] = point_json(seeds[k]);
        rec["termination"] = t.termination == Termination::Converged
                                 ? "converged"
                                 : (t.termination == Termination::Escaped ? "escaped" : "horizon");
        nlohmann::json pts = nlohmann::json::array();
        for (size_t i = 0; i < t.path.size(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            row.push_back(format_double(t.times[i]));
            for (Eigen::Index j = 0; j < t.path[i].size(); ++j)
                row.push_back(format_double(t.path[i][j]));
            pts.push_back(std::move(row));
        }
        rec["points"] = pts;
        jtraj.push_back(std::move(rec));
    }
    doc["trajectories"] = jtraj;

    if (opts.with_trending) {
        const TrendingReport trend =
            trending_check(model, box, opts.trending_grid, opts.portrait);
        doc["trending_report"] = nlohmann::json::parse(trending_json(trend));
    } else {
        doc["trending_report"] = nullptr;
    }

    PortraitExport result;
    result.json_text = doc.dump(2) + "\n";

    // --- SVG
    if (!opts.svg) return result;
    if (n > 3) {
        result.notice = "SVG skipped: only 2-D and 3-D portraits are drawn";
        return result;
    }

    const double margin = 50.0, plot = 500.0;
    const int panels = n == 2 ? 1 : 3;
    SvgCanvas canvas(margin + panels * (plot + margin), plot + 2 * margin);
    const Eigen::VectorXd mid = 0.5 * (box.lower + box.upper);

    const std::vector<std::pair<int, int>> planes =
        n == 2 ? std::vector<std::pair<int, int>>{{0, 1}}
               : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}};
    for (int panel = 0; panel < panels; ++panel) {
        const auto [ax, ay] = planes[static_cast<size_t>(panel)];
        PanelMap map{margin + panel * (plot + margin),
                     margin,
                     plot,
                     plot,
                     box.lower[ax],
                     box.upper[ax],
                     box.lower[ay],
                     box.upper[ay],
                     ax,
                     ay};
        draw_panel(canvas, map, model, box, fps, separatrices, nullclines, trajectories,
                   std::min(opts.grid, 25), mid);
    }
    canvas.text(margin, margin - 16,
                "phase portrait (" + std::to_string(n) + "-D): filled = attractor, ring = spiral "
                "attractor, orange = saddle, white = repeller, dashed = separatrix",
                12);
    result.svg_text = canvas.str();
    return result;
}

}  // namespace trendflow
