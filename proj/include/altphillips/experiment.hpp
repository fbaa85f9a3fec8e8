#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "altphillips/config.hpp"
#include "altphillips/csv.hpp"
#include "altphillips/freeboundary.hpp"
#include "altphillips/scaling.hpp"
#include "altphillips/solver.hpp"
#include "altphillips/version.hpp"

namespace ap {

struct HarnackEntry {
    std::array<double, 2> center{};
    double R = 0.0;
    double value = 0.0;
};

struct BlowupEntry {
    double r = 0.0;
    double distance = 0.0;
    std::array<double, 2> e{};
    double convexity_margin = 0.0;
    double monotonicity_min = 0.0;
};

/// Every measured quantity together with the radii and thresholds that
/// produced it; serialized verbatim into report.json.
struct ScalingReportData {
    std::optional<GrowthFit> growth;
    std::string growth_note;
    int growth_center_idx = -1;
    std::array<double, 2> growth_center{};

    std::vector<HarnackEntry> harnack;
    double harnack_max = 0.0;

    double hessian_tau = 0.0;
    HessianRatio hessian;

    int blowup_center_idx = -1;
    std::array<double, 2> blowup_center{};
    std::optional<std::array<double, 2>> blowup_normal;
    std::vector<BlowupEntry> blowups;
    double normal_angle_gap = std::numeric_limits<double>::quiet_NaN();
    std::string blowup_note;

    std::vector<double> oscillation_radii;
    std::vector<double> oscillations;

    double subharmonic = 0.0;
};

struct ExperimentResult {
    ExperimentConfig cfg;
    SolveResult solve;
    FreeBoundarySet fb;
    ScalingReportData scaling;
    EllipticityReport ellipticity;
};

namespace detail {

inline double dist_to_domain_boundary(const Grid& g, const std::array<double, 2>& x) {
    return g.distance_to_boundary(x);
}

/// Deterministic pick of the measurement center for the growth fit: the
/// boundary point deepest inside the domain, lowest index on ties.
inline int pick_growth_center(const Grid& g, const FreeBoundarySet& fb) {
    int best = -1;
    double depth = -1.0;
    for (const auto& p : fb.boundary) {
        const double d = dist_to_domain_boundary(g, p.x);
        if (d > depth + 1e-15) {
            depth = d;
            best = p.idx;
        }
    }
    return best;
}

/// Node-centering score: how far the local half-space profile implied by
/// the best positive neighbor sits from the node itself. Small scores mean
/// the free boundary passes essentially through the grid node, so the
/// rescaled field lines up with the node-centered comparison profile.
inline double node_centering_score(const ScalarField& u, const FreeBoundarySet& fb,
                                   const FreeBoundaryPoint& p, const Params& params,
                                   double c_gamma) {
    const Grid& g = u.grid;
    const int ix = g.ix_of(p.idx), iy = g.iy_of(p.idx);
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    const int ndirs = g.dim == 1 ? 2 : 4;
    double score = std::numeric_limits<double>::infinity();
    for (int d = 0; d < ndirs; ++d) {
        const int jx = ix + dx[d], jy = iy + dy[d];
        if (jx < 0 || jx >= g.n[0] || jy < 0 || jy >= g.n[1]) continue;
        const int nb = g.index(jx, jy);
        if (u[nb] <= fb.tau) continue;
        const double step = d < 2 ? g.h[0] : g.h[1];
        const double along =
            p.normal ? std::abs(dx[d] * (*p.normal)[0] + dy[d] * (*p.normal)[1]) : 1.0;
        const double s_hat = std::pow(u[nb] / c_gamma, 1.0 / params.beta);
        score = std::min(score, std::abs(s_hat - step * along));
    }
    return score;
}

/// Blow-up center selection among regular points with enough margin for the
/// reference box. Blow-up convergence is measured against the tangent
/// half-space, so the most curved stretch of the free boundary carries the
/// signal: maximize the local normal oscillation, breaking ties by the
/// node-centering score and then by index.
inline int pick_blowup_center(const ScalarField& u, const FreeBoundarySet& fb,
                              const Params& params, double c_gamma, double margin,
                              double osc_radius) {
    const Grid& g = u.grid;
    struct Candidate {
        int idx;
        double osc;
        double score;
    };
    std::vector<Candidate> candidates;
    for (const auto& p : fb.boundary) {
        if (p.cls != FbClass::Regular || !p.normal) continue;
        if (dist_to_domain_boundary(g, p.x) < margin) continue;
        double osc = 0.0;
        for (const auto& q : fb.boundary) {
            if (!q.normal || q.idx == p.idx) continue;
            if (std::hypot(p.x[0] - q.x[0], p.x[1] - q.x[1]) > osc_radius) continue;
            osc = std::max(osc, angle_between(*p.normal, *q.normal));
        }
        candidates.push_back({p.idx, osc, node_centering_score(u, fb, p, params, c_gamma)});
    }
    if (candidates.empty()) return -1;
    // Curvature band first, then the best node-centered cell within it: the
    // band keeps the convergence signal above interpolation noise, the
    // centering keeps the comparison profile aligned with the node.
    double max_osc = 0.0;
    for (const auto& c : candidates) max_osc = std::max(max_osc, c.osc);
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        if (c.osc < 0.8 * max_osc) continue;
        if (c.score < best_score - 1e-18) {
            best_score = c.score;
            best = c.idx;
        }
    }
    return best;
}

}  // namespace detail

inline ExperimentResult run_pipeline(const ExperimentConfig& cfg, std::uint64_t seed = 42) {
    ExperimentResult out{cfg, SolveResult{ScalarField(cfg.grid()), 0, {}, false, 0.0},
                         FreeBoundarySet{}, ScalingReportData{}, EllipticityReport{}};
    const ProblemSpec prob = cfg.problem();
    out.ellipticity = ellipticity_check(prob.op, 200, seed);
    out.solve = solve(prob);
    const ScalarField& u = out.solve.u;
    const Params params = prob.params;

    FreeBoundaryOptions fopts;
    fopts.kappa_tau = cfg.analysis.kappa_tau;
    fopts.delta_reg = cfg.analysis.delta_reg;
    fopts.normal_window = cfg.analysis.normal_window;
    out.fb = extract_and_analyze(u, params, prob.op, fopts);

    ScalingReportData& rep = out.scaling;
    const double c_gamma = halfspace_coefficient(prob.op, params.gamma, {1.0, 0.0});

    rep.growth_center_idx = detail::pick_growth_center(u.grid, out.fb);
    if (rep.growth_center_idx >= 0) {
        rep.growth_center = u.grid.coord(rep.growth_center_idx);
        try {
            rep.growth = fit_growth_exponent(u, rep.growth_center_idx);
        } catch (const InsufficientResolution& e) {
            rep.growth_note = e.what();
        }
    } else {
        rep.growth_note = "no free boundary point extracted";
    }

    for (double R : cfg.analysis.harnack_radii) {
        std::vector<const FreeBoundaryPoint*> eligible;
        for (const auto& p : out.fb.boundary)
            if (detail::dist_to_domain_boundary(u.grid, p.x) >= R * (1.0 - 1e-12))
                eligible.push_back(&p);
        const int want = std::max(1, cfg.analysis.harnack_centers);
        if (eligible.empty()) continue;
        for (int k = 0; k < want; ++k) {
            const std::size_t pick =
                want == 1 ? 0 : (k * (eligible.size() - 1)) / (want - 1);
            const auto* p = eligible[pick];
            rep.harnack.push_back({p->x, R, harnack_constant(u, p->x, R, params)});
        }
    }
    for (const auto& e : rep.harnack) rep.harnack_max = std::max(rep.harnack_max, e.value);

    rep.hessian_tau = c_gamma * std::pow(cfg.analysis.hessian_tau_cells * u.grid.max_spacing(),
                                         params.beta);
    rep.hessian = hessian_ratio_sup(u, params, rep.hessian_tau);

    if (!cfg.analysis.rescale_radii.empty()) {
        double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
        for (double r : cfg.analysis.rescale_radii) {
            rmax = std::max(rmax, r);
            rmin = std::min(rmin, r);
        }
        const double margin = rmax * kRescaleRefHalfWidth * (u.grid.dim == 2 ? M_SQRT2 : 1.0) * 1.02;
        rep.blowup_center_idx =
            detail::pick_blowup_center(u, out.fb, params, c_gamma, margin, 2.0 * rmin);
        if (rep.blowup_center_idx >= 0) {
            rep.blowup_center = u.grid.coord(rep.blowup_center_idx);
            for (const auto& p : out.fb.boundary)
                if (p.idx == rep.blowup_center_idx) rep.blowup_normal = p.normal;
            for (double r : cfg.analysis.rescale_radii) {
                const Rescaling resc = rescale(u, rep.blowup_center, r, params);
                const ProfileFit fit = profile_distance(resc, prob.op, params);
                BlowupEntry entry;
                entry.r = r;
                entry.distance = fit.distance;
                entry.e = fit.e;
                entry.convexity_margin = convexity_margin(resc);
                entry.monotonicity_min =
                    monotonicity_cone(resc, fit.e, cfg.analysis.monotonicity_delta);
                rep.blowups.push_back(entry);
            }
            if (rep.blowup_normal && !rep.blowups.empty())
                rep.normal_angle_gap = angle_between(rep.blowups.back().e, *rep.blowup_normal);
        } else {
            rep.blowup_note = "no regular boundary point with enough margin for the reference box";
        }
    }

    for (double rho : cfg.analysis.oscillation_radii) {
        rep.oscillation_radii.push_back(rho);
        rep.oscillations.push_back(normal_oscillation(out.fb, rho));
    }

    rep.subharmonic = subharmonic_margin(u, params);
    return out;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace detail {

inline nlohmann::ordered_json scaling_to_json(const ExperimentResult& r) {
    nlohmann::ordered_json s;
    const auto& rep = r.scaling;
    if (rep.growth) {
        s["growth"] = {{"slope", rep.growth->slope},
                       {"stderr", rep.growth->stderr_},
                       {"radii", rep.growth->radii},
                       {"sups", rep.growth->sups},
                       {"center", std::vector<double>(rep.growth_center.begin(),
                                                      rep.growth_center.begin() + r.cfg.dim)}};
    } else {
        s["growth"] = {{"unavailable", rep.growth_note}};
    }
    auto harnack = nlohmann::ordered_json::array();
    for (const auto& e : rep.harnack)
        harnack.push_back({{"center", std::vector<double>(e.center.begin(),
                                                          e.center.begin() + r.cfg.dim)},
                           {"R", e.R},
                           {"value", e.value}});
    s["harnack"] = {{"entries", harnack}, {"max", rep.harnack_max}};
    s["hessian_ratio"] = {{"tau", rep.hessian_tau},
                          {"sup", rep.hessian.value},
                          {"points", rep.hessian.points}};
    if (rep.blowup_center_idx >= 0) {
        auto blowups = nlohmann::ordered_json::array();
        for (const auto& b : rep.blowups)
            blowups.push_back({{"r", b.r},
                               {"profile_distance", b.distance},
                               {"direction", std::vector<double>(b.e.begin(), b.e.begin() + r.cfg.dim)},
                               {"convexity_margin", b.convexity_margin},
                               {"monotonicity_min", b.monotonicity_min}});
        s["blowup"] = {{"center", std::vector<double>(rep.blowup_center.begin(),
                                                      rep.blowup_center.begin() + r.cfg.dim)},
                       {"entries", blowups},
                       {"normal_angle_gap", rep.normal_angle_gap}};
    } else if (!rep.blowup_note.empty()) {
        s["blowup"] = {{"unavailable", rep.blowup_note}};
    }
    if (!rep.oscillation_radii.empty())
        s["normal_oscillation"] = {{"radii", rep.oscillation_radii},
                                   {"values", rep.oscillations}};
    s["subharmonic_margin"] = rep.subharmonic;
    return s;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const ExperimentResult& r) {
    nlohmann::ordered_json j;
    j["name"] = r.cfg.name;
    j["config_hash"] = config_hash(r.cfg);
    j["operator"] = {{"kind", build(r.cfg.op(), r.cfg.grid()).reported_kind()},
                     {"lambda", r.cfg.lambda}};
    j["gamma"] = r.cfg.gamma;
    j["beta"] = beta_of(r.cfg.gamma);
    j["grid"] = {{"dim", r.cfg.dim},
                 {"n", std::vector<int>(r.cfg.n.begin(), r.cfg.n.begin() + r.cfg.dim)},
                 {"h", r.cfg.grid().max_spacing()}};
    j["solve"] = {{"converged", r.solve.converged},
                  {"iterations", r.solve.iterations},
                  {"residual_history", r.solve.residual_history},
                  {"min_unclamped", r.solve.min_unclamped}};
    j["free_boundary"] = {{"tau", r.fb.tau},
                          {"contact_points", static_cast<int>(r.fb.contact_indices().size())},
                          {"boundary_points", static_cast<int>(r.fb.boundary.size())}};
    j["ellipticity_check"] = {{"pass", r.ellipticity.pass},
                              {"trials", r.ellipticity.trials},
                              {"lower_margin", r.ellipticity.lower_margin},
                              {"upper_margin", r.ellipticity.upper_margin},
                              {"lower_bound", r.ellipticity.lower_bound},
                              {"upper_bound", r.ellipticity.upper_bound}};
    j["scaling"] = detail::scaling_to_json(r);
    return j;
}

struct StageTimes {
    double solve_ms = 0.0;
    double freeboundary_ms = 0.0;
    double scaling_ms = 0.0;
    double io_ms = 0.0;
};

inline void write_artifacts(const ExperimentResult& r, const std::string& outdir,
                            const StageTimes& times = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);

    CsvWriter solution(outdir + "/solution.csv");
    solution.header(r.cfg.dim == 1 ? std::vector<std::string>{"x", "u"}
                                   : std::vector<std::string>{"x", "y", "u"});
    const Grid g = r.solve.u.grid;
    for (int idx = 0; idx < g.count(); ++idx) {
        const auto x = g.coord(idx);
        if (r.cfg.dim == 1) solution.row({x[0], r.solve.u[idx]});
        else solution.row({x[0], x[1], r.solve.u[idx]});
    }
    solution.close();

    CsvWriter fbcsv(outdir + "/fb.csv");
    fbcsv.header(r.cfg.dim == 1
                     ? std::vector<std::string>{"x", "nx", "class", "density_smallest_r"}
                     : std::vector<std::string>{"x", "y", "nx", "ny", "class",
                                                "density_smallest_r"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : r.fb.boundary) {
        std::vector<CsvCell> row;
        row.emplace_back(p.x[0]);
        if (r.cfg.dim == 2) row.emplace_back(p.x[1]);
        row.emplace_back(p.normal ? (*p.normal)[0] : nan);
        if (r.cfg.dim == 2) row.emplace_back(p.normal ? (*p.normal)[1] : nan);
        row.emplace_back(std::string(fb_class_name(p.cls)));
        row.emplace_back(p.density_smallest_r);
        fbcsv.row(row);
    }
    fbcsv.close();

    {
        std::ofstream out(outdir + "/report.json");
        out << report_json(r).dump(2) << "\n";
    }

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config_hash(r.cfg);
    manifest["tool_version"] = kVersion;
    manifest["wall_ms"] = {{"solve", times.solve_ms},
                           {"freeboundary", times.freeboundary_ms},
                           {"scaling", times.scaling_ms},
                           {"io", times.io_ms}};
    auto files = nlohmann::ordered_json::array();
    for (const char* name : {"solution.csv", "fb.csv", "report.json"}) {
        std::ifstream in(outdir + "/" + name, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string data = buf.str();
        files.push_back({{"name", name},
                         {"bytes", data.size()},
                         {"fnv1a64", fnv1a64(data)}});
    }
    manifest["files"] = files;
    std::ofstream out(outdir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& outdir,
                                       std::uint64_t seed = 42) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    ExperimentResult result = run_pipeline(cfg, seed);
    const auto t1 = clock::now();
    StageTimes times;
    times.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    write_artifacts(result, outdir, times);
    return result;
}

// ---------------------------------------------------------------------------
// Refinement study

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    bool converged = false;
    int iterations = 0;
    double linf_error = std::numeric_limits<double>::quiet_NaN();  // vs oracle when available
    double observed_order = std::numeric_limits<double>::quiet_NaN();
    double beta_fit = std::numeric_limits<double>::quiet_NaN();
    double hessian_ratio = std::numeric_limits<double>::quiet_NaN();
    double harnack_max = std::numeric_limits<double>::quiet_NaN();
    double subharmonic = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool oracle_available = false;
};

/// Nested refinement study n -> 2n-1. The closed-form half-space profile
/// serves as the oracle when the boundary data is its unscaled trace.
inline ConvergenceTable convergence_study(const ExperimentConfig& base, int levels,
                                          const std::string& outdir = "", std::uint64_t seed = 42) {
    if (levels < 2) throw ConfigError("convergence study needs levels >= 2");
    for (int a = 0; a < base.dim; ++a)
        if (base.n[a] % 2 == 0)
            throw ConfigError("convergence study needs odd base n so refinements nest");
    ConvergenceTable table;
    table.oracle_available = base.boundary.type == BoundaryData::Type::Halfspace &&
                             base.boundary.scale == 1.0;
    for (int level = 0; level < levels; ++level) {
        ExperimentConfig cfg = base;
        for (int a = 0; a < base.dim; ++a)
            cfg.n[a] = ((base.n[a] - 1) << level) + 1;
        const ExperimentResult r = run_pipeline(cfg, seed);
        ConvergenceRow row;
        row.n = cfg.n[0];
        row.h = cfg.grid().max_spacing();
        row.converged = r.solve.converged;
        row.iterations = r.solve.iterations;
        if (table.oracle_available) {
            const ScalarField oracle =
                halfspace_profile(cfg.op(), cfg.gamma, cfg.boundary.e, cfg.grid());
            double err = 0.0;
            for (int idx = 0; idx < cfg.grid().count(); ++idx)
                err = std::max(err, std::abs(r.solve.u[idx] - oracle[idx]));
            row.linf_error = err;
        }
        if (r.scaling.growth) row.beta_fit = r.scaling.growth->slope;
        row.hessian_ratio = r.scaling.hessian.value;
        if (!r.scaling.harnack.empty()) row.harnack_max = r.scaling.harnack_max;
        row.subharmonic = r.scaling.subharmonic;
        if (!table.rows.empty() && table.oracle_available)
            row.observed_order = std::log2(table.rows.back().linf_error / row.linf_error);
        table.rows.push_back(row);
    }
    if (!outdir.empty()) {
        std::filesystem::create_directories(outdir);
        CsvWriter csv(outdir + "/convergence.csv");
        csv.header({"n", "h", "converged", "iterations", "linf_error", "observed_order",
                    "beta_fit", "hessian_ratio_sup", "harnack_max", "subharmonic_margin"});
        for (const auto& row : table.rows)
            csv.row({static_cast<double>(row.n), row.h, static_cast<double>(row.converged),
                     static_cast<double>(row.iterations), row.linf_error, row.observed_order,
                     row.beta_fit, row.hessian_ratio, row.harnack_max, row.subharmonic});
        csv.close();
    }
    return table;
}

inline std::string format_convergence_table(const ConvergenceTable& table) {
    std::ostringstream out;
    out << "n,h,converged,iterations,linf_error,observed_order,beta_fit,hessian_ratio_sup,"
           "harnack_max,subharmonic_margin\n";
    char buf[512];
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      row.n, row.h, row.converged ? 1 : 0, row.iterations, row.linf_error,
                      row.observed_order, row.beta_fit, row.hessian_ratio, row.harnack_max,
                      row.subharmonic);
        out << buf;
    }
    return out.str();
}

}  // namespace ap
