#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "altphillips/experiment.hpp"

namespace ap {

// ---------------------------------------------------------------------------
// Experiments exercised by the acceptance suite. The bundled configs under
// configs/ mirror these definitions for CLI use.

inline ExperimentConfig oracle_1d_config(OperatorKind kind, double lambda, double gamma, int n) {
    ExperimentConfig cfg;
    cfg.name = std::string(kind_name(kind)) + "_1d_g" + std::to_string(gamma).substr(0, 4) + "_n" +
               std::to_string(n);
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.op_kind = kind;
    cfg.dim = 1;
    cfg.lo = {-1.0, 0.0};
    cfg.hi = {1.0, 0.0};
    cfg.n = {n, 1};
    cfg.boundary = BoundaryData::halfspace({1.0, 0.0});
    return cfg;
}

inline ExperimentConfig halfspace_2d_config(int n) {
    ExperimentConfig cfg;
    cfg.name = "halfspace_2d_n" + std::to_string(n);
    cfg.gamma = 1.5;
    cfg.op_kind = OperatorKind::Trace;
    cfg.dim = 2;
    cfg.lo = {-1.0, -1.0};
    cfg.hi = {1.0, 1.0};
    cfg.n = {n, n};
    cfg.boundary = BoundaryData::halfspace({1.0, 0.0});
    cfg.analysis.harnack_radii = {0.5, 0.25, 0.125};
    cfg.analysis.harnack_centers = 5;
    return cfg;
}

inline ExperimentConfig bump_2d_config(int n) {
    ExperimentConfig cfg;
    cfg.name = "bump_2d_n" + std::to_string(n);
    cfg.gamma = 1.5;
    cfg.op_kind = OperatorKind::Trace;
    cfg.dim = 2;
    cfg.lo = {-1.0, -1.0};
    cfg.hi = {1.0, 1.0};
    cfg.n = {n, n};
    cfg.boundary = BoundaryData::bump(0.006);
    cfg.analysis.rescale_radii = {0.25, 0.125, 0.0625};
    cfg.analysis.oscillation_radii = {0.25, 0.125, 0.0625};
    return cfg;
}

// ---------------------------------------------------------------------------

class VerifySuite {
  public:
    explicit VerifySuite(std::ostream& out, std::ostream* timing = nullptr)
        : out_(out), timing_(timing) {}

    bool run() {
        item_closed_form("1", "1d-closed-form-trace", OperatorKind::Trace, 1.0, 5e-6);
        item_closed_form("2", "1d-closed-form-pucci", OperatorKind::PucciPlus, 2.0, 5e-6);
        item_growth_exponent();
        item_harnack();
        item_hessian_ratio();
        item_subharmonic();
        item_blowup();
        item_density();
        item_c1_trend();
        item_structural();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d/%d criteria passed\n", passed_, total_);
        out_ << buf;
        return passed_ == total_;
    }

  private:
    static constexpr double kCgammaTrace = 1.0 / 144.0;

    const ExperimentResult& experiment(const std::string& key, const ExperimentConfig& cfg) {
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentResult r = run_pipeline(cfg, 42);
        const auto t1 = std::chrono::steady_clock::now();
        if (timing_)
            *timing_ << "  [" << key << " solved in "
                     << std::chrono::duration<double>(t1 - t0).count() << " s]\n";
        return cache_.emplace(key, std::move(r)).first->second;
    }

    const ExperimentResult& oracle(OperatorKind kind, double lambda, double gamma, int n) {
        const ExperimentConfig cfg = oracle_1d_config(kind, lambda, gamma, n);
        return experiment(cfg.name, cfg);
    }

    void report(const std::string& id, const std::string& name, bool pass,
                const std::string& detail) {
        ++total_;
        if (pass) ++passed_;
        out_ << (pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << detail << "\n";
    }

    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }

    // Criterion 1/2: closed-form recovery against u* = c x_+^beta with
    // c = (beta(beta-1) F(e x e))^{-1/(2-gamma)}; second-order convergence
    // and O(h) free-boundary localization.
    void item_closed_form(const std::string& id, const std::string& name, OperatorKind kind,
                          double lambda, double linf_tol) {
        std::vector<double> errors;
        double fb_offset = 0.0, h_fine = 0.0;
        for (int n : {257, 513, 1025}) {
            const auto& r = oracle(kind, lambda, 1.5, n);
            const Grid g = r.cfg.grid();
            const ScalarField ustar =
                halfspace_profile(r.cfg.op(), r.cfg.gamma, {1.0, 0.0}, g);
            double err = 0.0;
            for (int idx = 0; idx < g.count(); ++idx)
                err = std::max(err, std::abs(r.solve.u[idx] - ustar[idx]));
            errors.push_back(err);
            if (n == 1025) {
                h_fine = g.h[0];
                fb_offset = 0.0;
                for (const auto& p : r.fb.boundary)
                    fb_offset = std::max(fb_offset, std::abs(p.x[0]));
                if (r.fb.boundary.empty()) fb_offset = std::numeric_limits<double>::infinity();
            }
        }
        const double order1 = std::log2(errors[0] / errors[1]);
        const double order2 = std::log2(errors[1] / errors[2]);
        const double order = std::min(order1, order2);
        const bool conv = oracle(kind, lambda, 1.5, 257).solve.converged &&
                          oracle(kind, lambda, 1.5, 513).solve.converged &&
                          oracle(kind, lambda, 1.5, 1025).solve.converged;
        const bool pass = conv && errors[2] <= linf_tol && order >= 1.9 &&
                          fb_offset <= 2.0 * h_fine;
        report(id, name, pass,
               "linf=" + fmt(errors[2]) + " (tol " + fmt(linf_tol) + "), order=" + fmt(order) +
                   " (>=1.9), fb_offset=" + fmt(fb_offset) + " (tol 2h=" + fmt(2.0 * h_fine) +
                   ")");
    }

    // Criterion 3: growth exponent beta from log sup_{B_r} u at the free
    // boundary; beta=4 cases at n=1025, beta=10 case at n=2049.
    void item_growth_exponent() {
        const auto slope_of = [&](const ExperimentResult& r) {
            return r.scaling.growth ? r.scaling.growth->slope
                                    : std::numeric_limits<double>::quiet_NaN();
        };
        const double s_trace = slope_of(oracle(OperatorKind::Trace, 1.0, 1.5, 1025));
        const double s_pucci = slope_of(oracle(OperatorKind::PucciPlus, 2.0, 1.5, 1025));
        const auto& g18 = oracle(OperatorKind::Trace, 1.0, 1.8, 2049);
        const double s_g18 = slope_of(g18);
        const bool pass = s_trace >= 3.9 && s_trace <= 4.1 && s_pucci >= 3.9 && s_pucci <= 4.1 &&
                          s_g18 >= 9.7 && s_g18 <= 10.3;
        std::string detail = "trace=" + fmt(s_trace) + ", pucci=" + fmt(s_pucci) +
                             " (window [3.9,4.1]); gamma=1.8: " + fmt(s_g18) +
                             " (window [9.7,10.3])";
        // At beta=10 the profile value one cell from the free boundary is
        // c h^10 ~ 1e-40; double precision cannot separate the contact set
        // from solver roundoff, so the fit degrades no matter the knobs.
        if (!g18.scaling.growth && !g18.scaling.growth_note.empty())
            detail += " [" + g18.scaling.growth_note + "]";
        report("3", "growth-exponent", pass, detail);
    }

    // Criterion 4: Harnack constant sup/(inf + R^beta) finite and stable
    // under refinement over a 5x3 (center, R) sample.
    void item_harnack() {
        const auto& coarse = experiment("halfspace_2d_n129", halfspace_2d_config(129));
        const auto& fine = experiment("halfspace_2d_n257", halfspace_2d_config(257));
        const double a = coarse.scaling.harnack_max;
        const double b = fine.scaling.harnack_max;
        const double ratio = b / a;
        const bool pass = std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0 &&
                          coarse.scaling.harnack.size() == 15 &&
                          fine.scaling.harnack.size() == 15 && ratio >= 0.5 && ratio <= 2.0;
        report("4", "harnack-uniformity", pass,
               "max@129=" + fmt(a) + ", max@257=" + fmt(b) + ", ratio=" + fmt(ratio) +
                   " (window [0.5,2]), samples=" + fmt(fine.scaling.harnack.size()));
    }

    // Criterion 5: |D^2 u| / u^{gamma-1} equals 1 (trace) and 1/lambda
    // (pucci) on the 1D oracles, and is refinement-stable on the bump.
    void item_hessian_ratio() {
        const double r_trace = oracle(OperatorKind::Trace, 1.0, 1.5, 1025).scaling.hessian.value;
        const double r_pucci =
            oracle(OperatorKind::PucciPlus, 2.0, 1.5, 1025).scaling.hessian.value;
        const double b129 = experiment("bump_2d_n129", bump_2d_config(129)).scaling.hessian.value;
        const double b257 = experiment("bump_2d_n257", bump_2d_config(257)).scaling.hessian.value;
        const double stability = b257 / b129;
        const bool pass = std::abs(r_trace - 1.0) <= 0.05 && std::abs(r_pucci - 0.5) <= 0.025 &&
                          stability >= 0.8 && stability <= 1.2;
        report("5", "hessian-ratio", pass,
               "trace=" + fmt(r_trace) + " (1 +- 5%), pucci=" + fmt(r_pucci) +
                   " (0.5 +- 5%), bump 129->257 ratio=" + fmt(stability) + " (1 +- 20%)");
    }

    // Criterion 6: discrete Laplacian margin <= C_fd h^2 on every converged
    // experiment, with C_fd measured from the exact profile at the base
    // resolution.
    void item_subharmonic() {
        const Grid base = Grid::line(-1.0, 1.0, 257);
        const ScalarField profile =
            halfspace_profile(OperatorSpec::trace(1), 1.5, {1.0, 0.0}, base);
        const double cfd =
            subharmonic_margin(profile, Params(1.5)) / (base.h[0] * base.h[0]);
        bool pass = cfd > 0.0;
        std::string worst_key = "-";
        double worst_excess = -std::numeric_limits<double>::infinity();
        for (const auto& [key, r] : cache_) {
            if (!r.solve.converged) continue;
            const double h = r.cfg.grid().max_spacing();
            const double bound = cfd * h * h;
            const double excess = r.scaling.subharmonic - bound;
            if (excess > worst_excess) {
                worst_excess = excess;
                worst_key = key;
            }
            if (r.scaling.subharmonic > bound) pass = false;
        }
        report("6", "subharmonic-margin", pass,
               "C_fd=" + fmt(cfd) + ", worst margin-bound gap=" + fmt(worst_excess) + " at " +
                   worst_key + " (must be <= 0)");
    }

    // Criterion 7: blow-up rescalings about a regular point converge to the
    // half-space profile, with the fitted direction matching the estimated
    // normal.
    void item_blowup() {
        const auto& r = experiment("bump_2d_n257", bump_2d_config(257));
        const auto& blow = r.scaling.blowups;
        bool pass = blow.size() == 3 && r.scaling.blowup_center_idx >= 0;
        std::string detail;
        if (pass) {
            const bool decreasing =
                blow[0].distance > blow[1].distance && blow[1].distance > blow[2].distance;
            const double limit = 0.15 * kCgammaTrace;
            const double gap = r.scaling.normal_angle_gap;
            pass = decreasing && blow[2].distance <= limit && std::isfinite(gap) && gap <= 0.1;
            detail = "distances=" + fmt(blow[0].distance) + ">" + fmt(blow[1].distance) + ">" +
                     fmt(blow[2].distance) + " (final tol " + fmt(limit) +
                     "), angle_gap=" + fmt(gap) + " (tol 0.1)";
        } else {
            detail = "no usable blow-up center: " + r.scaling.blowup_note;
        }
        report("7", "blowup-convergence", pass, detail);
    }

    // Criterion 8: every extracted boundary point of the half-space
    // experiment is regular with half-ish smallest-radius density.
    void item_density() {
        const auto& r = experiment("halfspace_2d_n257", halfspace_2d_config(257));
        int regular = 0, total = 0;
        double dmin = 1.0, dmax = 0.0;
        for (const auto& p : r.fb.boundary) {
            ++total;
            if (p.cls == FbClass::Regular) ++regular;
            if (std::isfinite(p.density_smallest_r)) {
                dmin = std::min(dmin, p.density_smallest_r);
                dmax = std::max(dmax, p.density_smallest_r);
            }
        }
        const bool pass = total > 0 && regular == total && dmin >= 0.4 && dmax <= 0.6;
        report("8", "regular-point-density", pass,
               "regular " + fmt(regular) + "/" + fmt(total) + ", smallest-radius density in [" +
                   fmt(dmin) + ", " + fmt(dmax) + "] (window [0.4,0.6])");
    }

    // Criterion 9: normal oscillation nonincreasing over dyadic radii
    // within +0.02 rad slack.
    void item_c1_trend() {
        const auto& r = experiment("bump_2d_n257", bump_2d_config(257));
        const auto& osc = r.scaling.oscillations;
        bool pass = osc.size() == 3;
        if (pass) pass = osc[1] <= osc[0] + 0.02 && osc[2] <= osc[1] + 0.02;
        report("9", "c1-normal-trend", pass,
               osc.size() == 3 ? "oscillation(1/4,1/8,1/16)=" + fmt(osc[0]) + "," + fmt(osc[1]) +
                                     "," + fmt(osc[2]) + " (slack +0.02)"
                               : "missing oscillation radii");
    }

    // Criterion 10: operator property tests (1000 seed-fixed samples),
    // ordered boundary comparisons, and pipeline determinism.
    void item_structural() {
        std::mt19937_64 rng(20240);
        std::normal_distribution<double> gauss(0.0, 2.0);
        std::uniform_real_distribution<double> tdist(0.01, 20.0);
        const std::vector<OperatorSpec> specs = {
            OperatorSpec::trace(1), OperatorSpec::trace(2), OperatorSpec::pucci_plus(1, 2.0),
            OperatorSpec::pucci_plus(2, 2.0),
            OperatorSpec::bellman(2, 2.0,
                                  {SymMatrix::identity(2), SymMatrix(2.0, 0.0, 0.5),
                                   SymMatrix(1.25, 0.6, 1.25)})};
        auto rand_sym = [&](int dim) {
            return dim == 1 ? SymMatrix(gauss(rng)) : SymMatrix(gauss(rng), gauss(rng), gauss(rng));
        };
        int failures = 0;
        for (int t = 0; t < 1000; ++t) {
            const auto& spec = specs[static_cast<std::size_t>(t) % specs.size()];
            const SymMatrix m = rand_sym(spec.dim);
            const SymMatrix n = rand_sym(spec.dim);
            const double s = tdist(rng);
            const double fm = evaluate(spec, m);
            if (std::abs(evaluate(spec, m * s) - s * fm) > 1e-9 * (1.0 + std::abs(s * fm)))
                ++failures;
            const double mid = evaluate(spec, (m + n) * 0.5);
            const double avg = 0.5 * (fm + evaluate(spec, n));
            if (mid > avg + 1e-9 * (1.0 + std::abs(avg))) ++failures;
            const double pucci = evaluate(OperatorSpec::pucci_plus(spec.dim, spec.lambda), m);
            if (fm > pucci + 1e-9 * (1.0 + std::abs(pucci))) ++failures;
            const auto sub = sub_differential(spec, m);
            if (sub.matrix.dot(n) > evaluate(spec, m + n) - fm + 1e-9 * (1.0 + std::abs(fm)))
                ++failures;
        }

        // Three ordered boundary-data pairs on the 1D trace problem.
        ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 201);
        const ProblemSpec prob = cfg.problem();
        const auto zero = BoundaryData::constant(0.0);
        const auto half = BoundaryData::halfspace({1.0, 0.0});
        const auto half2 = BoundaryData::halfspace({1.0, 0.0}, 2.0);
        const auto small = BoundaryData::constant(0.002);
        const auto big = BoundaryData::constant(0.02);
        const bool comparisons = comparison_test(prob, zero, half).pass &&
                                 comparison_test(prob, half, half2).pass &&
                                 comparison_test(prob, small, big).pass;

        // Determinism: a fresh pipeline run must reproduce the cached report
        // byte for byte.
        const auto& cached = oracle(OperatorKind::Trace, 1.0, 1.5, 257);
        const ExperimentResult fresh =
            run_pipeline(oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 257), 42);
        const bool deterministic =
            report_json(cached).dump() == report_json(fresh).dump() &&
            cached.solve.u.values == fresh.solve.u.values;

        const bool pass = failures == 0 && comparisons && deterministic;
        report("10", "structural-properties", pass,
               "property failures=" + fmt(failures) + "/1000 samples, comparisons=" +
                   (comparisons ? "ok" : "FAIL") + ", determinism=" +
                   (deterministic ? "ok" : "FAIL"));
    }

    std::ostream& out_;
    std::ostream* timing_;
    std::map<std::string, ExperimentResult> cache_;
    int passed_ = 0;
    int total_ = 0;
};

inline bool verify_suite(std::ostream& out, std::ostream* timing = nullptr) {
    VerifySuite suite(out, timing);
    return suite.run();
}

}  // namespace ap
