#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "altphillips/hash.hpp"
#include "altphillips/operators.hpp"
#include "altphillips/solver.hpp"

namespace ap {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Analysis knobs surfaced in the experiment config. Thresholds reference
/// c_gamma h^beta, the natural amplitude scale near the free boundary.
struct AnalysisKnobs {
    double kappa_tau = 0.5;       // contact threshold multiplier
    double delta_reg = 0.1;       // regular-point density cutoff
    int normal_window = 6;        // least-squares window in cells
    double hessian_tau_cells = 4.0;  // Hessian-ratio threshold at c_gamma (k h)^beta
    double monotonicity_delta = 0.5;
    std::vector<double> rescale_radii;      // blow-up radii (2D experiments)
    std::vector<double> oscillation_radii;  // normal oscillation radii
    std::vector<double> harnack_radii;      // Harnack R values
    int harnack_centers = 5;
};

struct ExperimentConfig {
    std::string name;
    double gamma = 1.5;
    double lambda = 1.0;
    OperatorKind op_kind = OperatorKind::Trace;
    std::vector<SymMatrix> family;  // Bellman
    int dim = 1;
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{257, 257};
    BoundaryData boundary;
    SolverKnobs knobs;
    AnalysisKnobs analysis;
    std::string output_dir;

    Params params() const { return Params(gamma, lambda); }
    OperatorSpec op() const {
        switch (op_kind) {
            case OperatorKind::Trace: return OperatorSpec::trace(dim, lambda);
            case OperatorKind::PucciPlus: return OperatorSpec::pucci_plus(dim, lambda);
            case OperatorKind::Bellman: return OperatorSpec::bellman(dim, lambda, family);
        }
        return OperatorSpec::trace(dim, lambda);
    }
    Grid grid() const { return Grid(dim, lo, hi, n); }
    ProblemSpec problem() const { return ProblemSpec{params(), op(), grid(), boundary, knobs}; }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key " + path + "." + key);
    }
}

inline double require_number(const nlohmann::json& obj, const std::string& key,
                             const std::string& path) {
    if (!obj.contains(key)) throw ConfigError("missing key " + path + "." + key);
    if (!obj[key].is_number()) throw ConfigError(path + "." + key + " must be a number");
    return obj[key].get<double>();
}

inline std::vector<double> number_list(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(path + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::number_list;
    using detail::reject_unknown_keys;
    using detail::require_number;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(j, {"name", "gamma", "operator", "domain", "boundary", "solver",
                            "analysis", "output"},
                        "$");
    ExperimentConfig cfg;

    if (!j.contains("name") || !j["name"].is_string())
        throw ConfigError("missing or non-string key $.name");
    cfg.name = j["name"].get<std::string>();
    if (cfg.name.empty()) throw ConfigError("$.name must be nonempty");

    cfg.gamma = require_number(j, "gamma", "$");
    if (!(cfg.gamma > 1.0 && cfg.gamma < 2.0))
        throw ConfigError("$.gamma = " + std::to_string(cfg.gamma) +
                          " is outside the admissible interval (1, 2)");

    if (!j.contains("operator") || !j["operator"].is_object())
        throw ConfigError("missing object $.operator");
    {
        const auto& op = j["operator"];
        reject_unknown_keys(op, {"kind", "lambda", "family"}, "$.operator");
        if (!op.contains("kind") || !op["kind"].is_string())
            throw ConfigError("missing or non-string key $.operator.kind");
        const std::string kind = op["kind"].get<std::string>();
        if (kind == "trace") cfg.op_kind = OperatorKind::Trace;
        else if (kind == "pucci_plus") cfg.op_kind = OperatorKind::PucciPlus;
        else if (kind == "bellman") cfg.op_kind = OperatorKind::Bellman;
        else throw ConfigError("$.operator.kind must be one of trace|pucci_plus|bellman, got \"" +
                               kind + "\"");
        cfg.lambda = op.contains("lambda") ? require_number(op, "lambda", "$.operator") : 1.0;
        if (!(cfg.lambda >= 1.0)) throw ConfigError("$.operator.lambda must be >= 1");
        if (cfg.op_kind == OperatorKind::Bellman) {
            if (!op.contains("family") || !op["family"].is_array() || op["family"].empty())
                throw ConfigError("$.operator.family must be a nonempty array for bellman");
        }
        if (op.contains("family")) {
            for (std::size_t i = 0; i < op["family"].size(); ++i) {
                const auto row =
                    number_list(op["family"][i], "$.operator.family[" + std::to_string(i) + "]");
                if (row.size() == 1) cfg.family.emplace_back(row[0]);
                else if (row.size() == 4) {
                    if (std::abs(row[1] - row[2]) > 1e-14 * (1.0 + std::abs(row[1])))
                        throw ConfigError("$.operator.family[" + std::to_string(i) +
                                          "] must be symmetric (row-major d x d)");
                    cfg.family.emplace_back(row[0], row[1], row[3]);
                } else
                    throw ConfigError("$.operator.family[" + std::to_string(i) +
                                      "] must have 1 (1D) or 4 (2D row-major) entries");
            }
        }
    }

    if (!j.contains("domain") || !j["domain"].is_object())
        throw ConfigError("missing object $.domain");
    {
        const auto& dom = j["domain"];
        reject_unknown_keys(dom, {"dim", "lo", "hi", "n"}, "$.domain");
        const double dim = require_number(dom, "dim", "$.domain");
        if (dim != 1.0 && dim != 2.0) throw ConfigError("$.domain.dim must be 1 or 2");
        cfg.dim = static_cast<int>(dim);
        const auto lo = number_list(dom.contains("lo") ? dom["lo"] : nlohmann::json(), "$.domain.lo");
        const auto hi = number_list(dom.contains("hi") ? dom["hi"] : nlohmann::json(), "$.domain.hi");
        const auto np = number_list(dom.contains("n") ? dom["n"] : nlohmann::json(), "$.domain.n");
        if (static_cast<int>(lo.size()) != cfg.dim || static_cast<int>(hi.size()) != cfg.dim ||
            static_cast<int>(np.size()) != cfg.dim)
            throw ConfigError("$.domain.lo/hi/n must each have dim entries");
        for (int a = 0; a < cfg.dim; ++a) {
            cfg.lo[a] = lo[static_cast<std::size_t>(a)];
            cfg.hi[a] = hi[static_cast<std::size_t>(a)];
            if (np[static_cast<std::size_t>(a)] < 3.0 ||
                np[static_cast<std::size_t>(a)] !=
                    std::floor(np[static_cast<std::size_t>(a)]))
                throw ConfigError("$.domain.n entries must be integers >= 3");
            cfg.n[a] = static_cast<int>(np[static_cast<std::size_t>(a)]);
        }
    }

    if (!j.contains("boundary") || !j["boundary"].is_object())
        throw ConfigError("missing object $.boundary");
    {
        const auto& bd = j["boundary"];
        reject_unknown_keys(bd, {"type", "value", "e", "scale", "coeffs"}, "$.boundary");
        if (!bd.contains("type") || !bd["type"].is_string())
            throw ConfigError("missing or non-string key $.boundary.type");
        const std::string type = bd["type"].get<std::string>();
        if (type == "constant") {
            const double v = require_number(bd, "value", "$.boundary");
            if (v < 0.0) throw ConfigError("$.boundary.value must be >= 0");
            cfg.boundary = BoundaryData::constant(v);
        } else if (type == "halfspace") {
            if (!bd.contains("e")) throw ConfigError("missing key $.boundary.e");
            const auto e = number_list(bd["e"], "$.boundary.e");
            if (static_cast<int>(e.size()) != cfg.dim)
                throw ConfigError("$.boundary.e must have dim entries");
            const double s = bd.contains("scale") ? require_number(bd, "scale", "$.boundary") : 1.0;
            cfg.boundary = BoundaryData::halfspace({e[0], cfg.dim == 2 ? e[1] : 0.0}, s);
        } else if (type == "polynomial") {
            if (!bd.contains("coeffs")) throw ConfigError("missing key $.boundary.coeffs");
            cfg.boundary = BoundaryData::polynomial(number_list(bd["coeffs"], "$.boundary.coeffs"));
        } else if (type == "bump") {
            const double s = bd.contains("scale") ? require_number(bd, "scale", "$.boundary") : 1.0;
            cfg.boundary = BoundaryData::bump(s);
        } else {
            throw ConfigError(
                "$.boundary.type must be one of constant|halfspace|polynomial|bump, got \"" + type +
                "\"");
        }
    }

    if (j.contains("solver")) {
        const auto& sv = j["solver"];
        reject_unknown_keys(sv, {"tol_residual", "max_outer", "relaxation", "rhs_floor"},
                            "$.solver");
        if (sv.contains("tol_residual")) cfg.knobs.tol_residual = require_number(sv, "tol_residual", "$.solver");
        if (sv.contains("max_outer"))
            cfg.knobs.max_outer = static_cast<int>(require_number(sv, "max_outer", "$.solver"));
        if (sv.contains("relaxation")) cfg.knobs.relaxation = require_number(sv, "relaxation", "$.solver");
        if (sv.contains("rhs_floor")) cfg.knobs.rhs_floor = require_number(sv, "rhs_floor", "$.solver");
        if (!(cfg.knobs.tol_residual > 0.0)) throw ConfigError("$.solver.tol_residual must be > 0");
        if (cfg.knobs.max_outer < 1) throw ConfigError("$.solver.max_outer must be >= 1");
        if (!(cfg.knobs.relaxation > 0.0 && cfg.knobs.relaxation <= 1.0))
            throw ConfigError("$.solver.relaxation must lie in (0, 1]");
        if (cfg.knobs.rhs_floor < 0.0) throw ConfigError("$.solver.rhs_floor must be >= 0");
    }

    if (j.contains("analysis")) {
        const auto& an = j["analysis"];
        reject_unknown_keys(an,
                            {"kappa_tau", "delta_reg", "normal_window", "hessian_tau_cells",
                             "monotonicity_delta", "rescale_radii", "oscillation_radii",
                             "harnack_radii", "harnack_centers"},
                            "$.analysis");
        auto& a = cfg.analysis;
        if (an.contains("kappa_tau")) a.kappa_tau = require_number(an, "kappa_tau", "$.analysis");
        if (an.contains("delta_reg")) a.delta_reg = require_number(an, "delta_reg", "$.analysis");
        if (an.contains("normal_window"))
            a.normal_window = static_cast<int>(require_number(an, "normal_window", "$.analysis"));
        if (an.contains("hessian_tau_cells"))
            a.hessian_tau_cells = require_number(an, "hessian_tau_cells", "$.analysis");
        if (an.contains("monotonicity_delta"))
            a.monotonicity_delta = require_number(an, "monotonicity_delta", "$.analysis");
        if (an.contains("rescale_radii"))
            a.rescale_radii = number_list(an["rescale_radii"], "$.analysis.rescale_radii");
        if (an.contains("oscillation_radii"))
            a.oscillation_radii = number_list(an["oscillation_radii"], "$.analysis.oscillation_radii");
        if (an.contains("harnack_radii"))
            a.harnack_radii = number_list(an["harnack_radii"], "$.analysis.harnack_radii");
        if (an.contains("harnack_centers"))
            a.harnack_centers = static_cast<int>(require_number(an, "harnack_centers", "$.analysis"));
        if (!(a.kappa_tau > 0.0)) throw ConfigError("$.analysis.kappa_tau must be > 0");
        if (!(a.delta_reg > 0.0 && a.delta_reg < 1.0))
            throw ConfigError("$.analysis.delta_reg must lie in (0, 1)");
        if (a.normal_window < 2) throw ConfigError("$.analysis.normal_window must be >= 2");
    }

    if (j.contains("output")) {
        if (!j["output"].is_string()) throw ConfigError("$.output must be a string");
        cfg.output_dir = j["output"].get<std::string>();
    }
    if (cfg.output_dir.empty()) cfg.output_dir = "out/" + cfg.name;

    // Constructing the pieces revalidates cross-field invariants (grid shape,
    // Bellman family spectra, boundary nonnegativity at corners).
    try {
        cfg.problem();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON parse failure: ") + e.what());
    }
    return config_from_json(j);
}

/// Canonical serialization; config_hash content-addresses experiments.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    j["gamma"] = cfg.gamma;
    j["operator"]["kind"] = kind_name(cfg.op_kind);
    j["operator"]["lambda"] = cfg.lambda;
    if (!cfg.family.empty()) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& a : cfg.family) {
            if (cfg.dim == 1) rows.push_back({a.xx});
            else rows.push_back({a.xx, a.xy, a.xy, a.yy});
        }
        j["operator"]["family"] = rows;
    }
    j["domain"]["dim"] = cfg.dim;
    j["domain"]["lo"] = std::vector<double>(cfg.lo.begin(), cfg.lo.begin() + cfg.dim);
    j["domain"]["hi"] = std::vector<double>(cfg.hi.begin(), cfg.hi.begin() + cfg.dim);
    j["domain"]["n"] = std::vector<int>(cfg.n.begin(), cfg.n.begin() + cfg.dim);
    switch (cfg.boundary.type) {
        case BoundaryData::Type::Constant:
            j["boundary"] = {{"type", "constant"}, {"value", cfg.boundary.value}};
            break;
        case BoundaryData::Type::Halfspace:
            j["boundary"] = {{"type", "halfspace"},
                             {"e", std::vector<double>(cfg.boundary.e.begin(),
                                                       cfg.boundary.e.begin() + cfg.dim)},
                             {"scale", cfg.boundary.scale}};
            break;
        case BoundaryData::Type::Polynomial:
            j["boundary"] = {{"type", "polynomial"}, {"coeffs", cfg.boundary.coeffs}};
            break;
        case BoundaryData::Type::Bump:
            j["boundary"] = {{"type", "bump"}, {"scale", cfg.boundary.scale}};
            break;
    }
    j["solver"] = {{"tol_residual", cfg.knobs.tol_residual},
                   {"max_outer", cfg.knobs.max_outer},
                   {"relaxation", cfg.knobs.relaxation},
                   {"rhs_floor", cfg.knobs.rhs_floor}};
    j["analysis"] = {{"kappa_tau", cfg.analysis.kappa_tau},
                     {"delta_reg", cfg.analysis.delta_reg},
                     {"normal_window", cfg.analysis.normal_window},
                     {"hessian_tau_cells", cfg.analysis.hessian_tau_cells},
                     {"monotonicity_delta", cfg.analysis.monotonicity_delta},
                     {"rescale_radii", cfg.analysis.rescale_radii},
                     {"oscillation_radii", cfg.analysis.oscillation_radii},
                     {"harnack_radii", cfg.analysis.harnack_radii},
                     {"harnack_centers", cfg.analysis.harnack_centers}};
    j["output"] = cfg.output_dir;
    return j;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a64(config_to_json(cfg).dump());
}

}  // namespace ap
