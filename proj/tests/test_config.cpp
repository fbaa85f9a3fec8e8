#include <catch2/catch_amalgamated.hpp>

#include "altphillips/config.hpp"

using namespace ap;
using nlohmann::json;

namespace {

json valid_config() {
    return json::parse(R"({
      "name": "demo",
      "gamma": 1.5,
      "operator": {"kind": "trace"},
      "domain": {"dim": 1, "lo": [-1.0], "hi": [1.0], "n": [257]},
      "boundary": {"type": "halfspace", "e": [1.0]}
    })");
}

}  // namespace

TEST_CASE("valid config parses with defaults") {
    const ExperimentConfig cfg = config_from_json(valid_config());
    CHECK(cfg.name == "demo");
    CHECK(cfg.gamma == 1.5);
    CHECK(cfg.dim == 1);
    CHECK(cfg.n[0] == 257);
    CHECK(cfg.knobs.tol_residual == 1e-10);
    CHECK(cfg.knobs.max_outer == 500);
    CHECK(cfg.knobs.relaxation == 0.8);
    CHECK(cfg.analysis.kappa_tau == 0.5);
    CHECK(cfg.analysis.delta_reg == 0.1);
    CHECK(cfg.output_dir == "out/demo");
    CHECK_NOTHROW(cfg.problem());
}

TEST_CASE("unknown keys are rejected with their path") {
    auto j = valid_config();
    j["solver"] = {{"bogus", 1}};
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("$.solver.bogus"));
    auto k = valid_config();
    k["extra"] = 1;
    CHECK_THROWS_WITH(config_from_json(k), Catch::Matchers::ContainsSubstring("$.extra"));
}

TEST_CASE("gamma outside (1,2) is rejected citing the interval") {
    auto j = valid_config();
    j["gamma"] = 2.5;
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("(1, 2)"));
    j["gamma"] = 1.0;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("operator kinds and bellman families") {
    auto j = valid_config();
    j["operator"] = {{"kind", "pucci_plus"}, {"lambda", 2.0}};
    CHECK(config_from_json(j).op_kind == OperatorKind::PucciPlus);

    j["operator"] = {{"kind", "bellman"},
                     {"lambda", 2.0},
                     {"family", json::array({json::array({1.0})})}};
    CHECK(config_from_json(j).op().kind == OperatorKind::Bellman);

    j["operator"] = {{"kind", "bellman"}, {"lambda", 2.0}};
    CHECK_THROWS_WITH(config_from_json(j),
                      Catch::Matchers::ContainsSubstring("$.operator.family"));

    j["operator"] = {{"kind", "isaacs"}};
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("isaacs"));
}

TEST_CASE("boundary catalog validation") {
    auto j = valid_config();
    j["boundary"] = {{"type", "constant"}, {"value", -1.0}};
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j["boundary"] = {{"type", "spline"}};
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("spline"));
    j["boundary"] = {{"type", "bump"}, {"scale", 0.02}};
    CHECK(config_from_json(j).boundary.type == BoundaryData::Type::Bump);
    j["boundary"] = {{"type", "polynomial"}, {"coeffs", json::array({0.0, 0.0, 1.0})}};
    CHECK(config_from_json(j).boundary.type == BoundaryData::Type::Polynomial);
}

TEST_CASE("domain validation") {
    auto j = valid_config();
    j["domain"] = {{"dim", 3}, {"lo", json::array({0.0})}, {"hi", json::array({1.0})},
                   {"n", json::array({9})}};
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("dim"));
    j["domain"] = {{"dim", 1}, {"lo", json::array({0.0})}, {"hi", json::array({1.0})},
                   {"n", json::array({2})}};
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j["domain"] = {{"dim", 2}, {"lo", json::array({0.0, 0.0})}, {"hi", json::array({1.0, 1.0})},
                   {"n", json::array({9})}};
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("config hash is content-addressed and order-insensitive") {
    const ExperimentConfig a = config_from_json(valid_config());
    const ExperimentConfig b = config_from_json(json::parse(R"({
      "gamma": 1.5,
      "name": "demo",
      "boundary": {"e": [1.0], "type": "halfspace"},
      "domain": {"n": [257], "dim": 1, "lo": [-1.0], "hi": [1.0]},
      "operator": {"kind": "trace"}
    })"));
    CHECK(config_hash(a) == config_hash(b));
    ExperimentConfig c = a;
    c.gamma = 1.6;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("round trip through canonical json") {
    const ExperimentConfig a = config_from_json(valid_config());
    const ExperimentConfig b = config_from_json(config_to_json(a));
    CHECK(config_hash(a) == config_hash(b));
}

#ifdef AP_CONFIG_DIR
TEST_CASE("bundled configs parse and match the acceptance experiments") {
    const std::string dir = AP_CONFIG_DIR;
    for (const char* name :
         {"oracle_1d_trace", "oracle_1d_pucci", "oracle_1d_trace_g18", "halfspace_2d_trace",
          "bump_2d_trace"}) {
        const ExperimentConfig cfg = load_config(dir + "/" + name + ".json");
        CHECK(cfg.name == name);
        CHECK_NOTHROW(cfg.problem());
    }
    const ExperimentConfig oracle = load_config(dir + "/oracle_1d_trace.json");
    CHECK(oracle.gamma == 1.5);
    CHECK(oracle.op_kind == OperatorKind::Trace);
    CHECK(oracle.n[0] == 1025);
    CHECK(oracle.boundary.type == BoundaryData::Type::Halfspace);
    CHECK(oracle.analysis.kappa_tau == 0.5);

    const ExperimentConfig bump = load_config(dir + "/bump_2d_trace.json");
    CHECK(bump.boundary.scale == 0.006);
    CHECK(bump.analysis.rescale_radii == std::vector<double>{0.25, 0.125, 0.0625});
}
#endif
