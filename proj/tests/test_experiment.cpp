#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "altphillips/experiment.hpp"
#include "altphillips/verify.hpp"

using namespace ap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("pipeline on the small 1D oracle") {
    const ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 257);
    const ExperimentResult r = run_pipeline(cfg);
    REQUIRE(r.solve.converged);
    CHECK(r.ellipticity.pass);
    REQUIRE(r.scaling.growth.has_value());
    CHECK(r.scaling.growth->slope == Catch::Approx(4.0).margin(0.1));
    CHECK_FALSE(r.fb.boundary.empty());
    CHECK(r.scaling.hessian.value == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("artifacts are written and reruns are byte-identical") {
    const fs::path dir = fs::temp_directory_path() / "ap_test_artifacts";
    fs::remove_all(dir);
    const ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 129);
    run_experiment(cfg, dir.string());
    for (const char* name : {"solution.csv", "fb.csv", "report.json", "manifest.json"})
        CHECK(fs::exists(dir / name));

    const std::string solution1 = slurp((dir / "solution.csv").string());
    const std::string report1 = slurp((dir / "report.json").string());
    CHECK(solution1.rfind("x,u\n", 0) == 0);

    const fs::path dir2 = fs::temp_directory_path() / "ap_test_artifacts_rerun";
    fs::remove_all(dir2);
    run_experiment(cfg, dir2.string());
    CHECK(slurp((dir2 / "solution.csv").string()) == solution1);
    CHECK(slurp((dir2 / "report.json").string()) == report1);
    CHECK(slurp((dir2 / "fb.csv").string()) == slurp((dir / "fb.csv").string()));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("manifest checksums match artifact bytes") {
    const fs::path dir = fs::temp_directory_path() / "ap_test_manifest";
    fs::remove_all(dir);
    const ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 65);
    run_experiment(cfg, dir.string());
    const auto manifest = nlohmann::json::parse(slurp((dir / "manifest.json").string()));
    CHECK(manifest["tool_version"] == kVersion);
    CHECK(manifest["config_hash"].get<std::uint64_t>() == config_hash(cfg));
    for (const auto& f : manifest["files"]) {
        const std::string data = slurp((dir / f["name"].get<std::string>()).string());
        CHECK(f["bytes"].get<std::size_t>() == data.size());
        CHECK(f["fnv1a64"].get<std::uint64_t>() == fnv1a64(data));
    }
    fs::remove_all(dir);
}

TEST_CASE("convergence study on the 1D oracle") {
    const ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 129);
    const ConvergenceTable table = convergence_study(cfg, 3);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.oracle_available);
    CHECK(table.rows[0].n == 129);
    CHECK(table.rows[1].n == 257);
    CHECK(table.rows[2].n == 513);
    for (const auto& row : table.rows) CHECK(row.converged);
    CHECK(table.rows[1].observed_order >= 1.9);
    CHECK(table.rows[2].observed_order >= 1.9);
    const std::string text = format_convergence_table(table);
    CHECK(text.find("observed_order") != std::string::npos);
}

TEST_CASE("convergence study input validation") {
    ExperimentConfig cfg = oracle_1d_config(OperatorKind::Trace, 1.0, 1.5, 129);
    CHECK_THROWS_AS(convergence_study(cfg, 1), ConfigError);
    cfg.n[0] = 128;
    CHECK_THROWS_AS(convergence_study(cfg, 2), ConfigError);
}

TEST_CASE("report json carries provenance") {
    const ExperimentConfig cfg = oracle_1d_config(OperatorKind::PucciPlus, 2.0, 1.5, 257);
    const ExperimentResult r = run_pipeline(cfg);
    const auto j = report_json(r);
    CHECK(j["operator"]["kind"] == "pucci_plus_d4");
    CHECK(j["beta"] == Catch::Approx(4.0));
    CHECK(j["free_boundary"]["tau"].get<double>() > 0.0);
    CHECK(j["scaling"]["hessian_ratio"]["tau"].get<double>() > 0.0);
    CHECK(j["scaling"]["growth"].contains("radii"));
    CHECK(j["solve"]["converged"].get<bool>());
}
