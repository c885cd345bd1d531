#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "carpetlab/errors.hpp"
#include "carpetlab/experiment.hpp"

using namespace carpetlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("carpetlab_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig config(const std::string& name, int gen) {
    ExperimentConfig c;
    c.experiment = name;
    c.dim = 2;
    c.generations = gen;
    return c;
}

}  // namespace

TEST_CASE("experiment names and validation") {
    const auto& names = experiment_names();
    CHECK(names.size() == 13);
    CHECK(names.back() == "all");

    ExperimentConfig c = config("build", 2);
    CHECK_NOTHROW(validate(c));
    c.experiment = "nonsense";
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = config("build", 2);
    c.dim = 4;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = config("build", 2);
    c.threads = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = config("build", 2);
    c.radii = {3, -1};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = config("build", 2);
    c.walk_dimension = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = config("build", 6);
    c.budget_cells = 1000;
    CHECK_THROWS_AS(validate(c), BudgetExceeded);
    // Experiments that need the reference walk dimension count its graph too.
    c = config("dg", 3);
    c.budget_cells = 100000;
    CHECK_THROWS_AS(validate(c), BudgetExceeded);
    c.walk_dimension = 2.05;
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("run writes json, csv and plot files with the config echoed") {
    const fs::path dir = scratch("build");
    ExperimentConfig c = config("build", 2);
    c.out_dir = dir.string();
    std::ostringstream log;
    CHECK(run(c, log) == 0);
    CHECK(log.str().find("PASS build: cell count") != std::string::npos);

    const auto report = nlohmann::json::parse(slurp(dir / "build.json"));
    CHECK(report["report"]["cells"] == 64);
    CHECK(report["passed"] == true);
    CHECK(report["config"]["generations"] == 2);
    CHECK(!report["claim"].get<std::string>().empty());

    const std::string csv = slurp(dir / "build.csv");
    const std::string config_line = "# config: " + config_to_json(c).dump();
    CHECK(csv.rfind(config_line + "\nx0,x1\n0,0\n", 0) == 0);
    const std::string gp = slurp(dir / "build.gp");
    CHECK(gp.rfind(config_line, 0) == 0);
    CHECK(gp.find("plot 'build.csv'") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical outputs") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const fs::path& dir : {a, b}) {
        ExperimentConfig c = config("dg", 4);
        c.walk_dimension = 2.05;
        c.out_dir = dir.string();
        std::ostringstream log;
        run(c, log);
    }
    for (const std::string ext : {".json", ".csv", ".gp"}) {
        const std::string first = slurp(a / ("dg" + ext));
        CHECK(!first.empty());
        CHECK(first == slurp(b / ("dg" + ext)));
    }
}

TEST_CASE("run status codes") {
    std::ostringstream log;
    ExperimentConfig c = config("nonsense", 2);
    c.out_dir = scratch("status").string();
    CHECK(run(c, log) == 2);
    c = config("build", 7);
    c.budget_cells = 1000;
    CHECK(run(c, log) == 3);
    // A wrong walk dimension makes the on-diagonal check fail: status 1.
    c = config("ondiag", 4);
    c.out_dir = scratch("status").string();
    c.times = {2, 4, 8, 16, 32};
    c.walk_dimension = 10;
    CHECK(run(c, log) == 1);
    // Library-level argument errors are configuration errors too.
    c = config("csa", 4);
    c.walk_dimension = 2.05;
    CHECK(run(c, log) == 2);
}

TEST_CASE("outcome reports every check") {
    ExperimentConfig c = config("exit-times", 4);
    const ExperimentOutcome out = run_experiment(c);
    REQUIRE(out.checks.size() == 2);
    const auto j = out.to_json();
    CHECK(j["checks"].size() == 2);
    CHECK(j["report"]["fit"]["grid"].size() == 5);
    CHECK(j["passed"] == out.passed());
    CHECK(out.table.columns == std::vector<std::string>{"r", "exit_time", "residual"});
}
