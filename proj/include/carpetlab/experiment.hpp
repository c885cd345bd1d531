#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "carpetlab/carpet.hpp"

namespace carpetlab {

struct ExperimentConfig {
    std::string experiment;
    int dim = 0;               // 0: experiment default (3 for scom, 2 otherwise)
    int generations = 0;       // 0: experiment default
    std::uint64_t seed = 1;
    std::vector<double> p;     // empty: experiment default grid
    std::vector<double> radii;
    std::vector<double> times;
    double walk_dimension = 0; // 0: use the fitted reference value
    std::string out_dir = ".";
    int threads = 1;
    std::int64_t budget_cells = kDefaultCellBudget;
};

/// Invalid experiment name or parameter combination.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Names accepted by --experiment, in the order "all" runs them.
const std::vector<std::string>& experiment_names();

/// Throws ConfigError for bad settings and BudgetExceeded when the largest
/// graph the experiment builds is over the cell budget.
void validate(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // how value is compared with bound, e.g. "<=", "in"
    double bound = 0.0;
    double bound_hi = 0.0; // upper end for "in"
    bool passed = false;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct PlotSeries {
    int x = 1;  // 1-based CSV columns
    int y = 2;
    std::string style = "points";
    std::string title;
};

struct PlotSpec {
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<PlotSeries> series;
    /// Optional fitted power law y = exp(intercept) x^slope (or a line when not log-log).
    bool fit_line = false;
    double slope = 0.0;
    double intercept = 0.0;
};

struct ExperimentOutcome {
    std::string name;       // output file stem
    std::string claim;      // what the experiment checks
    nlohmann::json config;
    nlohmann::json report;
    std::vector<Check> checks;
    Table table;
    PlotSpec plot;

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Runs one named experiment (not "all") without writing files.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

void write_outputs(const ExperimentOutcome& outcome, const std::string& out_dir);

/// Validates, runs, writes <out>/<name>.{json,csv,gp} and logs one line per
/// check. Returns 0 when every check passes, 1 otherwise, 2 for invalid
/// configuration and 3 when a budget is exceeded.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace carpetlab
