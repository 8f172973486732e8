#pragma once
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crn/config.hpp"

namespace crn {

// One sweep's tabulated rows, ready for CSV. Every row carries the seed and
// config hash of the config that produced it plus the solver method used.
struct ExperimentResult {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

const std::vector<std::string>& experiment_names();

// The defaults each experiment starts from (callers may override fields or
// provide a full config of their own before the sweep runs).
ScenarioConfig experiment_defaults(const std::string& name);

// Runs one named sweep end-to-end (generate -> allocate -> optimize ->
// measure). `base` overrides the experiment defaults when provided. Sweep
// points are independent; `jobs` > 1 evaluates them concurrently with the
// rows merged back in sweep order.
ExperimentResult run_experiment(const std::string& name,
                                const std::optional<ScenarioConfig>& base = {},
                                int jobs = 1);

// CSV persistence: header row, '.' decimal, one row per sweep point; numeric
// cells are written with 17 significant digits so files are byte-stable.
void write_results(const ExperimentResult& result,
                   const std::filesystem::path& path);

std::string fmt17(double v);
std::string fmt12(double v);

}  // namespace crn
