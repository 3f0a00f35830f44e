#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualgfl/fedsim.hpp"

namespace dualgfl {

// Sweep of one config key over a list of values. Only "capacity" is supported.
struct Ablation {
  std::string axis = "capacity";
  std::vector<int> values;
};

// Parses "capacity=6,8,10,15". Throws ConfigError("ablation", ...).
Ablation parse_ablation(std::string_view text);

struct ExperimentSpec {
  SimConfig base;
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  std::filesystem::path out_dir;
  std::optional<Ablation> ablation;

  // Throws ConfigError: no seeds, no methods, or a non-positive ablation value.
  void validate() const;
};

// Per-run figures reported in the summary: round means of the five metrics
// and the final test accuracy.
struct RunSummary {
  Method method = Method::DualGFL;
  std::uint64_t seed = 0;
  std::optional<int> ablation_value;
  double total_score = 0.0;
  double avg_client_quality = 0.0;
  double avg_coalition_quality = 0.0;
  double avg_client_payoff = 0.0;
  double avg_client_utility = 0.0;
  double test_accuracy = 0.0;
  std::filesystem::path csv;
};

RunSummary summarize(const MetricsLog& log);

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<std::filesystem::path> files;  // every file written, in order
};

// <method>[_cap<v>]_seed<seed>
std::string run_stem(Method method, std::uint64_t seed, std::optional<int> ablation_value);

// Writes one CSV and JSON sidecar per (method, seed, ablation value), then
// summary.csv with per-method means across seeds, and ablation.csv when an
// ablation is set. Throws IoError if the output directory is unusable.
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace dualgfl
