#include "dualgfl/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dualgfl/config.hpp"
#include "dualgfl/errors.hpp"

namespace dualgfl {

namespace {

namespace fs = std::filesystem;

constexpr const char* kMetricNames[] = {"total_score", "avg_client_quality", "avg_coalition_quality",
                                        "avg_client_payoff", "avg_client_utility", "test_accuracy"};

std::array<double, 6> metric_values(const RunSummary& r) {
  return {r.total_score, r.avg_client_quality, r.avg_coalition_quality,
          r.avg_client_payoff, r.avg_client_utility, r.test_accuracy};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string sidecar(const SimConfig& cfg, const MetricsLog& log, const std::optional<Ablation>& ablation,
                    std::optional<int> value) {
  nlohmann::ordered_json j;
  j["method"] = std::string(method_name(cfg.method));
  j["seed"] = cfg.seed;
  j["cohort_size"] = log.cohort_size;
  if (ablation && value) {
    j["ablation"] = {{"axis", ablation->axis}, {"value", *value}};
  } else {
    j["ablation"] = nullptr;
  }
  j["config"] = nlohmann::ordered_json::parse(config_json(cfg));
  return j.dump(2) + "\n";
}

// Groups runs by (method, ablation value) in first-seen order.
std::vector<std::vector<const RunSummary*>> group_runs(const std::vector<RunSummary>& runs) {
  std::vector<std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.front()->method == r.method && g.front()->ablation_value == r.ablation_value;
    });
    if (it == groups.end()) {
      groups.push_back({&r});
    } else {
      it->push_back(&r);
    }
  }
  return groups;
}

std::array<double, 6> group_mean(const std::vector<const RunSummary*>& g) {
  std::array<double, 6> sum{};
  for (const auto* r : g) {
    const auto v = metric_values(*r);
    for (std::size_t j = 0; j < v.size(); ++j) sum[j] += v[j];
  }
  for (auto& s : sum) s /= static_cast<double>(g.size());
  return sum;
}

std::string summary_csv(const std::vector<RunSummary>& runs, bool with_ablation, const std::string& axis) {
  std::ostringstream out;
  out << "method";
  if (with_ablation) out << ',' << axis;
  out << ",n_seeds";
  for (const char* m : kMetricNames) out << ',' << m;
  out << '\n';
  for (const auto& g : group_runs(runs)) {
    out << method_name(g.front()->method);
    if (with_ablation) out << ',' << *g.front()->ablation_value;
    out << ',' << g.size();
    for (double v : group_mean(g)) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

// Seed means per (method, value) with each metric also divided by its largest
// magnitude across values of the same method.
std::string ablation_csv(const std::vector<RunSummary>& runs, const std::string& axis) {
  const auto groups = group_runs(runs);
  std::vector<std::array<double, 6>> means;
  for (const auto& g : groups) means.push_back(group_mean(g));

  std::ostringstream out;
  out << "method," << axis;
  for (const char* m : kMetricNames) out << ',' << m;
  for (const char* m : kMetricNames) out << ',' << m << "_norm";
  out << '\n';
  for (std::size_t a = 0; a < groups.size(); ++a) {
    std::array<double, 6> scale{};
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (groups[b].front()->method != groups[a].front()->method) continue;
      for (std::size_t j = 0; j < 6; ++j) scale[j] = std::max(scale[j], std::abs(means[b][j]));
    }
    out << method_name(groups[a].front()->method) << ',' << *groups[a].front()->ablation_value;
    for (double v : means[a]) out << ',' << format_double(v);
    for (std::size_t j = 0; j < 6; ++j) out << ',' << format_double(scale[j] > 0 ? means[a][j] / scale[j] : 0.0);
    out << '\n';
  }
  return out.str();
}

}  // namespace

Ablation parse_ablation(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("ablation", "expected axis=v1,v2,...");
  Ablation a;
  a.axis = std::string(text.substr(0, eq));
  if (a.axis != "capacity") throw ConfigError("ablation", "unsupported axis '" + a.axis + "' (only capacity)");
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw ConfigError("ablation", "cannot parse '" + std::string(item) + "' as an integer");
    }
    if (v <= 0) throw ConfigError("ablation", "values must be positive");
    a.values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (a.values.empty()) throw ConfigError("ablation", "no values given");
  return a;
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("seed", "at least one seed is required");
  if (methods.empty()) throw ConfigError("method", "at least one method is required");
  if (ablation) {
    if (ablation->values.empty()) throw ConfigError("ablation", "no values given");
    for (int v : ablation->values) {
      if (v <= 0) throw ConfigError("ablation", "values must be positive");
    }
  }
  base.validate();
}

RunSummary summarize(const MetricsLog& log) {
  RunSummary s;
  s.method = log.method;
  s.seed = log.seed;
  if (log.records.empty()) return s;
  for (const auto& r : log.records) {
    s.total_score += r.total_score;
    s.avg_client_quality += r.avg_client_quality;
    s.avg_coalition_quality += r.avg_coalition_quality;
    s.avg_client_payoff += r.avg_client_payoff;
    s.avg_client_utility += r.avg_client_utility;
  }
  const double t = static_cast<double>(log.records.size());
  s.total_score /= t;
  s.avg_client_quality /= t;
  s.avg_coalition_quality /= t;
  s.avg_client_payoff /= t;
  s.avg_client_utility /= t;
  s.test_accuracy = log.records.back().test_accuracy;
  return s;
}

std::string run_stem(Method method, std::uint64_t seed, std::optional<int> ablation_value) {
  std::string stem(method_name(method));
  if (ablation_value) stem += "_cap" + std::to_string(*ablation_value);
  return stem + "_seed" + std::to_string(seed);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec || !fs::is_directory(spec.out_dir)) {
    throw IoError("cannot create output directory " + spec.out_dir.string());
  }

  std::vector<std::optional<int>> values;
  if (spec.ablation) {
    for (int v : spec.ablation->values) values.emplace_back(v);
  } else {
    values.emplace_back(std::nullopt);
  }

  ExperimentResult result;
  for (const auto& value : values) {
    for (Method method : spec.methods) {
      for (std::uint64_t seed : spec.seeds) {
        SimConfig cfg = spec.base;
        cfg.method = method;
        cfg.seed = seed;
        if (value) cfg.capacity = *value;
        cfg.validate();
        const MetricsLog log = run_simulation(cfg);

        const std::string stem = run_stem(method, seed, value);
        const fs::path csv = spec.out_dir / (stem + ".csv");
        const fs::path side = spec.out_dir / (stem + ".json");
        write_file(csv, metrics_csv(log));
        write_file(side, sidecar(cfg, log, spec.ablation, value));
        result.files.push_back(csv);
        result.files.push_back(side);

        RunSummary s = summarize(log);
        s.ablation_value = value;
        s.csv = csv;
        result.runs.push_back(std::move(s));
      }
    }
  }

  const std::string axis = spec.ablation ? spec.ablation->axis : "";
  const fs::path summary = spec.out_dir / "summary.csv";
  write_file(summary, summary_csv(result.runs, spec.ablation.has_value(), axis));
  result.files.push_back(summary);
  if (spec.ablation) {
    const fs::path table = spec.out_dir / "ablation.csv";
    write_file(table, ablation_csv(result.runs, axis));
    result.files.push_back(table);
  }
  return result;
}

}  // namespace dualgfl
