#include "dualgfl/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "dualgfl/errors.hpp"

namespace dualgfl {

namespace {

using json = nlohmann::ordered_json;

struct Field {
  std::string key;
  std::string help;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<json(const SimConfig&)> to_json;
};

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ConfigError(std::string(key), "cannot parse '" + std::string(text) + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(std::string(key), "must be finite");
  }
  return value;
}

Field int_field(std::string key, std::string help, int SimConfig::*member) {
  return {key, std::move(help), [member](const SimConfig& c) { return std::to_string(c.*member); },
          [member, key](SimConfig& c, std::string_view v) { c.*member = parse_number<int>(key, v); },
          [member](const SimConfig& c) { return json(c.*member); }};
}

Field double_field(std::string key, std::string help, double SimConfig::*member) {
  return {key, std::move(help), [member](const SimConfig& c) { return format_double(c.*member); },
          [member, key](SimConfig& c, std::string_view v) { c.*member = parse_number<double>(key, v); },
          [member](const SimConfig& c) { return json(c.*member); }};
}

template <typename E>
Field enum_field(std::string key, std::string help, E SimConfig::*member, std::string_view (*name)(E),
                 E (*parse)(std::string_view)) {
  return {std::move(key), std::move(help), [member, name](const SimConfig& c) { return std::string(name(c.*member)); },
          [member, parse](SimConfig& c, std::string_view v) { c.*member = parse(v); },
          [member, name](const SimConfig& c) { return json(std::string(name(c.*member))); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // Game.
    f.push_back(int_field("n_clients", "number of clients N", &SimConfig::n_clients));
    f.push_back(int_field("n_servers", "number of edge servers K", &SimConfig::n_servers));
    f.push_back(int_field("winners_per_round", "coalitions selected per round M (<= K)",
                          &SimConfig::winners_per_round));
    f.push_back(int_field("capacity", "maximum coalition size; capacity * K >= N", &SimConfig::capacity));
    f.push_back(int_field("rounds", "training rounds T", &SimConfig::rounds));
    f.push_back(double_field("ema_alpha", "payoff estimate smoothing in [0, 1]", &SimConfig::ema_alpha));
    f.push_back(double_field("quality_weight", "scoring weight on coalition quality", &SimConfig::quality_weight));
    f.push_back(double_field("budget", "server resource budget per round", &SimConfig::budget));
    f.push_back(double_field("bandwidth_demand", "resource requested per coalition member",
                             &SimConfig::bandwidth_demand));
    f.push_back(double_field("payoff_prior", "initial payoff estimate; negative derives it from costs",
                             &SimConfig::payoff_prior));
    f.push_back(double_field("coalition_theta_low", "lower end of the coalition cost-factor range",
                             &SimConfig::coalition_theta_low));
    f.push_back(double_field("coalition_theta_high", "upper end of the coalition cost-factor range",
                             &SimConfig::coalition_theta_high));
    f.push_back(enum_field("bid_mode", "fixed_quality or strategic_quality", &SimConfig::bid_mode,
                           &bid_mode_name, &parse_bid_mode));
    f.push_back(enum_field("history_mode", "current or none: coalitions a client counts as joined",
                           &SimConfig::history_mode, &history_mode_name, &parse_history_mode));
    f.push_back(int_field("cohort_size", "fedavg/fedavgauc clients per round; 0 matches dualgfl",
                          &SimConfig::cohort_size));
    // Learner.
    f.push_back(int_field("local_epochs", "local epochs I per round", &SimConfig::local_epochs));
    f.push_back(double_field("learning_rate", "local step size", &SimConfig::learning_rate));
    f.push_back(int_field("batch_size", "mini-batch size; 0 means full batch", &SimConfig::batch_size));
    f.push_back(double_field("dirichlet_beta", "label heterogeneity; smaller is more skewed",
                             &SimConfig::dirichlet_beta));
    f.push_back(int_field("train_samples", "synthetic training samples", &SimConfig::train_samples));
    f.push_back(int_field("test_samples", "synthetic test samples", &SimConfig::test_samples));
    f.push_back(int_field("n_features", "feature dimension", &SimConfig::n_features));
    f.push_back(int_field("n_classes", "label classes", &SimConfig::n_classes));
    f.push_back(double_field("class_separation", "spread of class means", &SimConfig::class_separation));
    // Network.
    f.push_back(double_field("grid_spacing", "server grid spacing (km)", &SimConfig::grid_spacing));
    f.push_back(double_field("model_size", "model update size (bits)", &SimConfig::model_size));
    f.push_back(double_field("bandwidth", "uplink bandwidth (Hz)", &SimConfig::bandwidth));
    f.push_back(double_field("tx_power", "transmit power (W)", &SimConfig::tx_power));
    f.push_back(double_field("noise_psd", "noise power spectral density (W/Hz)", &SimConfig::noise_psd));
    f.push_back(double_field("reference_distance", "path-loss reference distance (km)",
                             &SimConfig::reference_distance));
    f.push_back(double_field("path_loss_exponent", "path-loss exponent", &SimConfig::path_loss_exponent));
    f.push_back(double_field("kappa", "CPU architecture coefficient", &SimConfig::kappa));
    f.push_back(double_field("cycles", "CPU cycles per local round", &SimConfig::cycles));
    f.push_back(double_field("clock", "CPU clock (Hz)", &SimConfig::clock));
    f.push_back(double_field("compute_jitter", "relative per-client jitter on CPU cycles",
                             &SimConfig::compute_jitter));
    f.push_back(double_field("theta_low", "lower end of the client cost-factor range", &SimConfig::theta_low));
    f.push_back(double_field("theta_high", "upper end of the client cost-factor range", &SimConfig::theta_high));
    // Run.
    f.push_back({"seed", "random seed",
                 [](const SimConfig& c) { return std::to_string(c.seed); },
                 [](SimConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
                 [](const SimConfig& c) { return json(c.seed); }});
    f.push_back(enum_field("method", "dualgfl, dualgflstat, fedavg, fedavgauc or fedavghed", &SimConfig::method,
                           &method_name, &parse_method));
    return f;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(std::string(key), "unknown configuration key");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::string_view config_key_help(std::string_view key) { return field(key).help; }

void set_config_value(SimConfig& config, std::string_view key, std::string_view value) {
  field(key).set(config, value);
}

std::string get_config_value(const SimConfig& config, std::string_view key) { return field(key).get(config); }

SimConfig parse_config(std::string_view document) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw ConfigError("config", std::string("malformed document: ") + e.what());
  }
  SimConfig config;
  if (root.IsNull()) {
    config.validate();
    return config;
  }
  if (!root.IsMap()) throw ConfigError("config", "document must be a flat key-value mapping");

  std::set<std::string> seen;
  for (const auto& entry : root) {
    if (!entry.first.IsScalar()) throw ConfigError("config", "keys must be scalars");
    const auto key = entry.first.Scalar();
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    if (!entry.second.IsScalar()) throw ConfigError(key, "value must be a scalar (no nesting)");
    set_config_value(config, key, entry.second.Scalar());
  }
  config.validate();
  return config;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string emit_config(const SimConfig& config) {
  std::ostringstream out;
  out << "# dualgfl simulation config: one key per line, no nesting.\n";
  for (const auto& f : fields()) out << f.key << ": " << f.get(config) << "  # " << f.help << '\n';
  return out.str();
}

std::string config_json(const SimConfig& config) {
  json j = json::object();
  for (const auto& f : fields()) j[f.key] = f.to_json(config);
  return j.dump(2);
}

}  // namespace dualgfl
