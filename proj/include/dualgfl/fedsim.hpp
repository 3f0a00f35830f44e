#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualgfl/auction.hpp"
#include "dualgfl/hedonic.hpp"
#include "dualgfl/learner.hpp"
#include "dualgfl/preference.hpp"
#include "dualgfl/topology.hpp"

namespace dualgfl {

enum class Method { DualGFL, DualGFLStat, FedAvg, FedAvgAuc, FedAvgHed };

std::string_view method_name(Method m);
// Throws ConfigError("method", ...) for unknown names.
Method parse_method(std::string_view name);
// Methods whose clients form coalitions through the hedonic game.
bool uses_coalitions(Method m);

enum class BidMode { FixedQuality, StrategicQuality };
std::string_view bid_mode_name(BidMode m);
BidMode parse_bid_mode(std::string_view name);

// Which coalitions count as already joined when a client ranks candidates.
enum class HistoryMode { Current, None };
std::string_view history_mode_name(HistoryMode m);
HistoryMode parse_history_mode(std::string_view name);

struct SimConfig {
  // Game.
  int n_clients = 50;
  int n_servers = 9;
  int winners_per_round = 3;
  int capacity = 10;
  int rounds = 100;
  double ema_alpha = 0.5;
  double quality_weight = 0.1;
  double budget = 30.0;
  double bandwidth_demand = 1.0;
  double payoff_prior = -1.0;  // negative: derive from the cost scale
  double coalition_theta_low = 0.5;
  double coalition_theta_high = 1.5;
  BidMode bid_mode = BidMode::FixedQuality;
  HistoryMode history_mode = HistoryMode::Current;
  int cohort_size = 0;  // FedAvg/FedAvgAuc cohort; 0 matches DualGFL's mean

  // Learner.
  int local_epochs = 3;
  double learning_rate = 0.05;
  int batch_size = 32;
  double dirichlet_beta = 0.5;
  int train_samples = 10000;
  int test_samples = 2000;
  int n_features = 32;
  int n_classes = 10;
  double class_separation = 0.6;

  // Network.
  double grid_spacing = 100.0;
  double model_size = 6e7;
  double bandwidth = 1e6;
  double tx_power = 0.2;
  double noise_psd = 2e-7;
  double reference_distance = 1.0;
  double path_loss_exponent = 2.0;
  double kappa = 1e-28;
  double cycles = 1.25e10;
  double clock = 2e9;
  double compute_jitter = 0.2;
  double theta_low = 0.5;
  double theta_high = 1.5;

  std::uint64_t seed = 1;
  Method method = Method::DualGFL;

  // Throws ConfigError naming the first offending key.
  void validate() const;
  TopologyConfig topology_config() const;

  bool operator==(const SimConfig&) const = default;
};

struct RoundRecord {
  int round = 0;
  Method method = Method::DualGFL;
  std::vector<int> partition;  // client -> server; empty for client-level methods
  std::vector<int> winners;    // coalition ids (client ids for client-level methods)
  std::vector<Bid> winner_bids;
  double total_score = 0.0;
  double avg_client_quality = 0.0;
  double avg_coalition_quality = 0.0;
  double avg_client_payoff = 0.0;
  double avg_client_utility = 0.0;
  double cum_total_score = 0.0;
  double cum_avg_client_quality = 0.0;
  double cum_avg_coalition_quality = 0.0;
  double cum_avg_client_payoff = 0.0;
  double cum_avg_client_utility = 0.0;
  double test_accuracy = 0.0;
  int n_winning_clients = 0;
  std::vector<double> client_payoffs;    // per client, zero when idle
  std::vector<double> client_utilities;  // per client, zero when idle

  // Bookkeeping for conservation checks.
  double contract_price_sum = 0.0;
  double payoff_sum = 0.0;
  double aggregation_weight_sum = 0.0;   // normalised participant weights
  double hierarchical_flat_gap = 0.0;    // max |hierarchical - flat| parameter
};

struct MetricsLog {
  Method method = Method::DualGFL;
  std::uint64_t seed = 0;
  int cohort_size = 0;
  std::vector<RoundRecord> records;
};

struct SimOptions {
  // Skipping local training leaves every game quantity unchanged; only the
  // model and test accuracy stay at their initial values.
  bool train = true;
};

// Stateful round driver over one (config, seed).
class Simulation {
 public:
  explicit Simulation(SimConfig config, SimOptions options = {});
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  RoundRecord run_round();

  const SimConfig& config() const;
  const Topology& topology() const;
  const LearnerDataset& dataset() const;
  const PayoffEstimator& estimator() const;
  const GlobalModel& model() const;
  int cohort_size() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// FedAvg/FedAvgAuc cohort size: the configured value, or the rounded mean
// winning-client count of a DualGFL run with the same config and seed.
int resolve_cohort_size(const SimConfig& config);

MetricsLog run_simulation(const SimConfig& config, SimOptions options = {});

// CSV with one row per round; the header is metrics_csv_header().
std::string metrics_csv_header();
std::string metrics_csv(const MetricsLog& log);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

}  // namespace dualgfl
