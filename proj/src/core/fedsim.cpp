#include "dualgfl/fedsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dualgfl/errors.hpp"

namespace dualgfl {

namespace {

constexpr Method kMethods[] = {Method::DualGFL, Method::DualGFLStat, Method::FedAvg, Method::FedAvgAuc,
                               Method::FedAvgHed};

// Stream tags; each stochastic concern draws from its own stream so that
// skipping training cannot perturb the game.
enum StreamTag : std::uint64_t { kTopology = 1, kData = 2, kPartition = 3, kSelection = 4, kTraining = 5 };

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::DualGFL: return "dualgfl";
    case Method::DualGFLStat: return "dualgflstat";
    case Method::FedAvg: return "fedavg";
    case Method::FedAvgAuc: return "fedavgauc";
    case Method::FedAvgHed: return "fedavghed";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kMethods) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("method", "unknown method '" + std::string(name) +
                                  "' (expected dualgfl, dualgflstat, fedavg, fedavgauc or fedavghed)");
}

bool uses_coalitions(Method m) {
  return m == Method::DualGFL || m == Method::DualGFLStat || m == Method::FedAvgHed;
}

std::string_view bid_mode_name(BidMode m) {
  return m == BidMode::FixedQuality ? "fixed_quality" : "strategic_quality";
}

BidMode parse_bid_mode(std::string_view name) {
  if (name == "fixed_quality") return BidMode::FixedQuality;
  if (name == "strategic_quality") return BidMode::StrategicQuality;
  throw ConfigError("bid_mode", "expected fixed_quality or strategic_quality");
}

std::string_view history_mode_name(HistoryMode m) {
  return m == HistoryMode::Current ? "current" : "none";
}

HistoryMode parse_history_mode(std::string_view name) {
  if (name == "current") return HistoryMode::Current;
  if (name == "none") return HistoryMode::None;
  throw ConfigError("history_mode", "expected current or none");
}

void SimConfig::validate() const {
  if (n_clients < 1) throw ConfigError("n_clients", "must be at least 1");
  if (n_servers < 1) throw ConfigError("n_servers", "must be at least 1");
  if (winners_per_round < 1) throw ConfigError("winners_per_round", "must be at least 1");
  if (winners_per_round > n_servers) {
    throw ConfigError("winners_per_round", "must not exceed n_servers");
  }
  if (capacity < 1) throw ConfigError("capacity", "must be at least 1");
  if (static_cast<long long>(capacity) * n_servers < n_clients) {
    throw ConfigError("capacity", "capacity * n_servers must cover n_clients");
  }
  if (rounds < 1) throw ConfigError("rounds", "must be at least 1");
  if (local_epochs < 1) throw ConfigError("local_epochs", "must be at least 1");
  if (!(learning_rate >= 0)) throw ConfigError("learning_rate", "must be nonnegative");
  if (batch_size < 0) throw ConfigError("batch_size", "must be nonnegative");
  if (!(ema_alpha >= 0 && ema_alpha <= 1)) throw ConfigError("ema_alpha", "must lie in [0, 1]");
  if (!(quality_weight >= 0)) throw ConfigError("quality_weight", "must be nonnegative");
  if (!(budget > 0)) throw ConfigError("budget", "must be positive");
  if (!(bandwidth_demand > 0)) throw ConfigError("bandwidth_demand", "must be positive");
  if (!(dirichlet_beta > 0)) throw ConfigError("dirichlet_beta", "must be positive");
  if (!(coalition_theta_low < coalition_theta_high) || coalition_theta_low < 0) {
    throw ConfigError("coalition_theta_low", "need 0 <= coalition_theta_low < coalition_theta_high");
  }
  if (!(theta_low < theta_high) || theta_low < 0) {
    throw ConfigError("theta_low", "need 0 <= theta_low < theta_high");
  }
  if (cohort_size < 0 || cohort_size > n_clients) {
    throw ConfigError("cohort_size", "must lie in [0, n_clients]");
  }
  if (train_samples < n_clients) throw ConfigError("train_samples", "must be at least n_clients");
  if (test_samples < 1) throw ConfigError("test_samples", "must be positive");
  if (n_features < 1) throw ConfigError("n_features", "must be positive");
  if (n_classes < 2) throw ConfigError("n_classes", "must be at least 2");
  if (!(class_separation >= 0)) throw ConfigError("class_separation", "must be nonnegative");
  if (!(grid_spacing > 0)) throw ConfigError("grid_spacing", "must be positive");
  if (!(model_size >= 0)) throw ConfigError("model_size", "must be nonnegative");
  if (!(bandwidth > 0)) throw ConfigError("bandwidth", "must be positive");
  if (!(tx_power >= 0)) throw ConfigError("tx_power", "must be nonnegative");
  if (!(noise_psd > 0)) throw ConfigError("noise_psd", "must be positive");
  if (!(reference_distance > 0)) throw ConfigError("reference_distance", "must be positive");
  if (!(path_loss_exponent > 0)) throw ConfigError("path_loss_exponent", "must be positive");
  if (!(kappa > 0)) throw ConfigError("kappa", "must be positive");
  if (!(cycles > 0)) throw ConfigError("cycles", "must be positive");
  if (!(clock > 0)) throw ConfigError("clock", "must be positive");
  if (!(compute_jitter >= 0 && compute_jitter < 1)) throw ConfigError("compute_jitter", "must lie in [0, 1)");
}

TopologyConfig SimConfig::topology_config() const {
  TopologyConfig t;
  t.n_clients = n_clients;
  t.n_servers = n_servers;
  t.grid_spacing = grid_spacing;
  t.model_size = model_size;
  t.bandwidth = bandwidth;
  t.tx_power = tx_power;
  t.noise_psd = noise_psd;
  t.reference_distance = reference_distance;
  t.path_loss_exponent = path_loss_exponent;
  t.compute = {kappa, cycles, clock};
  t.compute_jitter = compute_jitter;
  t.theta_low = theta_low;
  t.theta_high = theta_high;
  return t;
}

struct Simulation::State {
  SimConfig cfg;
  SimOptions options;
  Topology topo;
  LearnerDataset data;
  SoftmaxRegression learner;
  GlobalModel model;
  PayoffEstimator estimator;
  ScoringWeights weights;
  std::optional<Partition> previous;
  Rng partition_rng;
  Rng selection_rng;
  int round = 0;
  int cohort = 0;
  double cum[5] = {0, 0, 0, 0, 0};

  // Per-client cost at every server; NaN marks an infeasible link.
  std::vector<std::vector<CostBreakdown>> costs;
  // Client-level methods anchor each client at its cheapest server.
  std::vector<int> home_server;

  State(SimConfig c, SimOptions o)
      : cfg(std::move(c)),
        options(o),
        learner(static_cast<std::size_t>(cfg.n_features), static_cast<std::size_t>(cfg.n_classes)),
        estimator(cfg.ema_alpha, 0.0),
        weights{{cfg.quality_weight}},
        partition_rng(Rng::derive(cfg.seed, kPartition)),
        selection_rng(Rng::derive(cfg.seed, kSelection)) {}
};

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool feasible(const CostBreakdown& c) { return std::isfinite(c.total); }

}  // namespace

Simulation::Simulation(SimConfig config, SimOptions options) {
  config.validate();
  state_ = std::make_unique<State>(std::move(config), options);
  State& s = *state_;
  const SimConfig& cfg = s.cfg;

  SyntheticTaskConfig task_cfg;
  task_cfg.n_classes = static_cast<std::size_t>(cfg.n_classes);
  task_cfg.n_features = static_cast<std::size_t>(cfg.n_features);
  task_cfg.train_samples = static_cast<std::size_t>(cfg.train_samples);
  task_cfg.test_samples = static_cast<std::size_t>(cfg.test_samples);
  task_cfg.class_separation = cfg.class_separation;
  Rng data_rng = Rng::derive(cfg.seed, kData);
  s.data = make_learner_dataset(make_gaussian_mixture(task_cfg, data_rng), cfg.n_clients,
                                cfg.dirichlet_beta, data_rng);

  Rng topo_rng = Rng::derive(cfg.seed, kTopology);
  const auto sizes = s.data.client_sizes();
  s.topo = generate_topology(cfg.topology_config(), topo_rng, sizes);

  s.costs.assign(cfg.n_clients, std::vector<CostBreakdown>(cfg.n_servers));
  s.home_server.assign(cfg.n_clients, 0);
  double cost_scale = 0.0;
  for (int i = 0; i < cfg.n_clients; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.n_servers; ++k) {
      try {
        s.costs[i][k] = cost_breakdown(s.topo.clients[i], k, s.topo);
      } catch (const InfeasibleLink&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.costs[i][k] = {nan, nan, nan};
        continue;
      }
      if (s.costs[i][k].total < best) {
        best = s.costs[i][k].total;
        s.home_server[i] = k;
      }
    }
    if (std::isfinite(best)) cost_scale += best;
  }
  cost_scale /= cfg.n_clients;

  // Cold-start estimate: contract price of an average-sized coalition,
  // discounted by uniform winning odds M/K.
  double prior = cfg.payoff_prior;
  if (prior < 0) {
    const double members = static_cast<double>(cfg.n_clients) / cfg.n_servers;
    prior = static_cast<double>(cfg.winners_per_round) / cfg.n_servers * members * cost_scale;
  }
  s.estimator = PayoffEstimator(cfg.ema_alpha, prior);

  s.model = s.learner.initial_model();
  s.cohort = uses_coalitions(cfg.method) ? 0 : resolve_cohort_size(cfg);
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

const SimConfig& Simulation::config() const { return state_->cfg; }
const Topology& Simulation::topology() const { return state_->topo; }
const LearnerDataset& Simulation::dataset() const { return state_->data; }
const PayoffEstimator& Simulation::estimator() const { return state_->estimator; }
const GlobalModel& Simulation::model() const { return state_->model; }
int Simulation::cohort_size() const { return state_->cohort; }

namespace {

// A group of clients that wins or loses together: a coalition for the
// coalition methods, a single client otherwise.
struct Contender {
  int id = 0;
  int server = 0;
  std::vector<int> members;
  EquilibriumBid bid;
};

// Selects indices into `bids` by sampling without replacement with the given
// weights (uniform when all weights vanish), admitting a draw only if it fits
// the remaining budget.
std::vector<std::size_t> sample_within_budget(std::span<const Bid> bids, std::vector<double> weight,
                                              std::size_t max_winners, double budget, Rng& rng) {
  std::vector<std::size_t> pool(bids.size());
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> chosen;
  double spent = 0.0;
  while (!pool.empty() && chosen.size() < max_winners) {
    double total = 0.0;
    for (auto k : pool) total += weight[k];
    std::size_t pick = 0;
    if (total > 0) {
      double u = rng.uniform(0.0, total);
      pick = pool.size() - 1;
      for (std::size_t p = 0; p < pool.size(); ++p) {
        u -= weight[pool[p]];
        if (u < 0) {
          pick = p;
          break;
        }
      }
    } else {
      pick = rng.index(pool.size());
    }
    const std::size_t k = pool[pick];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    if (spent + bids[k].resource > budget) continue;
    spent += bids[k].resource;
    chosen.push_back(k);
  }
  return chosen;
}

}  // namespace

RoundRecord Simulation::run_round() {
  State& s = *state_;
  const SimConfig& cfg = s.cfg;
  const int n = cfg.n_clients;
  const int k_servers = cfg.n_servers;

  RoundRecord rec;
  rec.round = s.round;
  rec.method = cfg.method;
  rec.client_payoffs.assign(n, 0.0);
  rec.client_utilities.assign(n, 0.0);

  std::vector<Contender> contenders;

  if (uses_coalitions(cfg.method)) {
    // (1) Preference profiles against last round's coalitions.
    std::vector<CoalitionSnapshot> snapshots(k_servers);
    for (int k = 0; k < k_servers; ++k) {
      snapshots[k].id = k;
      if (s.previous) snapshots[k].members = s.previous->coalitions[k];
    }
    HedonicInstance inst;
    inst.n_servers = k_servers;
    inst.capacity = cfg.capacity;
    inst.data_sizes = s.data.client_sizes();
    inst.profiles.reserve(n);
    for (int i = 0; i < n; ++i) {
      ClientHistory history;
      if (s.previous && cfg.history_mode == HistoryMode::Current) {
        history.joined.insert(s.previous->assignment[i]);
      }
      inst.profiles.push_back(
          build_preference_profile(i, snapshots, s.estimator, history, s.topo).ranking);
    }

    // (2) Pareto-optimal partition.
    Partition partition = pop(inst, s.partition_rng);
    rec.partition = partition.assignment;

    // (3) Equilibrium bids of every nonempty coalition.
    int bidders = 0;
    for (const auto& members : partition.coalitions) bidders += !members.empty();
    const auto dist = CostDistribution::uniform(cfg.coalition_theta_low, cfg.coalition_theta_high);
    for (int k = 0; k < k_servers; ++k) {
      const auto& members = partition.coalitions[k];
      if (members.empty()) continue;
      double computation = 0.0, communication = 0.0, weighted_theta = 0.0, data = 0.0;
      bool ok = true;
      for (int i : members) {
        const auto& c = s.costs[i][k];
        ok = ok && feasible(c);
        computation += c.computation;
        communication += c.communication;
        weighted_theta += s.topo.clients[i].cost_factor * c.communication;
        data += static_cast<double>(s.topo.clients[i].data_size);
      }
      if (!ok) continue;
      // Coalition cost factor: communication-weighted mean of the members',
      // so C_k(theta_k) equals the summed member costs.
      double theta = communication > 0 ? weighted_theta / communication : cfg.coalition_theta_low;
      theta = std::clamp(theta, cfg.coalition_theta_low, cfg.coalition_theta_high);
      const CoalitionCost model(computation, communication, data);
      const std::vector<double> q0{data};
      const QualityDomain domain = cfg.bid_mode == BidMode::FixedQuality
                                       ? QualityDomain::point(q0)
                                       : QualityDomain::box(1, 0.0, data);
      Contender c;
      c.id = k;
      c.server = k;
      c.members = members;
      c.bid = equilibrium_bid(model, theta, dist, std::max(bidders, 2), s.weights, domain,
                              cfg.bandwidth_demand * static_cast<double>(members.size()), k);
      contenders.push_back(std::move(c));
    }
  } else {
    // Client-level methods: every client bids alone from its cheapest server.
    const auto dist = CostDistribution::uniform(cfg.theta_low, cfg.theta_high);
    for (int i = 0; i < n; ++i) {
      const int k = s.home_server[i];
      const auto& c = s.costs[i][k];
      if (!feasible(c)) continue;
      const double data = static_cast<double>(s.topo.clients[i].data_size);
      const CoalitionCost model(c.computation, c.communication, data);
      const std::vector<double> q0{data};
      const QualityDomain domain = cfg.bid_mode == BidMode::FixedQuality
                                       ? QualityDomain::point(q0)
                                       : QualityDomain::box(1, 0.0, data);
      const double theta = std::clamp(s.topo.clients[i].cost_factor, cfg.theta_low, cfg.theta_high);
      Contender ct;
      ct.id = i;
      ct.server = k;
      ct.members = {i};
      ct.bid = equilibrium_bid(model, theta, dist, std::max(n, 2), s.weights, domain,
                               cfg.bandwidth_demand, i);
      contenders.push_back(std::move(ct));
    }
  }

  // (4) Winner selection.
  std::vector<Bid> bids;
  bids.reserve(contenders.size());
  for (const auto& c : contenders) bids.push_back(c.bid.bid);

  std::vector<std::size_t> chosen;
  auto index_of = [&](int id) {
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (bids[j].coalition == id) return j;
    }
    throw PreconditionError("winner id missing from bids");
  };
  const auto m = static_cast<std::size_t>(cfg.winners_per_round);
  switch (cfg.method) {
    case Method::DualGFL: {
      for (int id : select_winners_greedy(bids, s.weights, m, cfg.budget).winners) chosen.push_back(index_of(id));
      break;
    }
    case Method::DualGFLStat: {
      std::vector<double> w;
      for (const auto& b : bids) w.push_back(std::max(0.0, score(b, s.weights)));
      chosen = sample_within_budget(bids, std::move(w), m, cfg.budget, s.selection_rng);
      break;
    }
    case Method::FedAvgHed: {
      chosen = sample_within_budget(bids, std::vector<double>(bids.size(), 1.0), m, cfg.budget,
                                    s.selection_rng);
      break;
    }
    case Method::FedAvgAuc: {
      const auto cohort = static_cast<std::size_t>(s.cohort);
      for (int id : select_winners_greedy(bids, s.weights, cohort, cfg.budget).winners) {
        chosen.push_back(index_of(id));
      }
      break;
    }
    case Method::FedAvg: {
      std::vector<std::size_t> pool(bids.size());
      std::iota(pool.begin(), pool.end(), 0);
      s.selection_rng.shuffle(pool);
      pool.resize(std::min(pool.size(), static_cast<std::size_t>(s.cohort)));
      std::sort(pool.begin(), pool.end());
      chosen = std::move(pool);
      break;
    }
  }
  const std::size_t slots = uses_coalitions(cfg.method) ? m : static_cast<std::size_t>(s.cohort);
  const AuctionOutcome outcome = outcome_for(bids, chosen, s.weights, slots);
  rec.winners = outcome.winners;
  rec.total_score = outcome.total_score;

  // (5) Local training and hierarchical aggregation over the winners.
  std::vector<std::vector<ModelUpdate>> groups;
  std::vector<ModelUpdate> flat;
  LocalTrainConfig train_cfg{cfg.local_epochs, cfg.learning_rate, static_cast<std::size_t>(cfg.batch_size)};
  if (s.options.train) {
    for (auto idx : chosen) {
      std::vector<ModelUpdate> group;
      for (int i : contenders[idx].members) {
        Rng rng = Rng::derive(cfg.seed ^ (0x9e37ULL * (static_cast<std::uint64_t>(s.round) + 1)),
                              (static_cast<std::uint64_t>(kTraining) << 32) + static_cast<std::uint64_t>(i));
        auto params = local_train(s.learner, s.model, s.data.train, s.data.client_indices[i], train_cfg, rng);
        if (!params) continue;
        group.push_back({std::move(*params), static_cast<double>(s.data.client_indices[i].size())});
      }
      flat.insert(flat.end(), group.begin(), group.end());
      groups.push_back(std::move(group));
    }
    if (auto next = aggregate_hierarchical(groups)) {
      const auto flat_model = aggregate(flat);
      double gap = 0.0;
      for (std::size_t p = 0; p < next->parameters.size(); ++p) {
        gap = std::max(gap, std::abs(next->parameters[p] - flat_model->parameters[p]));
      }
      rec.hierarchical_flat_gap = gap;
      std::vector<double> raw;
      for (const auto& u : flat) raw.push_back(u.weight);
      const auto w = normalized_weights(raw);
      rec.aggregation_weight_sum = std::accumulate(w.begin(), w.end(), 0.0);
      s.model = std::move(*next);
    }
  }
  rec.test_accuracy = s.learner.accuracy(s.model.parameters, s.data.test);

  // (6) Payoff distribution and payoff estimates.
  std::vector<double> win_quality, win_payoff, win_utility, coalition_quality;
  std::vector<char> won(k_servers, 0);
  for (auto idx : chosen) {
    const Contender& c = contenders[idx];
    const Bid& bid = c.bid.bid;
    rec.winner_bids.push_back(bid);
    rec.contract_price_sum += bid.price;
    coalition_quality.push_back(bid.qualities.front());

    std::vector<double> data;
    for (int i : c.members) data.push_back(static_cast<double>(s.topo.clients[i].data_size));
    const auto payoffs = distribute_payoffs(bid.price, data);
    for (std::size_t j = 0; j < c.members.size(); ++j) {
      const int i = c.members[j];
      const double utility = client_utility(payoffs[j], s.costs[i][c.server].total);
      rec.client_payoffs[i] = payoffs[j];
      rec.client_utilities[i] = utility;
      rec.payoff_sum += payoffs[j];
      win_quality.push_back(data[j]);
      win_payoff.push_back(payoffs[j]);
      win_utility.push_back(utility);
    }
    if (uses_coalitions(cfg.method)) {
      won[c.id] = 1;
      s.estimator.update(c.id, bid.price, true);
    }
  }
  if (uses_coalitions(cfg.method)) {
    for (int k = 0; k < k_servers; ++k) {
      if (!won[k]) s.estimator.update(k, 0.0, false);
    }
    s.previous = Partition::from_assignment(rec.partition, k_servers);
  }

  rec.n_winning_clients = static_cast<int>(win_quality.size());
  rec.avg_client_quality = mean_of(win_quality);
  rec.avg_coalition_quality = mean_of(coalition_quality);
  rec.avg_client_payoff = mean_of(win_payoff);
  rec.avg_client_utility = mean_of(win_utility);

  const double t = static_cast<double>(s.round);
  const double now[5] = {rec.total_score, rec.avg_client_quality, rec.avg_coalition_quality,
                         rec.avg_client_payoff, rec.avg_client_utility};
  for (int j = 0; j < 5; ++j) s.cum[j] = (s.cum[j] * t + now[j]) / (t + 1.0);
  rec.cum_total_score = s.cum[0];
  rec.cum_avg_client_quality = s.cum[1];
  rec.cum_avg_coalition_quality = s.cum[2];
  rec.cum_avg_client_payoff = s.cum[3];
  rec.cum_avg_client_utility = s.cum[4];

  ++s.round;
  return rec;
}

int resolve_cohort_size(const SimConfig& config) {
  if (config.cohort_size > 0) return config.cohort_size;
  SimConfig reference = config;
  reference.method = Method::DualGFL;
  reference.cohort_size = 0;
  Simulation sim(reference, SimOptions{false});
  double total = 0.0;
  for (int r = 0; r < reference.rounds; ++r) total += sim.run_round().n_winning_clients;
  const int cohort = static_cast<int>(std::lround(total / reference.rounds));
  return std::clamp(cohort, 1, config.n_clients);
}

MetricsLog run_simulation(const SimConfig& config, SimOptions options) {
  Simulation sim(config, options);
  MetricsLog log;
  log.method = config.method;
  log.seed = config.seed;
  log.cohort_size = sim.cohort_size();
  log.records.reserve(config.rounds);
  for (int r = 0; r < config.rounds; ++r) log.records.push_back(sim.run_round());
  return log;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string metrics_csv_header() {
  return "round,method,total_score,avg_client_quality,avg_coalition_quality,avg_client_payoff,"
         "avg_client_utility,cum_total_score,cum_avg_client_quality,cum_avg_coalition_quality,"
         "cum_avg_client_payoff,cum_avg_client_utility,test_accuracy,n_winning_clients";
}

std::string metrics_csv(const MetricsLog& log) {
  std::ostringstream out;
  out << metrics_csv_header() << '\n';
  for (const auto& r : log.records) {
    out << r.round << ',' << method_name(r.method) << ',' << format_double(r.total_score) << ','
        << format_double(r.avg_client_quality) << ',' << format_double(r.avg_coalition_quality) << ','
        << format_double(r.avg_client_payoff) << ',' << format_double(r.avg_client_utility) << ','
        << format_double(r.cum_total_score) << ',' << format_double(r.cum_avg_client_quality) << ','
        << format_double(r.cum_avg_coalition_quality) << ',' << format_double(r.cum_avg_client_payoff)
        << ',' << format_double(r.cum_avg_client_utility) << ',' << format_double(r.test_accuracy) << ','
        << r.n_winning_clients << '\n';
  }
  return out.str();
}

}  // namespace dualgfl
