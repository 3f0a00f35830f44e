#include "dualgfl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualgfl/errors.hpp"

namespace dualgfl {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

int Topology::grid_side() const {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(servers.size()))));
}

Point Topology::bounds_max() const {
  Point p;
  for (const auto& s : servers) {
    p.x = std::max(p.x, s.position.x);
    p.y = std::max(p.y, s.position.y);
  }
  return p;
}

namespace {

void validate(const TopologyConfig& c) {
  if (c.n_servers < 1) throw ConfigError("n_servers", "must be at least 1");
  if (c.n_clients < 1) throw ConfigError("n_clients", "must be at least 1");
  if (!(c.grid_spacing > 0)) throw ConfigError("grid_spacing", "must be positive");
  if (!(c.bandwidth > 0)) throw ConfigError("bandwidth", "must be positive");
  if (!(c.noise_psd > 0)) throw ConfigError("noise_psd", "must be positive");
  if (c.tx_power < 0) throw ConfigError("tx_power", "must be nonnegative");
  if (c.model_size < 0) throw ConfigError("model_size", "must be nonnegative");
  if (!(c.reference_distance > 0)) throw ConfigError("reference_distance", "must be positive");
  if (!(c.path_loss_exponent > 0)) throw ConfigError("path_loss_exponent", "must be positive");
  if (!(c.compute.kappa > 0) || !(c.compute.cycles > 0) || !(c.compute.clock > 0)) {
    throw ConfigError("kappa", "compute parameters must be positive");
  }
  if (c.compute_jitter < 0 || c.compute_jitter >= 1) {
    throw ConfigError("compute_jitter", "must lie in [0, 1)");
  }
  if (!(c.theta_low <= c.theta_high) || c.theta_low < 0) {
    throw ConfigError("theta_low", "need 0 <= theta_low <= theta_high");
  }
  if (c.data_size_min < 1 || c.data_size_min > c.data_size_max) {
    throw ConfigError("data_size_min", "need 1 <= data_size_min <= data_size_max");
  }
}

}  // namespace

Topology generate_topology(const TopologyConfig& config, Rng& rng,
                           std::span<const std::size_t> data_sizes) {
  validate(config);
  if (!data_sizes.empty() && data_sizes.size() != static_cast<std::size_t>(config.n_clients)) {
    throw ConfigError("n_clients", "data size list length differs from n_clients");
  }

  Topology topo;
  topo.model_size = config.model_size;
  topo.grid_spacing = config.grid_spacing;
  topo.bandwidth = config.bandwidth;
  topo.tx_power = config.tx_power;
  topo.noise_psd = config.noise_psd;
  topo.reference_distance = config.reference_distance;
  topo.path_loss_exponent = config.path_loss_exponent;

  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.n_servers))));
  topo.servers.reserve(config.n_servers);
  for (int k = 0; k < config.n_servers; ++k) {
    const double x = (k % side) * config.grid_spacing;
    const double y = (k / side) * config.grid_spacing;
    topo.servers.push_back({k, {x, y}});
  }

  const Point hi = topo.bounds_max();
  topo.clients.reserve(config.n_clients);
  for (int i = 0; i < config.n_clients; ++i) {
    ClientNode c;
    c.id = i;
    c.position = {hi.x > 0 ? rng.uniform(0.0, hi.x) : 0.0, hi.y > 0 ? rng.uniform(0.0, hi.y) : 0.0};
    if (data_sizes.empty()) {
      c.data_size = config.data_size_min +
                    rng.index(config.data_size_max - config.data_size_min + 1);
    } else {
      c.data_size = std::max<std::size_t>(1, data_sizes[i]);
    }
    c.cost_factor = config.theta_low < config.theta_high
                        ? rng.uniform(config.theta_low, config.theta_high)
                        : config.theta_low;
    c.compute = config.compute;
    if (config.compute_jitter > 0) {
      c.compute.cycles *= rng.uniform(1.0 - config.compute_jitter, 1.0 + config.compute_jitter);
    }
    topo.clients.push_back(c);
  }
  return topo;
}

double channel_gain(double distance_km, double reference_distance, double exponent) {
  const double d = std::max(distance_km, reference_distance);
  return std::pow(reference_distance / d, exponent);
}

double uplink_rate(const ChannelParams& ch) {
  return ch.bandwidth * std::log2(1.0 + ch.tx_power * ch.channel_gain / ch.noise_psd);
}

double computation_cost(const ComputeParams& p) { return p.kappa * p.cycles * p.clock * p.clock; }

double communication_cost(double model_size, double rate) {
  if (!(rate > 0)) throw InfeasibleLink("uplink rate is zero; link cannot carry the model");
  return model_size / rate;
}

ChannelParams channel_between(const ClientNode& client, const EdgeServer& server,
                              const Topology& topo) {
  ChannelParams ch;
  ch.bandwidth = topo.bandwidth;
  ch.tx_power = topo.tx_power;
  ch.noise_psd = topo.noise_psd;
  ch.channel_gain = channel_gain(distance(client.position, server.position),
                                 topo.reference_distance, topo.path_loss_exponent);
  return ch;
}

CostBreakdown cost_breakdown(const ClientNode& client, int server, const Topology& topo) {
  if (server < 0 || static_cast<std::size_t>(server) >= topo.servers.size()) {
    throw PreconditionError("unknown edge server id " + std::to_string(server));
  }
  CostBreakdown c;
  c.computation = computation_cost(client.compute);
  c.communication =
      communication_cost(topo.model_size, uplink_rate(channel_between(client, topo.servers[server], topo)));
  c.total = c.computation + client.cost_factor * c.communication;
  return c;
}

double total_cost(const ClientNode& client, int server, const Topology& topo) {
  return cost_breakdown(client, server, topo).total;
}

}  // namespace dualgfl
