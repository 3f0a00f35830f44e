#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dualgfl/rng.hpp"

namespace dualgfl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

// CPU model of a client: energy per local round is kappa * cycles * clock^2.
struct ComputeParams {
  double kappa = 1e-28;
  double cycles = 1.25e10;
  double clock = 2e9;
};

// Uplink channel between one client and one edge server.
struct ChannelParams {
  double bandwidth = 1e6;    // Hz
  double tx_power = 0.2;     // W
  double channel_gain = 1.0;
  double noise_psd = 2e-7;   // W/Hz
};

struct ClientNode {
  int id = 0;
  Point position;
  std::size_t data_size = 1;
  double cost_factor = 1.0;
  ComputeParams compute;
};

struct EdgeServer {
  int id = 0;
  Point position;
};

struct TopologyConfig {
  int n_clients = 50;
  int n_servers = 9;
  double grid_spacing = 100.0;  // km
  double model_size = 6e7;      // bits
  double bandwidth = 1e6;
  double tx_power = 0.2;
  double noise_psd = 2e-7;
  double reference_distance = 1.0;  // km
  double path_loss_exponent = 2.0;
  ComputeParams compute;
  double compute_jitter = 0.2;  // relative spread of per-client cycles
  double theta_low = 0.5;
  double theta_high = 1.5;
  // Only used when no data sizes are supplied to generate_topology.
  std::size_t data_size_min = 50;
  std::size_t data_size_max = 500;
};

struct Topology {
  std::vector<ClientNode> clients;
  std::vector<EdgeServer> servers;
  double model_size = 6e7;
  double grid_spacing = 100.0;
  double bandwidth = 1e6;
  double tx_power = 0.2;
  double noise_psd = 2e-7;
  double reference_distance = 1.0;
  double path_loss_exponent = 2.0;

  // Side length (in servers) of the placement grid.
  int grid_side() const;
  // Axis-aligned box spanned by the server grid.
  Point bounds_max() const;
};

// Servers sit on a ceil(sqrt(K))-wide grid starting at the origin; clients are
// uniform inside the grid's bounding box. If data_sizes is empty, sizes are
// drawn uniformly from [data_size_min, data_size_max].
Topology generate_topology(const TopologyConfig& config, Rng& rng,
                           std::span<const std::size_t> data_sizes = {});

// Inverse power-law path loss, clamped at the reference distance so the gain
// never exceeds one.
double channel_gain(double distance_km, double reference_distance, double exponent);

// Shannon rate B * log2(1 + p*h/N0).
double uplink_rate(const ChannelParams& channel);

double computation_cost(const ComputeParams& params);

// model_size / rate; throws InfeasibleLink when rate <= 0.
double communication_cost(double model_size, double rate);

ChannelParams channel_between(const ClientNode& client, const EdgeServer& server,
                              const Topology& topo);

struct CostBreakdown {
  double computation = 0.0;
  double communication = 0.0;
  double total = 0.0;
};

CostBreakdown cost_breakdown(const ClientNode& client, int server, const Topology& topo);

// Client cost of training in the coalition anchored at `server`:
// computation + cost_factor * communication.
double total_cost(const ClientNode& client, int server, const Topology& topo);

}  // namespace dualgfl
