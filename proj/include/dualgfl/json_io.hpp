#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dualgfl/auction.hpp"
#include "dualgfl/hedonic.hpp"
#include "dualgfl/preference.hpp"
#include "dualgfl/topology.hpp"

namespace dualgfl {

// Documents are JSON text. Readers throw ConfigError on malformed input.

std::string topology_to_json(const Topology& topo);

// [[ [ids...], [ids...] ], ...]: one weak order per client, best class first.
std::string profiles_to_json(std::span<const WeakOrder> profiles);
std::vector<WeakOrder> profiles_from_json(std::string_view text);

// {"<server id>": [sorted client ids], ...}
std::string partition_to_json(const Partition& p);
Partition partition_from_json(std::string_view text, int n_clients);

// Hedonic instance: {"n_servers", "capacity", "data_sizes", "profiles"}.
std::string hedonic_instance_to_json(const HedonicInstance& instance);
HedonicInstance hedonic_instance_from_json(std::string_view text);

// [{"coalition", "price", "qualities", "resource"}, ...]
std::string bids_to_json(std::span<const Bid> bids);
std::vector<Bid> bids_from_json(std::string_view text);

std::string outcome_to_json(const AuctionOutcome& outcome);

// Winner-selection fixture: {"K", "M", "E_max", "alpha", "bids": [[Q, P, E], ...]}.
// Bid k gets coalition id k and the single quality Q. "alpha" defaults to 1.
struct AuctionFixture {
  std::size_t max_winners = 0;
  double budget = 0.0;
  ScoringWeights weights{{1.0}};
  std::vector<Bid> bids;
};

std::string auction_fixture_to_json(const AuctionFixture& fixture);
AuctionFixture auction_fixture_from_json(std::string_view text);

}  // namespace dualgfl
