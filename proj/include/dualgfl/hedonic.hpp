#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dualgfl/preference.hpp"
#include "dualgfl/rng.hpp"

namespace dualgfl {

// Assignment of every client to exactly one edge-server-anchored coalition.
// A server may hold an empty coalition.
struct Partition {
  std::vector<int> assignment;               // client -> server
  std::vector<std::vector<int>> coalitions;  // server -> sorted clients

  static Partition from_assignment(std::vector<int> assignment, int n_servers);

  int n_clients() const noexcept { return static_cast<int>(assignment.size()); }
  int n_servers() const noexcept { return static_cast<int>(coalitions.size()); }
  bool operator==(const Partition& other) const { return assignment == other.assignment; }
};

// Lower-level game instance: client preferences over the K candidates plus
// the data volumes servers use to rank clients.
struct HedonicInstance {
  int n_servers = 0;
  int capacity = 0;
  std::vector<WeakOrder> profiles;
  std::vector<std::size_t> data_sizes;  // empty means all equal

  int n_clients() const noexcept { return static_cast<int>(profiles.size()); }
  // Throws PreconditionError on malformed input, InfeasibleInstance when
  // capacity * K < N.
  void validate() const;
};

// Throws PreconditionError unless the partition is a disjoint cover of
// n_clients with every coalition at most `capacity`.
void validate_partition(const Partition& p, int n_clients, int n_servers, int capacity);

// Partition in which every client sits in a top-class server of `profiles`,
// or nullopt if none exists under the capacity limit.
//
// Servers are visited in shuffled order; each admits clients in descending
// data-size order (random tie-breaks) whose top class contains it, while below
// capacity. Clients the greedy pass strands are then placed by augmenting
// paths, so nullopt means no perfect partition exists at all.
std::optional<Partition> perfect_partition(const HedonicInstance& instance,
                                           std::span<const WeakOrder> profiles, Rng& rng);

// Splits one indifference of `bottom` that is strict in `top`, starting from
// the lowest-ranked one. Requires bottom <= top and bottom != top.
WeakOrder refine(const WeakOrder& bottom, const WeakOrder& top);

struct PopStats {
  int iterations = 0;         // refinement attempts
  int accepted = 0;           // attempts that produced a perfect partition
  int iteration_bound = 0;    // sum of strict pairs over the true profiles
};

// Pareto-optimal partitioning. Clients are refined in ascending id order;
// a different order can return a different Pareto-optimal partition.
Partition pop(const HedonicInstance& instance, Rng& rng, PopStats* stats = nullptr);

// True iff every client weakly prefers its coalition in `a` and at least one
// strictly prefers it.
bool pareto_dominates(const Partition& a, const Partition& b, std::span<const WeakOrder> profiles);

// Enumerates every capacity-feasible partition (guarded to 10 clients and 4
// servers) and checks none dominates `p`.
bool is_pareto_optimal_bruteforce(const Partition& p, const HedonicInstance& instance);

// Calls `visit` for every capacity-feasible assignment of the instance.
template <typename Visit>
void for_each_feasible_partition(int n_clients, int n_servers, int capacity, Visit&& visit) {
  std::vector<int> assign(n_clients, 0);
  std::vector<int> load(n_servers, 0);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n_clients) {
      visit(static_cast<const std::vector<int>&>(assign));
      return;
    }
    for (int s = 0; s < n_servers; ++s) {
      if (load[s] >= capacity) continue;
      assign[i] = s;
      ++load[s];
      self(self, i + 1);
      --load[s];
    }
  };
  rec(rec, 0);
}

}  // namespace dualgfl
