#include "dualgfl/hedonic.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dualgfl/errors.hpp"

namespace dualgfl {

Partition Partition::from_assignment(std::vector<int> assignment, int n_servers) {
  Partition p;
  p.coalitions.assign(n_servers, {});
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int s = assignment[i];
    if (s < 0 || s >= n_servers) {
      throw PreconditionError("client " + std::to_string(i) + " assigned to unknown server");
    }
    p.coalitions[s].push_back(static_cast<int>(i));
  }
  p.assignment = std::move(assignment);
  return p;
}

void HedonicInstance::validate() const {
  if (n_servers < 1) throw PreconditionError("instance needs at least one server");
  if (capacity < 1) throw PreconditionError("capacity must be at least 1");
  if (!data_sizes.empty() && data_sizes.size() != profiles.size()) {
    throw PreconditionError("data size list length differs from client count");
  }
  for (const auto& p : profiles) {
    if (p.size() != n_servers) {
      throw PreconditionError("every profile must rank all " + std::to_string(n_servers) + " servers");
    }
  }
  if (static_cast<long long>(capacity) * n_servers < n_clients()) {
    throw InfeasibleInstance("capacity * servers (" + std::to_string(capacity * n_servers) +
                             ") is below the client count (" + std::to_string(n_clients()) + ")");
  }
}

void validate_partition(const Partition& p, int n_clients, int n_servers, int capacity) {
  if (p.n_clients() != n_clients || p.n_servers() != n_servers) {
    throw PreconditionError("partition shape does not match the instance");
  }
  std::vector<int> seen(n_clients, 0);
  for (int s = 0; s < n_servers; ++s) {
    if (static_cast<int>(p.coalitions[s].size()) > capacity) {
      throw PreconditionError("coalition " + std::to_string(s) + " exceeds capacity");
    }
    for (int c : p.coalitions[s]) {
      if (c < 0 || c >= n_clients || p.assignment[c] != s || seen[c]++) {
        throw PreconditionError("coalitions are not a disjoint cover of the clients");
      }
    }
  }
  for (int c = 0; c < n_clients; ++c) {
    if (!seen[c]) throw PreconditionError("client " + std::to_string(c) + " is unassigned");
  }
}

namespace {

class Matcher {
 public:
  Matcher(const HedonicInstance& inst, std::span<const WeakOrder> profiles)
      : inst_(inst),
        profiles_(profiles),
        assigned_(inst.n_clients(), -1),
        members_(inst.n_servers) {}

  bool assigned(int c) const { return assigned_[c] >= 0; }
  bool has_room(int s) const { return static_cast<int>(members_[s].size()) < inst_.capacity; }

  void place(int c, int s) {
    if (assigned_[c] >= 0) {
      auto& old = members_[assigned_[c]];
      old.erase(std::find(old.begin(), old.end(), c));
    }
    assigned_[c] = s;
    members_[s].push_back(c);
  }

  // Kuhn-style augmenting path: put c in a top-class server, relocating one
  // occupant of a full server if that occupant has somewhere else to go.
  bool augment(int c, std::vector<char>& seen) {
    for (int s : profiles_[c].top()) {
      if (seen[s]) continue;
      seen[s] = 1;
      if (has_room(s)) {
        place(c, s);
        return true;
      }
      const std::vector<int> occupants = members_[s];
      for (int other : occupants) {
        if (augment(other, seen)) {
          place(c, s);
          return true;
        }
      }
    }
    return false;
  }

  std::vector<int> take() { return std::move(assigned_); }

 private:
  const HedonicInstance& inst_;
  std::span<const WeakOrder> profiles_;
  std::vector<int> assigned_;
  std::vector<std::vector<int>> members_;
};

}  // namespace

std::optional<Partition> perfect_partition(const HedonicInstance& inst,
                                           std::span<const WeakOrder> profiles, Rng& rng) {
  const int n = inst.n_clients();
  const int k = inst.n_servers;
  Matcher m(inst, profiles);

  std::vector<int> server_order(k);
  std::iota(server_order.begin(), server_order.end(), 0);
  rng.shuffle(server_order);

  std::vector<int> clients(n);
  std::vector<double> tie(n);
  for (int s : server_order) {
    // Server's preference list: larger data first, shuffled among equals.
    std::iota(clients.begin(), clients.end(), 0);
    for (auto& t : tie) t = rng.uniform();
    std::sort(clients.begin(), clients.end(), [&](int a, int b) {
      const std::size_t da = inst.data_sizes.empty() ? 0 : inst.data_sizes[a];
      const std::size_t db = inst.data_sizes.empty() ? 0 : inst.data_sizes[b];
      if (da != db) return da > db;
      if (tie[a] != tie[b]) return tie[a] < tie[b];
      return a < b;
    });
    for (int c : clients) {
      if (!m.has_room(s)) break;
      if (!m.assigned(c) && profiles[c].in_top(s)) m.place(c, s);
    }
  }

  std::vector<char> seen(k);
  for (int c = 0; c < n; ++c) {
    if (m.assigned(c)) continue;
    std::fill(seen.begin(), seen.end(), 0);
    if (!m.augment(c, seen)) return std::nullopt;
  }
  return Partition::from_assignment(m.take(), k);
}

WeakOrder refine(const WeakOrder& bottom, const WeakOrder& top) {
  if (!is_coarsening(bottom, top)) {
    throw PreconditionError("refine needs bottom to be a coarsening of top");
  }
  if (bottom == top) throw PreconditionError("refine called on an already strict-equal profile");

  const auto& fine = top.classes();
  // cut[j]: bottom separates fine class j from fine class j + 1.
  std::vector<char> cut(fine.size() - 1);
  for (std::size_t j = 0; j + 1 < fine.size(); ++j) {
    cut[j] = bottom.rank(fine[j].front()) != bottom.rank(fine[j + 1].front());
  }
  for (std::size_t j = cut.size(); j-- > 0;) {
    if (!cut[j]) {
      cut[j] = 1;
      break;
    }
  }

  std::vector<std::vector<int>> classes{fine.front()};
  for (std::size_t j = 1; j < fine.size(); ++j) {
    if (cut[j - 1]) {
      classes.push_back(fine[j]);
    } else {
      classes.back().insert(classes.back().end(), fine[j].begin(), fine[j].end());
    }
  }
  return WeakOrder(std::move(classes));
}

Partition pop(const HedonicInstance& inst, Rng& rng, PopStats* stats) {
  inst.validate();
  const int n = inst.n_clients();

  std::vector<WeakOrder> top = inst.profiles;
  std::vector<WeakOrder> bottom(n, WeakOrder::indifferent(inst.n_servers));

  PopStats local;
  for (const auto& p : top) local.iteration_bound += p.strict_pairs();

  auto best = perfect_partition(inst, bottom, rng);
  if (!best) throw InfeasibleInstance("no partition satisfies the capacity limit");

  for (int i = 0; i < n; ++i) {
    while (!(bottom[i] == top[i])) {
      ++local.iterations;
      WeakOrder relaxed = bottom[i];
      bottom[i] = refine(relaxed, top[i]);
      if (auto candidate = perfect_partition(inst, bottom, rng)) {
        best = std::move(candidate);
        ++local.accepted;
      } else {
        bottom[i] = relaxed;
        top[i] = std::move(relaxed);
      }
    }
  }
  if (stats) *stats = local;
  return *std::move(best);
}

bool pareto_dominates(const Partition& a, const Partition& b, std::span<const WeakOrder> profiles) {
  if (a.n_clients() != b.n_clients() || static_cast<int>(profiles.size()) != a.n_clients()) {
    throw PreconditionError("partitions and profiles cover different client sets");
  }
  bool strict = false;
  for (int i = 0; i < a.n_clients(); ++i) {
    const int ra = profiles[i].rank(a.assignment[i]);
    const int rb = profiles[i].rank(b.assignment[i]);
    if (ra > rb) return false;
    strict = strict || ra < rb;
  }
  return strict;
}

bool is_pareto_optimal_bruteforce(const Partition& p, const HedonicInstance& inst) {
  if (inst.n_clients() > 10 || inst.n_servers > 4) {
    throw GuardError("brute-force Pareto check is limited to 10 clients and 4 servers");
  }
  bool optimal = true;
  for_each_feasible_partition(inst.n_clients(), inst.n_servers, inst.capacity,
                              [&](const std::vector<int>& assign) {
                                if (!optimal) return;
                                const Partition other = Partition::from_assignment(assign, inst.n_servers);
                                if (pareto_dominates(other, p, inst.profiles)) optimal = false;
                              });
  return optimal;
}

}  // namespace dualgfl
