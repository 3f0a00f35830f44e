#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "dualgfl/topology.hpp"

namespace dualgfl {

// Coalitions are anchored by exactly one edge server, so the server id doubles
// as the coalition id.
using CoalitionId = int;

// Complete weak order over candidates 0..K-1, stored as ordered indifference
// classes: strict preference between classes, indifference within a class.
class WeakOrder {
 public:
  WeakOrder() = default;
  // Throws PreconditionError unless the classes partition 0..K-1 with no
  // empty class.
  explicit WeakOrder(std::vector<std::vector<int>> classes);

  // Every candidate in a single class.
  static WeakOrder indifferent(int n_candidates);
  // Strict order following `order` (best first).
  static WeakOrder strict(std::span<const int> order);

  const std::vector<std::vector<int>>& classes() const noexcept { return classes_; }
  int size() const noexcept { return static_cast<int>(rank_.size()); }
  int class_count() const noexcept { return static_cast<int>(classes_.size()); }
  // Class index of a candidate; 0 is the most preferred class.
  int rank(int candidate) const { return rank_.at(candidate); }
  const std::vector<int>& top() const { return classes_.front(); }
  bool in_top(int candidate) const { return rank(candidate) == 0; }
  // Number of strict steps between consecutive classes.
  int strict_pairs() const noexcept { return class_count() - 1; }

  bool operator==(const WeakOrder& other) const { return classes_ == other.classes_; }

 private:
  std::vector<std::vector<int>> classes_;
  std::vector<int> rank_;
};

// True when `coarse` can be obtained from `fine` by merging consecutive
// classes, i.e. coarse <= fine in the refinement order.
bool is_coarsening(const WeakOrder& coarse, const WeakOrder& fine);

struct PreferenceProfile {
  int owner = 0;
  WeakOrder ranking;
};

// EMA estimate of each coalition's earnings. Rounds in which a coalition is
// not selected leave its estimate untouched, so the estimate tracks the
// product of selection probability and realised payoff jointly.
class PayoffEstimator {
 public:
  PayoffEstimator(double ema_coefficient, double prior);

  double estimate(CoalitionId coalition) const;
  void update(CoalitionId coalition, double realized, bool selected);

  double ema_coefficient() const noexcept { return alpha_; }
  double prior() const noexcept { return prior_; }
  const std::map<CoalitionId, double>& estimates() const noexcept { return estimates_; }

 private:
  double alpha_;
  double prior_;
  std::map<CoalitionId, double> estimates_;
};

// Coalitions the client has joined in the current membership epoch.
struct ClientHistory {
  std::set<CoalitionId> joined;
};

// Composition of a candidate coalition as the client sees it when ranking.
struct CoalitionSnapshot {
  CoalitionId id = 0;
  std::vector<int> members;
};

// Data-proportional share of the coalition's estimated payoff.
double client_payoff(double data_share, double coalition_data, double estimate);

inline double client_utility(double payoff, double cost) { return payoff - cost; }

// Zero for coalitions already in the client's history, the utility otherwise.
double preference_value(double utility, CoalitionId coalition, const ClientHistory& history);

// Preference values of `client` for each candidate. Candidates whose uplink is
// infeasible get -infinity.
std::vector<double> preference_values(int client, std::span<const CoalitionSnapshot> candidates,
                                      const PayoffEstimator& estimator,
                                      const ClientHistory& history, const Topology& topo);

// Sorts candidates by descending value; values within a relative distance of
// 1e-9 of a class's leading value share that class. Ties resolve by id.
PreferenceProfile rank_by_values(int owner, std::span<const double> values);

PreferenceProfile build_preference_profile(int client, std::span<const CoalitionSnapshot> candidates,
                                           const PayoffEstimator& estimator,
                                           const ClientHistory& history, const Topology& topo);

}  // namespace dualgfl
