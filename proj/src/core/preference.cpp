#include "dualgfl/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dualgfl/errors.hpp"

namespace dualgfl {

WeakOrder::WeakOrder(std::vector<std::vector<int>> classes) : classes_(std::move(classes)) {
  std::size_t n = 0;
  for (const auto& c : classes_) {
    if (c.empty()) throw PreconditionError("weak order has an empty indifference class");
    n += c.size();
  }
  rank_.assign(n, -1);
  for (std::size_t r = 0; r < classes_.size(); ++r) {
    for (int cand : classes_[r]) {
      if (cand < 0 || static_cast<std::size_t>(cand) >= n || rank_[cand] != -1) {
        throw PreconditionError("weak order must rank each candidate 0..K-1 exactly once");
      }
      rank_[cand] = static_cast<int>(r);
    }
  }
  for (auto& c : classes_) std::sort(c.begin(), c.end());
}

WeakOrder WeakOrder::indifferent(int n_candidates) {
  std::vector<int> all(n_candidates);
  std::iota(all.begin(), all.end(), 0);
  return WeakOrder({std::move(all)});
}

WeakOrder WeakOrder::strict(std::span<const int> order) {
  std::vector<std::vector<int>> classes;
  classes.reserve(order.size());
  for (int c : order) classes.push_back({c});
  return WeakOrder(std::move(classes));
}

bool is_coarsening(const WeakOrder& coarse, const WeakOrder& fine) {
  if (coarse.size() != fine.size()) return false;
  // Each fine class must land inside one coarse class, and coarse ranks must
  // be nondecreasing along the fine order.
  int prev = 0;
  for (const auto& cls : fine.classes()) {
    const int r = coarse.rank(cls.front());
    for (int c : cls) {
      if (coarse.rank(c) != r) return false;
    }
    if (r < prev) return false;
    prev = r;
  }
  return true;
}

PayoffEstimator::PayoffEstimator(double ema_coefficient, double prior)
    : alpha_(ema_coefficient), prior_(prior) {
  if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) {
    throw ConfigError("ema_alpha", "EMA coefficient must lie in [0, 1]");
  }
}

double PayoffEstimator::estimate(CoalitionId coalition) const {
  auto it = estimates_.find(coalition);
  return it == estimates_.end() ? prior_ : it->second;
}

void PayoffEstimator::update(CoalitionId coalition, double realized, bool selected) {
  auto [it, inserted] = estimates_.try_emplace(coalition, prior_);
  if (selected) it->second = alpha_ * it->second + (1.0 - alpha_) * realized;
}

double client_payoff(double data_share, double coalition_data, double estimate) {
  if (!(coalition_data > 0)) {
    throw PreconditionError("coalition data volume must be positive");
  }
  return data_share * estimate / coalition_data;
}

double preference_value(double utility, CoalitionId coalition, const ClientHistory& history) {
  return history.joined.contains(coalition) ? 0.0 : utility;
}

std::vector<double> preference_values(int client, std::span<const CoalitionSnapshot> candidates,
                                      const PayoffEstimator& estimator,
                                      const ClientHistory& history, const Topology& topo) {
  const ClientNode& self = topo.clients.at(client);
  const double own = static_cast<double>(self.data_size);
  std::vector<double> values;
  values.reserve(candidates.size());
  for (const auto& cand : candidates) {
    double coalition_data = 0.0;
    bool member = false;
    for (int j : cand.members) {
      coalition_data += static_cast<double>(topo.clients.at(j).data_size);
      member = member || j == client;
    }
    if (!member) coalition_data += own;

    double cost = 0.0;
    try {
      cost = total_cost(self, cand.id, topo);
    } catch (const InfeasibleLink&) {
      values.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    const double payoff = client_payoff(own, coalition_data, estimator.estimate(cand.id));
    values.push_back(preference_value(client_utility(payoff, cost), cand.id, history));
  }
  return values;
}

namespace {

bool tied(double a, double b) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

PreferenceProfile rank_by_values(int owner, std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });

  std::vector<std::vector<int>> classes;
  double head = 0.0;
  for (int c : order) {
    if (classes.empty() || !tied(head, values[c])) {
      classes.push_back({c});
      head = values[c];
    } else {
      classes.back().push_back(c);
    }
  }
  return {owner, WeakOrder(std::move(classes))};
}

PreferenceProfile build_preference_profile(int client, std::span<const CoalitionSnapshot> candidates,
                                           const PayoffEstimator& estimator,
                                           const ClientHistory& history, const Topology& topo) {
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].id != static_cast<int>(k)) {
      throw PreconditionError("candidate snapshots must be indexed by coalition id");
    }
  }
  const auto values = preference_values(client, candidates, estimator, history, topo);
  return rank_by_values(client, values);
}

}  // namespace dualgfl
