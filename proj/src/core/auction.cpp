#include "dualgfl/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualgfl/errors.hpp"

namespace dualgfl {

double score(const Bid& bid, const ScoringWeights& w) {
  if (bid.qualities.size() != w.alpha.size()) {
    throw ConfigError("quality_weight", "bid quality dimension differs from scoring weights");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < w.alpha.size(); ++j) s += bid.qualities[j] * w.alpha[j];
  return s - bid.price;
}

SeparableCost::SeparableCost(std::vector<double> linear, std::vector<double> quadratic, double fixed)
    : linear_(std::move(linear)), quadratic_(std::move(quadratic)), fixed_(fixed) {
  if (linear_.size() != quadratic_.size()) {
    throw PreconditionError("linear and quadratic coefficient vectors differ in length");
  }
  for (double c : quadratic_) {
    if (c < 0) throw PreconditionError("quadratic coefficients must be nonnegative (convexity)");
  }
}

double SeparableCost::cost(std::span<const double> q, double theta) const {
  return fixed_ + theta * marginal_theta(q, theta);
}

double SeparableCost::marginal_quality(std::span<const double> q, double theta, std::size_t j) const {
  return theta * (linear_[j] + 2.0 * quadratic_[j] * q[j]);
}

double SeparableCost::marginal_theta(std::span<const double> q, double) const {
  double s = 0.0;
  for (std::size_t j = 0; j < linear_.size(); ++j) s += linear_[j] * q[j] + quadratic_[j] * q[j] * q[j];
  return s;
}

CoalitionCost::CoalitionCost(double computation, double communication, double reference_quality)
    : computation_(computation), communication_(communication), reference_(reference_quality) {
  if (!(reference_ > 0)) throw PreconditionError("coalition reference quality must be positive");
}

double CoalitionCost::cost(std::span<const double> q, double theta) const {
  const double r = q[0] / reference_;
  return (computation_ + theta * communication_) * r * r;
}

double CoalitionCost::marginal_quality(std::span<const double> q, double theta, std::size_t) const {
  return 2.0 * (computation_ + theta * communication_) * q[0] / (reference_ * reference_);
}

double CoalitionCost::marginal_theta(std::span<const double> q, double) const {
  const double r = q[0] / reference_;
  return communication_ * r * r;
}

QualityDomain QualityDomain::box(std::size_t dim, double lo, double hi) {
  return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

QualityDomain QualityDomain::point(std::span<const double> q) {
  return {std::vector<double>(q.begin(), q.end()), std::vector<double>(q.begin(), q.end())};
}

std::vector<double> optimal_quality(const CostModel& model, const ScoringWeights& w, double theta,
                                    const QualityDomain& domain) {
  const std::size_t dim = model.dimension();
  if (w.alpha.size() != dim || domain.lower.size() != dim || domain.upper.size() != dim) {
    throw ConfigError("quality_weight", "quality dimension mismatch");
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (!(domain.lower[j] <= domain.upper[j]) || !std::isfinite(domain.lower[j])) {
      throw PreconditionError("quality domain must have finite lower <= upper");
    }
  }

  std::vector<double> q = domain.lower;
  // Objective gradient along j; nonincreasing in q_j for convex cost.
  auto gradient = [&](std::size_t j, double x) {
    const double saved = q[j];
    q[j] = x;
    const double g = w.alpha[j] - model.marginal_quality(q, theta, j);
    q[j] = saved;
    return g;
  };

  constexpr int kMaxSweeps = 200;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double lo = domain.lower[j];
      double hi = domain.upper[j];
      double x;
      if (gradient(j, lo) <= 0.0) {
        x = lo;
      } else {
        if (std::isinf(hi)) {
          hi = std::max(1.0, 2.0 * std::abs(lo));
          while (gradient(j, hi) > 0.0) {
            hi *= 2.0;
            if (hi > 1e15) throw DivergenceError("score minus cost grows without bound in quality");
          }
        }
        if (gradient(j, hi) >= 0.0) {
          x = hi;
        } else {
          for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (gradient(j, mid) > 0.0 ? lo : hi) = mid;
          }
          x = 0.5 * (lo + hi);
        }
      }
      moved = std::max(moved, std::abs(x - q[j]));
      q[j] = x;
    }
    if (dim == 1 || moved <= 1e-12) break;
  }
  return q;
}

CostDistribution CostDistribution::uniform(double lower, double upper) {
  CostDistribution d;
  d.lower = lower;
  d.upper = upper;
  d.family = "uniform";
  d.cdf = [lower, upper](double t) {
    if (t <= lower) return 0.0;
    if (t >= upper) return 1.0;
    return (t - lower) / (upper - lower);
  };
  return d;
}

void CostDistribution::validate() const {
  if (!(lower < upper)) throw ConfigError("theta_low", "cost distribution needs lower < upper");
  if (!cdf) throw ConfigError("theta_low", "cost distribution has no cdf");
}

namespace {

struct SimpsonPanel {
  const std::function<double(double)>& f;

  double rec(double a, double b, double fa, double fm, double fb, double whole, double eps,
             int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return rec(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           rec(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  // A few fixed panels first so a lucky coarse estimate cannot end the search.
  constexpr int kPanels = 8;
  const SimpsonPanel panel{f};
  const double h = (b - a) / kPanels;
  double total = 0.0;
  double fa = f(a);
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == kPanels ? b : a + (p + 1) * h;
    const double fm = f(0.5 * (lo + hi));
    const double fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += panel.rec(lo, hi, fa, fm, fb, whole, abs_tol / kPanels, max_depth);
    fa = fb;
  }
  return total;
}

double equilibrium_profit(double theta, const CostDistribution& dist, int n_bidders,
                          const std::function<double(double)>& cost_theta) {
  dist.validate();
  if (n_bidders < 2) throw PreconditionError("equilibrium profit needs at least two bidders");
  if (!(theta >= dist.lower && theta <= dist.upper)) {
    throw DomainError("cost factor lies outside the support of its distribution");
  }
  if (theta == dist.upper) return 0.0;
  const double survive = 1.0 - dist.cdf(theta);
  if (!(survive > 0.0)) return 0.0;
  const int exponent = n_bidders - 1;
  auto integrand = [&](double t) {
    const double ratio = (1.0 - dist.cdf(t)) / survive;
    return cost_theta(t) * std::pow(ratio, exponent);
  };
  return adaptive_simpson(integrand, theta, dist.upper, 1e-8, 40);
}

EquilibriumBid equilibrium_bid(const CostModel& model, double theta, const CostDistribution& dist,
                               int n_bidders, const ScoringWeights& w, const QualityDomain& domain,
                               double resource, int coalition) {
  if (!(resource > 0)) throw PreconditionError("bid resource request must be positive");
  EquilibriumBid out;
  out.bid.coalition = coalition;
  out.bid.resource = resource;
  out.bid.qualities = optimal_quality(model, w, theta, domain);
  out.cost = model.cost(out.bid.qualities, theta);
  const bool fixed_quality = domain.lower == domain.upper;
  out.information_rent = equilibrium_profit(theta, dist, n_bidders, [&](double t) {
    if (fixed_quality) return model.marginal_theta(out.bid.qualities, t);
    return model.marginal_theta(optimal_quality(model, w, t, domain), t);
  });
  out.bid.price = out.cost + out.information_rent;
  return out;
}

Bid quality_adjusted_bid(const Bid& bid, std::span<const double> quality, const ScoringWeights& w) {
  if (quality.size() != w.alpha.size() || bid.qualities.size() != w.alpha.size()) {
    throw ConfigError("quality_weight", "bid quality dimension differs from scoring weights");
  }
  Bid out = bid;
  out.qualities.assign(quality.begin(), quality.end());
  for (std::size_t j = 0; j < w.alpha.size(); ++j) out.price += (quality[j] - bid.qualities[j]) * w.alpha[j];
  return out;
}

namespace {

void check_bids(std::span<const Bid> bids) {
  for (const auto& b : bids) {
    if (!(b.resource > 0)) throw PreconditionError("every bid needs a positive resource request");
  }
}

// Sums winner scores in ascending coalition order so equal sets give
// bit-identical totals regardless of admission order.
void finalize(AuctionOutcome& out, std::size_t max_winners) {
  std::vector<std::size_t> idx(out.winners.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return out.winners[a] < out.winners[b]; });
  out.total_score = 0.0;
  for (auto i : idx) out.total_score += out.assigned_scores[i];
  out.shortfall = max_winners > out.winners.size() ? max_winners - out.winners.size() : 0;
}

}  // namespace

AuctionOutcome select_winners_greedy(std::span<const Bid> bids, const ScoringWeights& w,
                                     std::size_t max_winners, double budget) {
  check_bids(bids);
  std::vector<double> scores(bids.size());
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < bids.size(); ++k) {
    scores[k] = score(bids[k], w);
    if (scores[k] >= 0.0) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = scores[a] / bids[a].resource;
    const double rb = scores[b] / bids[b].resource;
    if (ra != rb) return ra > rb;
    if (bids[a].resource != bids[b].resource) return bids[a].resource < bids[b].resource;
    return bids[a].coalition < bids[b].coalition;
  });

  AuctionOutcome out;
  for (std::size_t k : order) {
    if (out.winners.size() >= max_winners) break;
    if (out.spent_resource + bids[k].resource > budget) continue;
    out.winners.push_back(bids[k].coalition);
    out.assigned_scores.push_back(scores[k]);
    out.spent_resource += bids[k].resource;
  }
  finalize(out, max_winners);
  return out;
}

AuctionOutcome select_winners_exact(std::span<const Bid> bids, const ScoringWeights& w,
                                    std::size_t max_winners, double budget) {
  if (bids.size() > 20) throw GuardError("exact winner selection is limited to 20 bids");
  check_bids(bids);

  std::vector<std::size_t> cand;
  std::vector<double> scores(bids.size());
  for (std::size_t k = 0; k < bids.size(); ++k) {
    scores[k] = score(bids[k], w);
    if (scores[k] >= 0.0) cand.push_back(k);
  }
  std::sort(cand.begin(), cand.end(),
            [&](auto a, auto b) { return bids[a].coalition < bids[b].coalition; });

  std::vector<std::size_t> chosen;
  std::vector<std::size_t> best;
  double best_total = 0.0;

  auto ids_of = [&](const std::vector<std::size_t>& set) {
    std::vector<int> ids;
    for (auto k : set) ids.push_back(bids[k].coalition);
    return ids;
  };
  auto better = [&](double total, const std::vector<std::size_t>& set) {
    const double eps = 1e-12 * std::max(1.0, std::abs(best_total));
    if (total > best_total + eps) return true;
    if (total < best_total - eps) return false;
    if (set.size() != best.size()) return set.size() > best.size();
    return ids_of(set) < ids_of(best);
  };

  auto search = [&](auto&& self, std::size_t i, double total, double spent) -> void {
    if (better(total, chosen)) {
      best = chosen;
      best_total = total;
    }
    if (i == cand.size() || chosen.size() == max_winners) return;

    // Optimistic bound: best remaining scores filling every open slot.
    std::vector<double> rest;
    for (std::size_t j = i; j < cand.size(); ++j) rest.push_back(scores[cand[j]]);
    const std::size_t slots = std::min(rest.size(), max_winners - chosen.size());
    std::partial_sort(rest.begin(), rest.begin() + slots, rest.end(), std::greater<>());
    const double bound = total + std::accumulate(rest.begin(), rest.begin() + slots, 0.0);
    if (bound < best_total - 1e-12 * std::max(1.0, std::abs(best_total))) return;

    const std::size_t k = cand[i];
    if (spent + bids[k].resource <= budget) {
      chosen.push_back(k);
      self(self, i + 1, total + scores[k], spent + bids[k].resource);
      chosen.pop_back();
    }
    self(self, i + 1, total, spent);
  };
  search(search, 0, 0.0, 0.0);

  AuctionOutcome out;
  for (auto k : best) {
    out.winners.push_back(bids[k].coalition);
    out.assigned_scores.push_back(scores[k]);
    out.spent_resource += bids[k].resource;
  }
  finalize(out, max_winners);
  return out;
}

AuctionOutcome outcome_for(std::span<const Bid> bids, std::span<const std::size_t> chosen,
                           const ScoringWeights& w, std::size_t max_winners) {
  AuctionOutcome out;
  for (auto k : chosen) {
    out.winners.push_back(bids[k].coalition);
    out.assigned_scores.push_back(score(bids[k], w));
    out.spent_resource += bids[k].resource;
  }
  finalize(out, max_winners);
  return out;
}

}  // namespace dualgfl
