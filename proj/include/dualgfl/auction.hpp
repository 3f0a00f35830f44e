#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dualgfl {

struct Bid {
  int coalition = 0;
  double price = 0.0;
  std::vector<double> qualities;
  double resource = 1.0;
};

struct ScoringWeights {
  std::vector<double> alpha;
};

// Quasi-linear score Q . alpha - P.
double score(const Bid& bid, const ScoringWeights& w);

// Profit P - C for a winning bid, zero otherwise.
inline double supplier_utility(const Bid& bid, double cost, bool won) {
  return won ? bid.price - cost : 0.0;
}

// Supplier cost C(Q, theta) with the derivatives the equilibrium needs.
class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual std::size_t dimension() const = 0;
  virtual double cost(std::span<const double> q, double theta) const = 0;
  // dC/dq_j
  virtual double marginal_quality(std::span<const double> q, double theta, std::size_t j) const = 0;
  // dC/dtheta
  virtual double marginal_theta(std::span<const double> q, double theta) const = 0;
};

// C(Q, theta) = fixed + theta * sum_j (linear_j q_j + quadratic_j q_j^2).
class SeparableCost final : public CostModel {
 public:
  SeparableCost(std::vector<double> linear, std::vector<double> quadratic, double fixed = 0.0);

  std::size_t dimension() const override { return linear_.size(); }
  double cost(std::span<const double> q, double theta) const override;
  double marginal_quality(std::span<const double> q, double theta, std::size_t j) const override;
  double marginal_theta(std::span<const double> q, double theta) const override;

 private:
  std::vector<double> linear_;
  std::vector<double> quadratic_;
  double fixed_;
};

// Cost of a coalition delivering aggregate data volume Q:
//   (computation + theta * communication) * (Q / reference_quality)^2
// At Q = reference_quality this is the members' summed training cost.
class CoalitionCost final : public CostModel {
 public:
  CoalitionCost(double computation, double communication, double reference_quality);

  std::size_t dimension() const override { return 1; }
  double cost(std::span<const double> q, double theta) const override;
  double marginal_quality(std::span<const double> q, double theta, std::size_t j) const override;
  double marginal_theta(std::span<const double> q, double theta) const override;

 private:
  double computation_;
  double communication_;
  double reference_;
};

// Box domain for qualities; an upper bound may be +infinity.
struct QualityDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  static QualityDomain box(std::size_t dim, double lo, double hi);
  static QualityDomain point(std::span<const double> q);
};

// argmax over the domain of Q . alpha - C(Q, theta) for C convex in Q.
// Coordinate-wise bisection on alpha_j - dC/dq_j. Throws DivergenceError if
// the objective keeps increasing along an unbounded coordinate.
std::vector<double> optimal_quality(const CostModel& model, const ScoringWeights& w, double theta,
                                    const QualityDomain& domain);

// Distribution of the private cost factor on [lower, upper].
struct CostDistribution {
  double lower = 0.0;
  double upper = 1.0;
  std::function<double(double)> cdf;
  std::string family = "uniform";

  static CostDistribution uniform(double lower, double upper);
  void validate() const;
};

// Adaptive Simpson quadrature with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-8, int max_depth = 40);

// Information rent of a supplier with cost factor theta facing n_bidders - 1
// rivals:  integral_theta^upper C_theta(Q*(t), t) [(1-F(t)) / (1-F(theta))]^(n-1) dt.
// `cost_theta` evaluates dC/dtheta at the optimal quality for type t.
double equilibrium_profit(double theta, const CostDistribution& dist, int n_bidders,
                          const std::function<double(double)>& cost_theta);

struct EquilibriumBid {
  Bid bid;
  double cost = 0.0;              // C(Q*, theta)
  double information_rent = 0.0;  // price - cost
};

// Q* from optimal_quality, P* = C(Q*, theta) + information rent.
EquilibriumBid equilibrium_bid(const CostModel& model, double theta, const CostDistribution& dist,
                               int n_bidders, const ScoringWeights& w, const QualityDomain& domain,
                               double resource, int coalition);

// Bid offering `quality` at the price that leaves its score unchanged:
// P' = P + (quality - Q) . alpha.
Bid quality_adjusted_bid(const Bid& bid, std::span<const double> quality, const ScoringWeights& w);

struct AuctionOutcome {
  std::vector<int> winners;             // coalition ids
  std::vector<double> assigned_scores;  // parallel to winners
  double total_score = 0.0;
  double spent_resource = 0.0;
  std::size_t shortfall = 0;            // M minus winners admitted
};

// Admits bids by descending score/resource (ties: lower resource, then lower
// id) while fewer than M winners and spent + E_k <= E_max. Negative-score bids
// are never admitted.
AuctionOutcome select_winners_greedy(std::span<const Bid> bids, const ScoringWeights& w,
                                     std::size_t max_winners, double budget);

// Maximises total score subject to |winners| <= M and the budget, by
// branch-and-bound. Among equal totals the larger set wins, then the
// lexicographically smallest id list. At most 20 bids.
AuctionOutcome select_winners_exact(std::span<const Bid> bids, const ScoringWeights& w,
                                    std::size_t max_winners, double budget);

// Outcome for an externally chosen set of bid indices (randomised selection
// rules). Totals are summed the same way as the solvers above.
AuctionOutcome outcome_for(std::span<const Bid> bids, std::span<const std::size_t> chosen,
                           const ScoringWeights& w, std::size_t max_winners);

}  // namespace dualgfl
