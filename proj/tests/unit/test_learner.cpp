#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualgfl/errors.hpp"
#include "dualgfl/learner.hpp"

using namespace dualgfl;

namespace {

SyntheticTask small_task(std::uint64_t seed, std::size_t train = 600) {
  SyntheticTaskConfig cfg;
  cfg.n_classes = 4;
  cfg.n_features = 6;
  cfg.train_samples = train;
  cfg.test_samples = 100;
  cfg.class_separation = 2.0;
  Rng rng(seed);
  return make_gaussian_mixture(cfg, rng);
}

// Mean over clients of the variance of each client's class proportions.
double label_skew(const std::vector<std::vector<std::size_t>>& clients, const Dataset& d) {
  double total = 0;
  for (const auto& idx : clients) {
    std::vector<double> p(d.n_classes, 0.0);
    for (auto i : idx) p[d.labels[i]] += 1.0;
    for (auto& x : p) x /= static_cast<double>(idx.size());
    const double mean = 1.0 / static_cast<double>(d.n_classes);
    double var = 0;
    for (double x : p) var += (x - mean) * (x - mean);
    total += var / static_cast<double>(d.n_classes);
  }
  return total / static_cast<double>(clients.size());
}

}  // namespace

TEST_SUITE("learner") {
  TEST_CASE("gaussian mixture has the requested shape") {
    const auto t = small_task(1);
    CHECK(t.train.size() == 600);
    CHECK(t.test.size() == 100);
    CHECK(t.train.features.size() == 600 * 6);
    for (int y : t.train.labels) CHECK((y >= 0 && y < 4));
  }

  TEST_CASE("a single client holds the whole dataset") {
    const auto t = small_task(2);
    Rng rng(3);
    const auto parts = dirichlet_partition(t.train.labels, 4, 1, 0.5, rng);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].size() == t.train.size());
  }

  TEST_CASE("dirichlet split is a disjoint cover with nonempty clients") {
    const auto t = small_task(4);
    for (double beta : {0.05, 0.5, 5.0}) {
      Rng rng(5);
      const auto parts = dirichlet_partition(t.train.labels, 4, 20, beta, rng);
      std::vector<int> seen(t.train.size(), 0);
      std::vector<std::size_t> per_class(4, 0), expected(4, 0);
      for (const auto& c : parts) {
        CHECK_FALSE(c.empty());
        for (auto i : c) {
          ++seen[i];
          ++per_class[t.train.labels[i]];
        }
      }
      for (int y : t.train.labels) ++expected[y];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
      CHECK(per_class == expected);
    }
  }

  TEST_CASE("smaller concentration gives more label skew") {
    double low = 0, high = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto t = small_task(100 + seed);
      Rng a(seed), b(seed);
      low += label_skew(dirichlet_partition(t.train.labels, 4, 10, 0.1, a), t.train);
      high += label_skew(dirichlet_partition(t.train.labels, 4, 10, 10.0, b), t.train);
    }
    CHECK(low > high);
  }

  TEST_CASE("dirichlet split rejects too few samples") {
    const std::vector<int> labels{0, 1, 0};
    Rng rng(1);
    CHECK_THROWS_AS(dirichlet_partition(labels, 2, 4, 1.0, rng), ConfigError);
    CHECK_THROWS_AS(dirichlet_partition(labels, 2, 2, 0.0, rng), ConfigError);
  }

  TEST_CASE("zero learning rate or zero epochs leave parameters unchanged") {
    const auto t = small_task(6);
    const SoftmaxRegression model(6, 4);
    GlobalModel start = model.initial_model();
    for (std::size_t p = 0; p < start.parameters.size(); ++p) start.parameters[p] = 0.01 * static_cast<double>(p);
    std::vector<std::size_t> idx(50);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(1);
    const auto a = local_train(model, start, t.train, idx, {3, 0.0, 8}, rng);
    REQUIRE(a.has_value());
    CHECK(*a == start.parameters);
    const auto b = local_train(model, start, t.train, idx, {0, 0.5, 8}, rng);
    REQUIRE(b.has_value());
    CHECK(*b == start.parameters);
  }

  TEST_CASE("empty client data is skipped") {
    const auto t = small_task(7);
    const SoftmaxRegression model(6, 4);
    Rng rng(1);
    CHECK_FALSE(local_train(model, model.initial_model(), t.train, {}, {}, rng).has_value());
  }

  TEST_CASE("full-batch training loss is nonincreasing") {
    const auto t = small_task(8);
    const SoftmaxRegression model(6, 4);
    std::vector<std::size_t> idx(200);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(1);
    std::vector<double> trace;
    const auto out = local_train(model, model.initial_model(), t.train, idx, {3, 0.1, 0}, rng, &trace);
    REQUIRE(out.has_value());
    REQUIRE(trace.size() == 4);
    for (std::size_t e = 1; e < trace.size(); ++e) CHECK(trace[e] <= trace[e - 1]);
    CHECK(trace.back() < trace.front());
  }

  TEST_CASE("gradient matches finite differences") {
    const auto t = small_task(9);
    const SoftmaxRegression model(6, 4);
    Rng rng(2);
    std::vector<double> params(model.parameter_count());
    for (auto& p : params) p = rng.normal(0, 0.3);
    std::vector<std::size_t> idx{0, 3, 7, 11, 19};
    std::vector<double> grad(params.size(), 0.0);
    model.gradient(params, t.train, idx, grad);
    for (std::size_t p = 0; p < params.size(); p += 3) {
      auto up = params, down = params;
      up[p] += 1e-6;
      down[p] -= 1e-6;
      const double fd = (model.loss(up, t.train, idx) - model.loss(down, t.train, idx)) / 2e-6;
      CHECK(grad[p] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("training on separable data beats chance") {
    const auto t = small_task(10, 2000);
    const SoftmaxRegression model(6, 4);
    std::vector<std::size_t> idx(t.train.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(3);
    const auto out = local_train(model, model.initial_model(), t.train, idx, {5, 0.1, 32}, rng);
    CHECK(model.accuracy(*out, t.test) > 0.5);
  }

  TEST_CASE("aggregate examples") {
    const ModelUpdate a{{1, 2, 3}, 5};
    CHECK(aggregate(std::vector<ModelUpdate>{a})->parameters == a.parameters);
    const ModelUpdate b{{1, 2, 3}, 9};
    const auto same = aggregate(std::vector<ModelUpdate>{a, b});
    for (std::size_t p = 0; p < 3; ++p) CHECK(same->parameters[p] == doctest::Approx(a.parameters[p]));
    CHECK_FALSE(aggregate(std::vector<ModelUpdate>{}).has_value());
    CHECK_THROWS_AS(aggregate(std::vector<ModelUpdate>{a, {{1}, 1}}), PreconditionError);
  }

  TEST_CASE("aggregate equals an independent weighted mean") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng.index(8), dim = 1 + rng.index(20);
      std::vector<ModelUpdate> ups(n);
      double total = 0;
      for (auto& u : ups) {
        u.weight = rng.uniform(1, 500);
        total += u.weight;
        for (std::size_t p = 0; p < dim; ++p) u.parameters.push_back(rng.normal());
      }
      const auto g = aggregate(ups);
      for (std::size_t p = 0; p < dim; ++p) {
        double expect = 0;
        for (const auto& u : ups) expect += u.weight * u.parameters[p];
        expect /= total;
        CHECK(std::abs(g->parameters[p] - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
      }
    }
  }

  TEST_CASE("hierarchical aggregation matches the flat mean") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::vector<ModelUpdate>> groups(1 + rng.index(4));
      std::vector<ModelUpdate> flat;
      for (auto& g : groups) {
        const std::size_t members = rng.index(4);
        for (std::size_t m = 0; m < members; ++m) {
          ModelUpdate u{{rng.normal(), rng.normal(), rng.normal()}, rng.uniform(1, 100)};
          g.push_back(u);
          flat.push_back(u);
        }
      }
      const auto h = aggregate_hierarchical(groups);
      const auto f = aggregate(flat);
      CHECK(h.has_value() == f.has_value());
      if (!h) continue;
      for (std::size_t p = 0; p < 3; ++p) CHECK(std::abs(h->parameters[p] - f->parameters[p]) <= 1e-10);
    }
  }

  TEST_CASE("normalized weights sum to one") {
    const std::vector<double> w{1, 3, 4};
    const auto n = normalized_weights(w);
    CHECK(n[0] == 0.125);
    CHECK(std::accumulate(n.begin(), n.end(), 0.0) == doctest::Approx(1.0));
    const std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(normalized_weights(zero), PreconditionError);
  }

  TEST_CASE("payoff distribution examples") {
    const std::vector<double> equal{3, 3, 3, 3};
    for (double p : distribute_payoffs(100, equal)) CHECK(p == 25.0);
    const std::vector<double> one{7};
    CHECK(distribute_payoffs(13.5, one) == std::vector<double>{13.5});
    CHECK_THROWS_AS(distribute_payoffs(1, std::vector<double>{}), PreconditionError);
  }

  TEST_CASE("payoffs are proportional and conserve the price") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> d(1 + rng.index(12));
      for (auto& x : d) x = static_cast<double>(1 + rng.index(500));
      const double price = rng.uniform(0, 1000);
      const auto pay = distribute_payoffs(price, d);
      CHECK(std::abs(std::accumulate(pay.begin(), pay.end(), 0.0) - price) <= 1e-9);
      const double total = std::accumulate(d.begin(), d.end(), 0.0);
      for (std::size_t i = 0; i < d.size(); ++i) CHECK(pay[i] == doctest::Approx(price * d[i] / total).epsilon(1e-9));
    }
  }
}
