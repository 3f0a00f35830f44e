#include <doctest.h>

#include <numeric>

#include "dualgfl/errors.hpp"
#include "dualgfl/hedonic.hpp"

using namespace dualgfl;

namespace {

WeakOrder random_weak_order(int k, Rng& rng, double tie_probability) {
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<int>> classes{{order[0]}};
  for (int j = 1; j < k; ++j) {
    if (rng.uniform() < tie_probability) {
      classes.back().push_back(order[j]);
    } else {
      classes.push_back({order[j]});
    }
  }
  return WeakOrder(std::move(classes));
}

HedonicInstance random_instance(int n, int k, int capacity, Rng& rng, double tie_probability) {
  HedonicInstance inst;
  inst.n_servers = k;
  inst.capacity = capacity;
  for (int i = 0; i < n; ++i) {
    inst.profiles.push_back(random_weak_order(k, rng, tie_probability));
    inst.data_sizes.push_back(1 + rng.index(5));
  }
  return inst;
}

WeakOrder strict_of(std::initializer_list<int> order) {
  const std::vector<int> v(order);
  return WeakOrder::strict(v);
}

}  // namespace

TEST_SUITE("hedonic") {
  TEST_CASE("perfect partition: everyone indifferent always succeeds") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.index(4));
      const int cap = 1 + static_cast<int>(rng.index(4));
      const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(cap * k)));
      HedonicInstance inst;
      inst.n_servers = k;
      inst.capacity = cap;
      inst.profiles.assign(n, WeakOrder::indifferent(k));
      const auto p = perfect_partition(inst, inst.profiles, rng);
      REQUIRE(p.has_value());
      CHECK_NOTHROW(validate_partition(*p, n, k, cap));
    }
  }

  TEST_CASE("perfect partition: distinct strict tops are honoured") {
    HedonicInstance inst;
    inst.n_servers = 2;
    inst.capacity = 1;
    inst.profiles = {strict_of({0, 1}), strict_of({1, 0})};
    Rng rng(4);
    const auto p = perfect_partition(inst, inst.profiles, rng);
    REQUIRE(p.has_value());
    CHECK(p->assignment == std::vector<int>{0, 1});
  }

  TEST_CASE("perfect partition: three clients topping one server of capacity two") {
    HedonicInstance inst;
    inst.n_servers = 2;
    inst.capacity = 2;
    inst.profiles.assign(3, strict_of({0, 1}));
    Rng rng(4);
    CHECK_FALSE(perfect_partition(inst, inst.profiles, rng).has_value());
  }

  TEST_CASE("perfect partition agrees with enumeration on existence") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
      const int k = 1 + static_cast<int>(rng.index(3));
      const int cap = 1 + static_cast<int>(rng.index(3));
      const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::min(cap * k, 6))));
      auto inst = random_instance(n, k, cap, rng, 0.4);
      bool exists = false;
      for_each_feasible_partition(n, k, cap, [&](const std::vector<int>& a) {
        bool all_top = true;
        for (int i = 0; i < n; ++i) all_top = all_top && inst.profiles[i].in_top(a[i]);
        exists = exists || all_top;
      });
      const auto p = perfect_partition(inst, inst.profiles, rng);
      CHECK(p.has_value() == exists);
      if (p) {
        validate_partition(*p, n, k, cap);
        for (int i = 0; i < n; ++i) CHECK(inst.profiles[i].in_top(p->assignment[i]));
      }
    }
  }

  TEST_CASE("refine promotes one indifference") {
    const auto top = strict_of({0, 1, 2});
    const auto bottom = WeakOrder::indifferent(3);
    const auto once = refine(bottom, top);
    CHECK(once.class_count() == 2);
    CHECK(is_coarsening(bottom, once));
    CHECK(is_coarsening(once, top));
    // The lowest-ranked indifference is split first.
    CHECK(once.classes()[0] == std::vector<int>{0, 1});
    CHECK(once.classes()[1] == std::vector<int>{2});
  }

  TEST_CASE("refine rejects equal or non-nested profiles") {
    const auto top = strict_of({0, 1, 2});
    CHECK_THROWS_AS(refine(top, top), PreconditionError);
    CHECK_THROWS_AS(refine(WeakOrder({{0, 2}, {1}}), top), PreconditionError);
  }

  TEST_CASE("repeated refinement reaches the target in strict-pair steps") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.index(7));
      const auto top = random_weak_order(k, rng, 0.3);
      auto cur = WeakOrder::indifferent(k);
      int steps = 0;
      while (!(cur == top)) {
        const auto next = refine(cur, top);
        CHECK(next.class_count() == cur.class_count() + 1);
        cur = next;
        ++steps;
      }
      CHECK(steps == top.strict_pairs());
    }
  }

  TEST_CASE("pop: one client, one server") {
    HedonicInstance inst;
    inst.n_servers = 1;
    inst.capacity = 1;
    inst.profiles = {WeakOrder::indifferent(1)};
    Rng rng(1);
    const auto p = pop(inst, rng);
    CHECK(p.assignment == std::vector<int>{0});
    CHECK(is_pareto_optimal_bruteforce(p, inst));
  }

  TEST_CASE("pop: all-indifferent profiles") {
    HedonicInstance inst;
    inst.n_servers = 3;
    inst.capacity = 2;
    inst.profiles.assign(5, WeakOrder::indifferent(3));
    Rng rng(2);
    const auto p = pop(inst, rng);
    CHECK_NOTHROW(validate_partition(p, 5, 3, 2));
    CHECK(is_pareto_optimal_bruteforce(p, inst));
  }

  TEST_CASE("pop: random strict 5x3 instances with capacity 2 are Pareto-optimal") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto inst = random_instance(5, 3, 2, rng, 0.0);
      PopStats stats;
      const auto p = pop(inst, rng, &stats);
      validate_partition(p, 5, 3, 2);
      CHECK(is_pareto_optimal_bruteforce(p, inst));
      CHECK(stats.iterations <= stats.iteration_bound);
    }
  }

  TEST_CASE("pop: random weak instances are Pareto-optimal") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng.index(6));
      const int k = 1 + static_cast<int>(rng.index(3));
      int cap = 2 + static_cast<int>(rng.index(2));
      while (cap * k < n) ++cap;
      const auto inst = random_instance(n, k, cap, rng, 0.35);
      const auto p = pop(inst, rng);
      CHECK(is_pareto_optimal_bruteforce(p, inst));
    }
  }

  TEST_CASE("pop: infeasible capacity") {
    HedonicInstance inst;
    inst.n_servers = 2;
    inst.capacity = 1;
    inst.profiles.assign(3, WeakOrder::indifferent(2));
    Rng rng(1);
    CHECK_THROWS_AS(pop(inst, rng), InfeasibleInstance);
  }

  TEST_CASE("pop: malformed profiles") {
    HedonicInstance inst;
    inst.n_servers = 3;
    inst.capacity = 3;
    inst.profiles = {WeakOrder::indifferent(2)};
    Rng rng(1);
    CHECK_THROWS_AS(pop(inst, rng), PreconditionError);
  }

  TEST_CASE("pareto dominance examples") {
    const std::vector<WeakOrder> prof{strict_of({0, 1}), strict_of({1, 0})};
    const auto a = Partition::from_assignment({0, 1}, 2);
    const auto b = Partition::from_assignment({1, 1}, 2);
    CHECK_FALSE(pareto_dominates(a, a, prof));
    CHECK(pareto_dominates(a, b, prof));
    CHECK_FALSE(pareto_dominates(b, a, prof));
  }

  TEST_CASE("pareto dominance agrees with per-client recomputation") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + static_cast<int>(rng.index(5));
      const int k = 1 + static_cast<int>(rng.index(3));
      const auto inst = random_instance(n, k, n, rng, 0.4);
      std::vector<int> x(n), y(n);
      for (int i = 0; i < n; ++i) {
        x[i] = static_cast<int>(rng.index(k));
        y[i] = static_cast<int>(rng.index(k));
      }
      const auto a = Partition::from_assignment(x, k);
      const auto b = Partition::from_assignment(y, k);
      bool weak = true, strict = false;
      for (int i = 0; i < n; ++i) {
        const int ra = inst.profiles[i].rank(x[i]);
        const int rb = inst.profiles[i].rank(y[i]);
        weak = weak && ra <= rb;
        strict = strict || ra < rb;
      }
      CHECK(pareto_dominates(a, b, inst.profiles) == (weak && strict));
    }
  }

  TEST_CASE("brute-force oracle") {
    HedonicInstance single;
    single.n_servers = 2;
    single.capacity = 1;
    single.profiles = {strict_of({1, 0})};
    CHECK(is_pareto_optimal_bruteforce(Partition::from_assignment({0}, 2), single) == false);

    // Client 1 can move to empty server 2, which it strictly prefers.
    HedonicInstance inst;
    inst.n_servers = 3;
    inst.capacity = 2;
    inst.profiles = {strict_of({0, 1, 2}), strict_of({2, 0, 1})};
    CHECK_FALSE(is_pareto_optimal_bruteforce(Partition::from_assignment({0, 0}, 3), inst));
    CHECK(is_pareto_optimal_bruteforce(Partition::from_assignment({0, 2}, 3), inst));

    HedonicInstance one;
    one.n_servers = 1;
    one.capacity = 1;
    one.profiles = {WeakOrder::indifferent(1)};
    CHECK(is_pareto_optimal_bruteforce(Partition::from_assignment({0}, 1), one));

    HedonicInstance big;
    big.n_servers = 5;
    big.capacity = 3;
    big.profiles.assign(3, WeakOrder::indifferent(5));
    CHECK_THROWS_AS(is_pareto_optimal_bruteforce(Partition::from_assignment({0, 0, 0}, 5), big), GuardError);
  }

  TEST_CASE("pop on 50 clients and 9 servers stays within the iteration bound") {
    Rng rng(50);
    const auto inst = random_instance(50, 9, 10, rng, 0.2);
    PopStats stats;
    const auto p = pop(inst, rng, &stats);
    validate_partition(p, 50, 9, 10);
    CHECK(stats.iterations <= stats.iteration_bound);
    CHECK(stats.accepted <= stats.iterations);
  }

  TEST_CASE("truthful reports: single-client misreports never help on small instances") {
    // Spot check. The mechanism is not claimed to be strategyproof for every
    // tie-break; count gains from swapping adjacent strict classes.
    Rng rng(77);
    int gains = 0, trials = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const auto inst = random_instance(4, 3, 2, rng, 0.0);
      const std::uint64_t seed = 1000 + trial;
      Rng r1(seed);
      const auto truthful = pop(inst, r1);
      for (int i = 0; i < 4; ++i) {
        auto classes = inst.profiles[i].classes();
        std::swap(classes[0], classes[1]);
        HedonicInstance lie = inst;
        lie.profiles[i] = WeakOrder(classes);
        Rng r2(seed);
        const auto out = pop(lie, r2);
        ++trials;
        if (inst.profiles[i].rank(out.assignment[i]) < inst.profiles[i].rank(truthful.assignment[i])) ++gains;
      }
    }
    MESSAGE("profitable top-swap misreports: " << gains << " of " << trials);
    CHECK(trials == 240);
  }

  TEST_CASE("partition validation") {
    CHECK_THROWS_AS(validate_partition(Partition::from_assignment({0, 0, 0}, 2), 3, 2, 2), PreconditionError);
    CHECK_THROWS_AS(validate_partition(Partition::from_assignment({0, 1}, 2), 3, 2, 2), PreconditionError);
    CHECK_THROWS_AS(Partition::from_assignment({0, 2}, 2), PreconditionError);
    CHECK_NOTHROW(validate_partition(Partition::from_assignment({0, 1, 1}, 2), 3, 2, 2));
  }
}
