#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dualgfl/errors.hpp"
#include "dualgfl/fedsim.hpp"

using namespace dualgfl;

namespace {

SimConfig small_config(Method method, int rounds = 10) {
  SimConfig c;
  c.method = method;
  c.rounds = rounds;
  c.n_clients = 20;
  c.n_servers = 4;
  c.capacity = 8;
  c.winners_per_round = 2;
  c.train_samples = 1000;
  c.test_samples = 200;
  c.n_features = 8;
  c.n_classes = 4;
  c.budget = 12;
  c.quality_weight = 1.0;
  c.seed = 5;
  return c;
}

constexpr Method kAll[] = {Method::DualGFL, Method::DualGFLStat, Method::FedAvg, Method::FedAvgAuc,
                           Method::FedAvgHed};

}  // namespace

TEST_SUITE("fedsim") {
  TEST_CASE("method names round-trip") {
    for (Method m : kAll) CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("fedprox"), ConfigError);
    CHECK(uses_coalitions(Method::FedAvgHed));
    CHECK_FALSE(uses_coalitions(Method::FedAvgAuc));
  }

  TEST_CASE("the small setting admits winners for every method") {
    for (Method m : {Method::DualGFL, Method::DualGFLStat, Method::FedAvg, Method::FedAvgAuc, Method::FedAvgHed}) {
      const auto log = run_simulation(small_config(m, 3), SimOptions{false});
      int winners = 0;
      for (const auto& r : log.records) winners += r.n_winning_clients;
      CHECK(winners > 0);
    }
  }

  TEST_CASE("a single round gives cumulative equal to instantaneous") {
    for (Method m : kAll) {
      const auto log = run_simulation(small_config(m, 1));
      REQUIRE(log.records.size() == 1);
      const auto& r = log.records[0];
      CHECK(r.cum_total_score == r.total_score);
      CHECK(r.cum_avg_client_quality == r.avg_client_quality);
      CHECK(r.cum_avg_coalition_quality == r.avg_coalition_quality);
      CHECK(r.cum_avg_client_payoff == r.avg_client_payoff);
      CHECK(r.cum_avg_client_utility == r.avg_client_utility);
    }
  }

  TEST_CASE("cumulative columns are running means") {
    const auto log = run_simulation(small_config(Method::DualGFL, 8), {false});
    double sum = 0;
    for (std::size_t t = 0; t < log.records.size(); ++t) {
      sum += log.records[t].avg_client_utility;
      CHECK(log.records[t].cum_avg_client_utility == doctest::Approx(sum / static_cast<double>(t + 1)));
    }
  }

  TEST_CASE("fixed seed reproduces identical CSV") {
    for (Method m : kAll) {
      const auto cfg = small_config(m, 5);
      CHECK(metrics_csv(run_simulation(cfg)) == metrics_csv(run_simulation(cfg)));
    }
  }

  TEST_CASE("different seeds differ") {
    auto a = small_config(Method::DualGFL, 5);
    auto b = a;
    b.seed = 6;
    CHECK(metrics_csv(run_simulation(a, {false})) != metrics_csv(run_simulation(b, {false})));
  }

  TEST_CASE("skipping training leaves the game untouched") {
    for (Method m : kAll) {
      const auto cfg = small_config(m, 6);
      const auto with = run_simulation(cfg);
      const auto without = run_simulation(cfg, {false});
      for (std::size_t t = 0; t < with.records.size(); ++t) {
        CHECK(with.records[t].winners == without.records[t].winners);
        CHECK(with.records[t].total_score == without.records[t].total_score);
        CHECK(with.records[t].avg_client_utility == without.records[t].avg_client_utility);
      }
    }
  }

  TEST_CASE("partitions are valid every round") {
    for (Method m : {Method::DualGFL, Method::DualGFLStat, Method::FedAvgHed}) {
      const auto cfg = small_config(m, 10);
      const auto log = run_simulation(cfg, {false});
      for (const auto& r : log.records) {
        const auto p = Partition::from_assignment(r.partition, cfg.n_servers);
        CHECK_NOTHROW(validate_partition(p, cfg.n_clients, cfg.n_servers, cfg.capacity));
      }
    }
  }

  TEST_CASE("record invariants hold every round") {
    for (Method m : kAll) {
      const auto cfg = small_config(m, 10);
      const auto log = run_simulation(cfg);
      for (const auto& r : log.records) {
        // Total score is the sum of the winners' recomputed scores.
        double total = 0;
        for (const auto& b : r.winner_bids) total += score(b, ScoringWeights{{cfg.quality_weight}});
        CHECK(r.total_score == doctest::Approx(total).epsilon(1e-12));
        CHECK(r.payoff_sum == doctest::Approx(r.contract_price_sum).epsilon(1e-9));
        const double paid = std::accumulate(r.client_payoffs.begin(), r.client_payoffs.end(), 0.0);
        CHECK(paid == doctest::Approx(r.contract_price_sum).epsilon(1e-9));
        if (r.n_winning_clients > 0) {
          CHECK(r.aggregation_weight_sum == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(r.hierarchical_flat_gap <= 1e-10);
        }
        if (uses_coalitions(m)) {
          CHECK(r.winners.size() <= static_cast<std::size_t>(cfg.winners_per_round));
          double spent = 0;
          for (const auto& b : r.winner_bids) spent += b.resource;
          CHECK(spent <= cfg.budget + 1e-12);
        } else {
          CHECK(r.winners.size() <= static_cast<std::size_t>(log.cohort_size));
        }
        CHECK(r.n_winning_clients >= static_cast<int>(r.winners.size()));
        CHECK((r.test_accuracy >= 0 && r.test_accuracy <= 1));
      }
    }
  }

  TEST_CASE("winning quality and payoff metrics follow their definitions") {
    const auto cfg = small_config(Method::DualGFL, 5);
    Simulation sim(cfg, {false});
    for (int t = 0; t < cfg.rounds; ++t) {
      const auto r = sim.run_round();
      if (r.winners.empty()) continue;
      double data = 0, payoff = 0;
      int members = 0;
      for (int i = 0; i < cfg.n_clients; ++i) {
        if (r.partition[i] < 0) continue;
        if (std::find(r.winners.begin(), r.winners.end(), r.partition[i]) == r.winners.end()) continue;
        data += static_cast<double>(sim.topology().clients[i].data_size);
        payoff += r.client_payoffs[i];
        ++members;
      }
      CHECK(members == r.n_winning_clients);
      CHECK(r.avg_client_quality == doctest::Approx(data / members));
      CHECK(r.avg_client_payoff == doctest::Approx(payoff / members));
      double q = 0;
      for (const auto& b : r.winner_bids) q += b.qualities[0];
      CHECK(r.avg_coalition_quality == doctest::Approx(q / static_cast<double>(r.winner_bids.size())));
    }
  }

  TEST_CASE("only winning coalitions move their payoff estimate") {
    const auto cfg = small_config(Method::DualGFL, 1);
    Simulation sim(cfg, {false});
    const double prior = sim.estimator().prior();
    const auto r = sim.run_round();
    for (int k = 0; k < cfg.n_servers; ++k) {
      const bool won = std::find(r.winners.begin(), r.winners.end(), k) != r.winners.end();
      if (!won) CHECK(sim.estimator().estimate(k) == prior);
    }
    for (std::size_t j = 0; j < r.winners.size(); ++j) {
      const double expect = cfg.ema_alpha * prior + (1 - cfg.ema_alpha) * r.winner_bids[j].price;
      CHECK(sim.estimator().estimate(r.winners[j]) == doctest::Approx(expect));
    }
  }

  TEST_CASE("baseline cohort matches DualGFL's mean winner count") {
    const auto cfg = small_config(Method::FedAvg, 12);
    const auto dual = run_simulation(small_config(Method::DualGFL, 12), {false});
    double mean = 0;
    for (const auto& r : dual.records) mean += r.n_winning_clients;
    mean /= static_cast<double>(dual.records.size());
    const auto fedavg = run_simulation(cfg, {false});
    CHECK(std::abs(fedavg.cohort_size - mean) <= 1.0);
    for (const auto& r : fedavg.records) CHECK(std::abs(r.n_winning_clients - mean) <= 1.0);
  }

  TEST_CASE("explicit cohort size overrides the matched one") {
    auto cfg = small_config(Method::FedAvg, 3);
    cfg.cohort_size = 4;
    const auto log = run_simulation(cfg, {false});
    CHECK(log.cohort_size == 4);
    for (const auto& r : log.records) CHECK(r.n_winning_clients == 4);
  }

  TEST_CASE("strategic quality bids never exceed the coalition's data") {
    auto cfg = small_config(Method::DualGFL, 3);
    cfg.bid_mode = BidMode::StrategicQuality;
    Simulation sim(cfg, {false});
    for (int t = 0; t < cfg.rounds; ++t) {
      const auto r = sim.run_round();
      for (std::size_t j = 0; j < r.winners.size(); ++j) {
        double data = 0;
        for (int i = 0; i < cfg.n_clients; ++i) {
          if (r.partition[i] == r.winners[j]) data += static_cast<double>(sim.topology().clients[i].data_size);
        }
        CHECK(r.winner_bids[j].qualities[0] <= data + 1e-9);
      }
    }
  }

  TEST_CASE("config validation names the offending key") {
    auto expect_key = [](SimConfig c, const char* key) {
      try {
        c.validate();
        FAIL("expected a config error for " << key);
      } catch (const ConfigError& e) {
        CHECK(e.key() == key);
      }
    };
    SimConfig c;
    c.winners_per_round = c.n_servers + 1;
    expect_key(c, "winners_per_round");
    c = {};
    c.capacity = 2;
    expect_key(c, "capacity");
    c = {};
    c.ema_alpha = 1.5;
    expect_key(c, "ema_alpha");
    c = {};
    c.budget = 0;
    expect_key(c, "budget");
    c = {};
    c.cohort_size = -1;
    expect_key(c, "cohort_size");
    c = {};
    c.coalition_theta_low = 2;
    expect_key(c, "coalition_theta_low");
    CHECK_NOTHROW(SimConfig{}.validate());
  }

  TEST_CASE("CSV layout") {
    const auto log = run_simulation(small_config(Method::FedAvgAuc, 2), {false});
    const auto csv = metrics_csv(log);
    CHECK(csv.rfind(metrics_csv_header() + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find(",fedavgauc,") != std::string::npos);
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456.789, 1.0 / 3.0}) {
      CHECK(std::stod(format_double(v)) == v);
    }
  }
}
