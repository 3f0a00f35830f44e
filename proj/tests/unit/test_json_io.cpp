#include <doctest.h>

#include <json.hpp>

#include "dualgfl/errors.hpp"
#include "dualgfl/json_io.hpp"

using namespace dualgfl;

TEST_SUITE("json_io") {
  TEST_CASE("profiles round-trip") {
    const std::vector<WeakOrder> p{WeakOrder({{1, 2}, {0}}), WeakOrder({{0}, {1}, {2}})};
    const auto text = profiles_to_json(p);
    CHECK(text == "[[[1,2],[0]],[[0],[1],[2]]]");
    CHECK(profiles_from_json(text) == p);
  }

  TEST_CASE("partition round-trip") {
    const auto p = Partition::from_assignment({1, 0, 1, 2}, 3);
    const auto text = partition_to_json(p);
    CHECK(text == R"({"0":[1],"1":[0,2],"2":[3]})");
    CHECK(partition_from_json(text, 4) == p);
  }

  TEST_CASE("hedonic instance round-trip") {
    HedonicInstance inst;
    inst.n_servers = 2;
    inst.capacity = 3;
    inst.data_sizes = {4, 9};
    inst.profiles = {WeakOrder({{1}, {0}}), WeakOrder::indifferent(2)};
    const auto back = hedonic_instance_from_json(hedonic_instance_to_json(inst));
    CHECK(back.n_servers == 2);
    CHECK(back.capacity == 3);
    CHECK(back.data_sizes == inst.data_sizes);
    CHECK(back.profiles == inst.profiles);
  }

  TEST_CASE("bids round-trip exactly") {
    const std::vector<Bid> bids{{3, 0.1 + 0.2, {1.0 / 3.0, 2}, 4.5}, {0, 7, {}, 1}};
    const auto back = bids_from_json(bids_to_json(bids));
    REQUIRE(back.size() == 2);
    CHECK(back[0].coalition == 3);
    CHECK(back[0].price == bids[0].price);
    CHECK(back[0].qualities == bids[0].qualities);
    CHECK(back[0].resource == 4.5);
    CHECK(back[1].qualities.empty());
  }

  TEST_CASE("auction fixture round-trip") {
    AuctionFixture f;
    f.max_winners = 2;
    f.budget = 5;
    f.weights.alpha = {0.5};
    f.bids = {{0, 1, {6}, 2}, {1, 0.5, {5}, 2.5}};
    const auto text = auction_fixture_to_json(f);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["K"] == 2);
    CHECK(j["bids"][0] == nlohmann::json::array({6.0, 1.0, 2.0}));
    const auto back = auction_fixture_from_json(text);
    CHECK(back.max_winners == 2);
    CHECK(back.budget == 5);
    CHECK(back.weights.alpha == std::vector<double>{0.5});
    REQUIRE(back.bids.size() == 2);
    CHECK(back.bids[1].coalition == 1);
    CHECK(back.bids[1].qualities == std::vector<double>{5});
    CHECK(back.bids[1].price == 0.5);
    CHECK(back.bids[1].resource == 2.5);
  }

  TEST_CASE("outcome document") {
    AuctionOutcome o;
    o.winners = {2, 0};
    o.assigned_scores = {1.5, 0.5};
    o.total_score = 2;
    o.spent_resource = 3;
    o.shortfall = 1;
    const auto j = nlohmann::json::parse(outcome_to_json(o));
    CHECK(j["winners"] == nlohmann::json::array({2, 0}));
    CHECK(j["total_score"] == 2.0);
    CHECK(j["shortfall"] == 1);
  }

  TEST_CASE("topology document lists every node") {
    TopologyConfig cfg;
    cfg.n_clients = 5;
    cfg.n_servers = 4;
    Rng rng(1);
    const auto topo = generate_topology(cfg, rng);
    const auto j = nlohmann::json::parse(topology_to_json(topo));
    CHECK(j["servers"].size() == 4);
    CHECK(j["clients"].size() == 5);
    CHECK(j["servers"][3]["position"] == nlohmann::json::array({100.0, 100.0}));
    CHECK(j["clients"][2]["data_size"] == topo.clients[2].data_size);
    CHECK(j["parameters"]["grid_spacing"] == 100.0);
  }

  TEST_CASE("malformed documents are config errors") {
    CHECK_THROWS_AS(profiles_from_json("[[[0]"), ConfigError);
    CHECK_THROWS_AS(profiles_from_json("[[[0, 0]]]"), ConfigError);
    CHECK_THROWS_AS(profiles_from_json(R"([["a"]])"), ConfigError);
    CHECK_THROWS_AS(partition_from_json("[1, 2]", 2), ConfigError);
    CHECK_THROWS_AS(partition_from_json(R"({"0":[0,0]})", 1), ConfigError);
    CHECK_THROWS_AS(partition_from_json(R"({"0":[0]})", 2), ConfigError);
    CHECK_THROWS_AS(partition_from_json(R"({"x":[0]})", 1), ConfigError);
    CHECK_THROWS_AS(partition_from_json(R"({"5":[0]})", 1), ConfigError);
    CHECK_THROWS_AS(hedonic_instance_from_json(R"({"capacity": 2, "profiles": []})"), ConfigError);
    CHECK_THROWS_AS(bids_from_json(R"([{"coalition": 0}])"), ConfigError);
    CHECK_THROWS_AS(auction_fixture_from_json(R"({"M": 1, "E_max": 2, "bids": [[1, 2]]})"), ConfigError);
    CHECK_THROWS_AS(auction_fixture_from_json(R"({"K": 2, "M": 1, "E_max": 2, "bids": [[1, 2, 3]]})"),
                    ConfigError);
    CHECK_THROWS_AS(auction_fixture_from_json(""), ConfigError);
  }
}
