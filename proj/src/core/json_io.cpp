#include "dualgfl/json_io.hpp"

#include <json.hpp>

#include "dualgfl/errors.hpp"

namespace dualgfl {

namespace {

using json = nlohmann::ordered_json;

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what, std::string("malformed JSON: ") + e.what());
  }
}

// Runs a reader, turning type and key errors into ConfigError.
template <typename F>
auto reading(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(what, e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(what, e.what());
  }
}

json weak_order_json(const WeakOrder& w) { return json(w.classes()); }

json bid_json(const Bid& b) {
  return {{"coalition", b.coalition}, {"price", b.price}, {"qualities", b.qualities}, {"resource", b.resource}};
}

}  // namespace

std::string topology_to_json(const Topology& topo) {
  json clients = json::array();
  for (const auto& c : topo.clients) {
    clients.push_back({{"id", c.id},
                       {"position", {c.position.x, c.position.y}},
                       {"data_size", c.data_size},
                       {"cost_factor", c.cost_factor},
                       {"compute", {{"kappa", c.compute.kappa}, {"cycles", c.compute.cycles}, {"clock", c.compute.clock}}}});
  }
  json servers = json::array();
  for (const auto& s : topo.servers) servers.push_back({{"id", s.id}, {"position", {s.position.x, s.position.y}}});
  json out = {{"parameters",
               {{"model_size", topo.model_size},
                {"grid_spacing", topo.grid_spacing},
                {"bandwidth", topo.bandwidth},
                {"tx_power", topo.tx_power},
                {"noise_psd", topo.noise_psd},
                {"reference_distance", topo.reference_distance},
                {"path_loss_exponent", topo.path_loss_exponent}}},
              {"servers", servers},
              {"clients", clients}};
  return out.dump(2);
}

std::string profiles_to_json(std::span<const WeakOrder> profiles) {
  json out = json::array();
  for (const auto& w : profiles) out.push_back(weak_order_json(w));
  return out.dump();
}

std::vector<WeakOrder> profiles_from_json(std::string_view text) {
  const json j = parse(text, "profiles");
  return reading("profiles", [&] {
    std::vector<WeakOrder> out;
    for (const auto& p : j) out.emplace_back(p.get<std::vector<std::vector<int>>>());
    return out;
  });
}

std::string partition_to_json(const Partition& p) {
  json out = json::object();
  for (std::size_t k = 0; k < p.coalitions.size(); ++k) out[std::to_string(k)] = p.coalitions[k];
  return out.dump();
}

Partition partition_from_json(std::string_view text, int n_clients) {
  const json j = parse(text, "partition");
  return reading("partition", [&] {
    if (!j.is_object()) throw ConfigError("partition", "expected an object of server id -> clients");
    const int n_servers = static_cast<int>(j.size());
    std::vector<int> assignment(n_clients, -1);
    for (const auto& [key, members] : j.items()) {
      int k = -1;
      try {
        k = std::stoi(key);
      } catch (const std::exception&) {
        throw ConfigError("partition", "server id '" + key + "' is not an integer");
      }
      if (k < 0 || k >= n_servers) throw ConfigError("partition", "server id " + key + " out of range");
      for (int i : members.get<std::vector<int>>()) {
        if (i < 0 || i >= n_clients || assignment[i] != -1) {
          throw ConfigError("partition", "client " + std::to_string(i) + " invalid or listed twice");
        }
        assignment[i] = k;
      }
    }
    for (int i = 0; i < n_clients; ++i) {
      if (assignment[i] < 0) throw ConfigError("partition", "client " + std::to_string(i) + " unassigned");
    }
    return Partition::from_assignment(std::move(assignment), n_servers);
  });
}

std::string hedonic_instance_to_json(const HedonicInstance& instance) {
  json profiles = json::array();
  for (const auto& w : instance.profiles) profiles.push_back(weak_order_json(w));
  json out = {{"n_servers", instance.n_servers},
              {"capacity", instance.capacity},
              {"data_sizes", instance.data_sizes},
              {"profiles", profiles}};
  return out.dump();
}

HedonicInstance hedonic_instance_from_json(std::string_view text) {
  const json j = parse(text, "instance");
  return reading("instance", [&] {
    HedonicInstance inst;
    inst.n_servers = j.at("n_servers").get<int>();
    inst.capacity = j.at("capacity").get<int>();
    if (j.contains("data_sizes")) inst.data_sizes = j.at("data_sizes").get<std::vector<std::size_t>>();
    for (const auto& p : j.at("profiles")) inst.profiles.emplace_back(p.get<std::vector<std::vector<int>>>());
    return inst;
  });
}

std::string bids_to_json(std::span<const Bid> bids) {
  json out = json::array();
  for (const auto& b : bids) out.push_back(bid_json(b));
  return out.dump();
}

std::vector<Bid> bids_from_json(std::string_view text) {
  const json j = parse(text, "bids");
  return reading("bids", [&] {
    std::vector<Bid> out;
    for (const auto& b : j) {
      Bid bid;
      bid.coalition = b.at("coalition").get<int>();
      bid.price = b.at("price").get<double>();
      bid.qualities = b.at("qualities").get<std::vector<double>>();
      bid.resource = b.value("resource", 1.0);
      out.push_back(std::move(bid));
    }
    return out;
  });
}

std::string outcome_to_json(const AuctionOutcome& outcome) {
  json out = {{"winners", outcome.winners},
              {"assigned_scores", outcome.assigned_scores},
              {"total_score", outcome.total_score},
              {"spent_resource", outcome.spent_resource},
              {"shortfall", outcome.shortfall}};
  return out.dump();
}

std::string auction_fixture_to_json(const AuctionFixture& fixture) {
  json bids = json::array();
  for (const auto& b : fixture.bids) {
    bids.push_back({b.qualities.empty() ? 0.0 : b.qualities.front(), b.price, b.resource});
  }
  json out = {{"K", fixture.bids.size()},
              {"M", fixture.max_winners},
              {"E_max", fixture.budget},
              {"alpha", fixture.weights.alpha.empty() ? 1.0 : fixture.weights.alpha.front()},
              {"bids", bids}};
  return out.dump();
}

AuctionFixture auction_fixture_from_json(std::string_view text) {
  const json j = parse(text, "fixture");
  return reading("fixture", [&] {
    AuctionFixture f;
    f.max_winners = j.at("M").get<std::size_t>();
    f.budget = j.at("E_max").get<double>();
    f.weights.alpha = {j.value("alpha", 1.0)};
    int id = 0;
    for (const auto& t : j.at("bids")) {
      const auto triple = t.get<std::vector<double>>();
      if (triple.size() != 3) throw ConfigError("fixture", "each bid must be a [Q, P, E] triple");
      f.bids.push_back({id++, triple[1], {triple[0]}, triple[2]});
    }
    if (j.contains("K") && j.at("K").get<std::size_t>() != f.bids.size()) {
      throw ConfigError("fixture", "K does not match the number of bids");
    }
    return f;
  });
}

}  // namespace dualgfl
