#include "dualgfl/dualgfl.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "dualgfl/auction.hpp"
#include "dualgfl/config.hpp"
#include "dualgfl/errors.hpp"
#include "dualgfl/experiment.hpp"
#include "dualgfl/fedsim.hpp"
#include "dualgfl/hedonic.hpp"
#include "dualgfl/json_io.hpp"
#include "dualgfl/topology.hpp"

struct dgfl_config {
  dualgfl::SimConfig value;
};

struct dgfl_metrics {
  dualgfl::MetricsLog log;
};

struct dgfl_experiment {
  dualgfl::ExperimentSpec spec;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

dgfl_status fail(dgfl_status status, std::string message, std::string key = {}) {
  g_error = std::move(message);
  g_error_key = std::move(key);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
dgfl_status guarded(F&& body) {
  try {
    body();
    return DGFL_OK;
  } catch (const dualgfl::ConfigError& e) {
    return fail(DGFL_ERR_CONFIG, e.what(), e.key());
  } catch (const dualgfl::InfeasibleInstance& e) {
    return fail(DGFL_ERR_INFEASIBLE, e.what());
  } catch (const dualgfl::InfeasibleLink& e) {
    return fail(DGFL_ERR_INFEASIBLE, e.what());
  } catch (const dualgfl::IoError& e) {
    return fail(DGFL_ERR_IO, e.what());
  } catch (const dualgfl::Error& e) {
    return fail(DGFL_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DGFL_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(DGFL_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(DGFL_ERR_RUNTIME, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define DGFL_REQUIRE(cond, what) \
  if (!(cond)) return fail(DGFL_ERR_INVALID_ARGUMENT, what)

double column_value(const dualgfl::RoundRecord& r, const std::string& c) {
  if (c == "round") return r.round;
  if (c == "total_score") return r.total_score;
  if (c == "avg_client_quality") return r.avg_client_quality;
  if (c == "avg_coalition_quality") return r.avg_coalition_quality;
  if (c == "avg_client_payoff") return r.avg_client_payoff;
  if (c == "avg_client_utility") return r.avg_client_utility;
  if (c == "cum_total_score") return r.cum_total_score;
  if (c == "cum_avg_client_quality") return r.cum_avg_client_quality;
  if (c == "cum_avg_coalition_quality") return r.cum_avg_coalition_quality;
  if (c == "cum_avg_client_payoff") return r.cum_avg_client_payoff;
  if (c == "cum_avg_client_utility") return r.cum_avg_client_utility;
  if (c == "test_accuracy") return r.test_accuracy;
  if (c == "n_winning_clients") return r.n_winning_clients;
  throw std::invalid_argument("unknown metrics column '" + c + "'");
}

}  // namespace

extern "C" {

const char* dgfl_version(void) { return "0.1.0"; }
const char* dgfl_last_error(void) { return g_error.c_str(); }
const char* dgfl_last_error_key(void) { return g_error_key.c_str(); }
void dgfl_string_free(char* s) { std::free(s); }

dgfl_status dgfl_config_default(dgfl_config** out) {
  DGFL_REQUIRE(out, "out is null");
  return guarded([&] { *out = new dgfl_config{}; });
}

dgfl_status dgfl_config_load(const char* path, dgfl_config** out) {
  DGFL_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new dgfl_config{dualgfl::load_config(path)}; });
}

dgfl_status dgfl_config_parse(const char* document, dgfl_config** out) {
  DGFL_REQUIRE(document && out, "null argument");
  return guarded([&] { *out = new dgfl_config{dualgfl::parse_config(document)}; });
}

void dgfl_config_free(dgfl_config* config) { delete config; }

dgfl_status dgfl_config_set(dgfl_config* config, const char* key, const char* value) {
  DGFL_REQUIRE(config && key && value, "null argument");
  return guarded([&] { dualgfl::set_config_value(config->value, key, value); });
}

dgfl_status dgfl_config_get(const dgfl_config* config, const char* key, char** out) {
  DGFL_REQUIRE(config && key && out, "null argument");
  return guarded([&] { *out = duplicate(dualgfl::get_config_value(config->value, key)); });
}

dgfl_status dgfl_config_validate(const dgfl_config* config) {
  DGFL_REQUIRE(config, "config is null");
  return guarded([&] { config->value.validate(); });
}

dgfl_status dgfl_config_emit(const dgfl_config* config, char** out) {
  DGFL_REQUIRE(config && out, "null argument");
  return guarded([&] { *out = duplicate(dualgfl::emit_config(config->value)); });
}

dgfl_status dgfl_simulate(const dgfl_config* config, dgfl_metrics** out) {
  DGFL_REQUIRE(config && out, "null argument");
  return guarded([&] { *out = new dgfl_metrics{dualgfl::run_simulation(config->value)}; });
}

void dgfl_metrics_free(dgfl_metrics* metrics) { delete metrics; }

dgfl_status dgfl_metrics_rounds(const dgfl_metrics* metrics, size_t* out) {
  DGFL_REQUIRE(metrics && out, "null argument");
  *out = metrics->log.records.size();
  return DGFL_OK;
}

dgfl_status dgfl_metrics_value(const dgfl_metrics* metrics, size_t round, const char* column, double* out) {
  DGFL_REQUIRE(metrics && column && out, "null argument");
  DGFL_REQUIRE(round < metrics->log.records.size(), "round out of range");
  try {
    *out = column_value(metrics->log.records[round], column);
  } catch (const std::invalid_argument& e) {
    return fail(DGFL_ERR_INVALID_ARGUMENT, e.what());
  }
  return DGFL_OK;
}

dgfl_status dgfl_metrics_cohort_size(const dgfl_metrics* metrics, int* out) {
  DGFL_REQUIRE(metrics && out, "null argument");
  *out = metrics->log.cohort_size;
  return DGFL_OK;
}

dgfl_status dgfl_metrics_csv(const dgfl_metrics* metrics, char** out) {
  DGFL_REQUIRE(metrics && out, "null argument");
  return guarded([&] { *out = duplicate(dualgfl::metrics_csv(metrics->log)); });
}

dgfl_status dgfl_topology_generate(const dgfl_config* config, char** out_json) {
  DGFL_REQUIRE(config && out_json, "null argument");
  return guarded([&] {
    dualgfl::Rng rng(config->value.seed);
    const auto topo = dualgfl::generate_topology(config->value.topology_config(), rng);
    *out_json = duplicate(dualgfl::topology_to_json(topo));
  });
}

dgfl_status dgfl_pop_solve(const char* instance_json, uint64_t seed, char** out_partition_json) {
  DGFL_REQUIRE(instance_json && out_partition_json, "null argument");
  return guarded([&] {
    const auto instance = dualgfl::hedonic_instance_from_json(instance_json);
    dualgfl::Rng rng(seed);
    *out_partition_json = duplicate(dualgfl::partition_to_json(dualgfl::pop(instance, rng)));
  });
}

dgfl_status dgfl_auction_select(const char* fixture_json, const char* algorithm, char** out_outcome_json) {
  DGFL_REQUIRE(fixture_json && algorithm && out_outcome_json, "null argument");
  const std::string algo = algorithm;
  DGFL_REQUIRE(algo == "greedy" || algo == "exact", "algorithm must be greedy or exact");
  return guarded([&] {
    const auto f = dualgfl::auction_fixture_from_json(fixture_json);
    const auto outcome = algo == "greedy"
                             ? dualgfl::select_winners_greedy(f.bids, f.weights, f.max_winners, f.budget)
                             : dualgfl::select_winners_exact(f.bids, f.weights, f.max_winners, f.budget);
    *out_outcome_json = duplicate(dualgfl::outcome_to_json(outcome));
  });
}

dgfl_status dgfl_experiment_create(const dgfl_config* base, dgfl_experiment** out) {
  DGFL_REQUIRE(base && out, "null argument");
  return guarded([&] {
    auto* e = new dgfl_experiment{};
    e->spec.base = base->value;
    e->spec.out_dir = ".";
    *out = e;
  });
}

void dgfl_experiment_free(dgfl_experiment* experiment) { delete experiment; }

dgfl_status dgfl_experiment_add_seed(dgfl_experiment* experiment, uint64_t seed) {
  DGFL_REQUIRE(experiment, "experiment is null");
  return guarded([&] { experiment->spec.seeds.push_back(seed); });
}

dgfl_status dgfl_experiment_add_method(dgfl_experiment* experiment, const char* method) {
  DGFL_REQUIRE(experiment && method, "null argument");
  return guarded([&] { experiment->spec.methods.push_back(dualgfl::parse_method(method)); });
}

dgfl_status dgfl_experiment_set_out(dgfl_experiment* experiment, const char* dir) {
  DGFL_REQUIRE(experiment && dir, "null argument");
  return guarded([&] { experiment->spec.out_dir = dir; });
}

dgfl_status dgfl_experiment_set_ablation(dgfl_experiment* experiment, const char* spec) {
  DGFL_REQUIRE(experiment && spec, "null argument");
  return guarded([&] { experiment->spec.ablation = dualgfl::parse_ablation(spec); });
}

dgfl_status dgfl_experiment_run(dgfl_experiment* experiment, size_t* out_files) {
  DGFL_REQUIRE(experiment, "experiment is null");
  return guarded([&] {
    const auto result = dualgfl::run_experiment(experiment->spec);
    if (out_files) *out_files = result.files.size();
  });
}

}  // extern "C"
