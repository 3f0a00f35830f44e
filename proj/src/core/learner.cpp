#include "dualgfl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualgfl/errors.hpp"

namespace dualgfl {

SyntheticTask make_gaussian_mixture(const SyntheticTaskConfig& config, Rng& rng) {
  if (config.n_classes < 2) throw ConfigError("n_classes", "need at least two classes");
  if (config.n_features < 1) throw ConfigError("n_features", "need at least one feature");
  if (config.train_samples < 1 || config.test_samples < 1) {
    throw ConfigError("train_samples", "train and test sets must be nonempty");
  }

  std::vector<double> means(config.n_classes * config.n_features);
  for (auto& m : means) m = rng.normal(0.0, config.class_separation);

  auto sample = [&](std::size_t n) {
    Dataset d;
    d.n_features = config.n_features;
    d.n_classes = config.n_classes;
    d.features.resize(n * config.n_features);
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = rng.index(config.n_classes);
      d.labels[i] = static_cast<int>(c);
      for (std::size_t f = 0; f < config.n_features; ++f) {
        d.features[i * config.n_features + f] = means[c * config.n_features + f] + rng.normal();
      }
    }
    return d;
  };

  SyntheticTask task;
  task.train = sample(config.train_samples);
  task.test = sample(config.test_samples);
  return task;
}

std::vector<std::size_t> LearnerDataset::client_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(client_indices.size());
  for (const auto& idx : client_indices) sizes.push_back(idx.size());
  return sizes;
}

namespace {

// Largest-remainder apportionment of `total` items by `shares` (sum 1).
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> shares) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < total; ++r, ++used) ++counts[remainders[r % remainders.size()].second];
  return counts;
}

std::vector<double> dirichlet(std::size_t n, double beta, Rng& rng) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& x : p) {
    x = rng.gamma(beta);
    sum += x;
  }
  if (!(sum > 0.0)) {
    // Every gamma draw underflowed; all mass lands on one client.
    std::fill(p.begin(), p.end(), 0.0);
    p[rng.index(n)] = 1.0;
    return p;
  }
  for (auto& x : p) x /= sum;
  return p;
}

}  // namespace

std::vector<std::vector<std::size_t>> dirichlet_partition(std::span<const int> labels,
                                                          std::size_t n_classes, int n_clients,
                                                          double beta, Rng& rng) {
  if (n_clients < 1) throw ConfigError("n_clients", "must be at least 1");
  if (!(beta > 0)) throw ConfigError("dirichlet_beta", "must be positive");
  if (labels.size() < static_cast<std::size_t>(n_clients)) {
    throw ConfigError("train_samples", "dataset has fewer samples than clients");
  }

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
      throw PreconditionError("label outside class range");
    }
    by_class[labels[i]].push_back(i);
  }

  std::vector<std::vector<std::size_t>> clients;
  constexpr int kAttempts = 20;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    clients.assign(n_clients, {});
    for (auto& members : by_class) {
      if (members.empty()) continue;
      rng.shuffle(members);
      const auto counts = apportion(members.size(), dirichlet(n_clients, beta, rng));
      std::size_t pos = 0;
      for (int c = 0; c < n_clients; ++c) {
        clients[c].insert(clients[c].end(), members.begin() + pos, members.begin() + pos + counts[c]);
        pos += counts[c];
      }
    }
    if (std::none_of(clients.begin(), clients.end(), [](const auto& v) { return v.empty(); })) break;
    if (attempt + 1 == kAttempts) {
      // Resampling keeps stranding someone: hand each empty client one sample
      // from whoever currently holds the most.
      for (auto& c : clients) {
        if (!c.empty()) continue;
        auto donor = std::max_element(clients.begin(), clients.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
        c.push_back(donor->back());
        donor->pop_back();
      }
    }
  }
  for (auto& c : clients) std::sort(c.begin(), c.end());
  return clients;
}

LearnerDataset make_learner_dataset(SyntheticTask task, int n_clients, double beta, Rng& rng) {
  LearnerDataset ds;
  ds.client_indices = dirichlet_partition(task.train.labels, task.train.n_classes, n_clients, beta, rng);
  ds.train = std::move(task.train);
  ds.test = std::move(task.test);
  return ds;
}

void SoftmaxRegression::logits(std::span<const double> params, std::span<const double> x,
                               std::span<double> out) const {
  const std::size_t stride = n_features_ + 1;
  for (std::size_t c = 0; c < n_classes_; ++c) {
    const double* w = params.data() + c * stride;
    double z = w[n_features_];
    for (std::size_t f = 0; f < n_features_; ++f) z += w[f] * x[f];
    out[c] = z;
  }
}

namespace {

// In-place softmax; returns log-sum-exp.
double softmax(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return mx + std::log(sum);
}

}  // namespace

double SoftmaxRegression::loss(std::span<const double> params, const Dataset& data,
                               std::span<const std::size_t> indices) const {
  if (indices.empty()) return 0.0;
  std::vector<double> z(n_classes_);
  double total = 0.0;
  for (auto i : indices) {
    logits(params, data.row(i), z);
    const double target = z[data.labels[i]];
    total += softmax(z) - target;
  }
  return total / static_cast<double>(indices.size());
}

double SoftmaxRegression::accuracy(std::span<const double> params, const Dataset& data) const {
  if (data.size() == 0) return 0.0;
  std::vector<double> z(n_classes_);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    logits(params, data.row(i), z);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    hits += best == data.labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

void SoftmaxRegression::gradient(std::span<const double> params, const Dataset& data,
                                 std::span<const std::size_t> batch, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (batch.empty()) return;
  const std::size_t stride = n_features_ + 1;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> z(n_classes_);
  for (auto i : batch) {
    const auto x = data.row(i);
    logits(params, x, z);
    softmax(z);
    z[data.labels[i]] -= 1.0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      double* g = grad.data() + c * stride;
      const double err = z[c] * scale;
      for (std::size_t f = 0; f < n_features_; ++f) g[f] += err * x[f];
      g[n_features_] += err;
    }
  }
}

std::optional<std::vector<double>> local_train(const SoftmaxRegression& learner,
                                               const GlobalModel& start, const Dataset& data,
                                               std::span<const std::size_t> indices,
                                               const LocalTrainConfig& config, Rng& rng,
                                               std::vector<double>* loss_trace) {
  if (indices.empty()) return std::nullopt;
  std::vector<double> params = start.parameters;
  std::vector<double> grad(params.size());
  std::vector<std::size_t> order(indices.begin(), indices.end());
  const std::size_t batch = config.batch_size == 0 ? order.size() : std::min(config.batch_size, order.size());

  if (loss_trace) loss_trace->push_back(learner.loss(params, data, indices));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < order.size()) rng.shuffle(order);
    for (std::size_t pos = 0; pos < order.size(); pos += batch) {
      const std::size_t len = std::min(batch, order.size() - pos);
      learner.gradient(params, data, std::span(order).subspan(pos, len), grad);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * grad[p];
    }
    if (loss_trace) loss_trace->push_back(learner.loss(params, data, indices));
  }
  return params;
}

std::vector<double> normalized_weights(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) throw PreconditionError("aggregation weights must have a positive sum");
  std::vector<double> out(weights.begin(), weights.end());
  for (auto& w : out) w /= total;
  return out;
}

std::optional<GlobalModel> aggregate(std::span<const ModelUpdate> updates) {
  if (updates.empty()) return std::nullopt;
  const std::size_t dim = updates.front().parameters.size();
  std::vector<double> raw;
  for (const auto& u : updates) {
    if (u.parameters.size() != dim) throw PreconditionError("updates differ in dimension");
    raw.push_back(u.weight);
  }
  const auto w = normalized_weights(raw);
  GlobalModel out{std::vector<double>(dim, 0.0)};
  for (std::size_t u = 0; u < updates.size(); ++u) {
    for (std::size_t p = 0; p < dim; ++p) out.parameters[p] += w[u] * updates[u].parameters[p];
  }
  return out;
}

std::optional<GlobalModel> aggregate_hierarchical(std::span<const std::vector<ModelUpdate>> groups) {
  std::vector<ModelUpdate> edge;
  for (const auto& g : groups) {
    auto model = aggregate(g);
    if (!model) continue;
    double weight = 0.0;
    for (const auto& u : g) weight += u.weight;
    edge.push_back({std::move(model->parameters), weight});
  }
  return aggregate(edge);
}

std::vector<double> distribute_payoffs(double price, std::span<const double> data) {
  if (data.empty()) throw PreconditionError("cannot distribute payoffs over an empty coalition");
  const auto w = normalized_weights(data);
  std::vector<double> payoffs(w.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    payoffs[i] = w[i] * price;
    sum += payoffs[i];
  }
  const auto largest = std::max_element(w.begin(), w.end()) - w.begin();
  payoffs[largest] += price - sum;
  return payoffs;
}

}  // namespace dualgfl
