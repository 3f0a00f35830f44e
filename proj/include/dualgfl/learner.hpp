#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dualgfl/rng.hpp"

namespace dualgfl {

// Row-major feature matrix with integer labels.
struct Dataset {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
};

struct SyntheticTaskConfig {
  std::size_t n_classes = 10;
  std::size_t n_features = 32;
  std::size_t train_samples = 10000;
  std::size_t test_samples = 2000;
  double class_separation = 0.6;  // stddev of class means around the origin
};

// Gaussian-mixture classification task: one isotropic unit-variance blob per
// class, class means drawn N(0, separation^2).
struct SyntheticTask {
  Dataset train;
  Dataset test;
};

SyntheticTask make_gaussian_mixture(const SyntheticTaskConfig& config, Rng& rng);

// Per-client sample indices into the training set.
struct LearnerDataset {
  Dataset train;
  Dataset test;
  std::vector<std::vector<std::size_t>> client_indices;

  std::vector<std::size_t> client_sizes() const;
};

// Splits each class across clients with proportions drawn from Dir(beta).
// Every sample goes to exactly one client and every client receives at least
// one sample.
std::vector<std::vector<std::size_t>> dirichlet_partition(std::span<const int> labels,
                                                          std::size_t n_classes, int n_clients,
                                                          double beta, Rng& rng);

LearnerDataset make_learner_dataset(SyntheticTask task, int n_clients, double beta, Rng& rng);

struct GlobalModel {
  std::vector<double> parameters;
};

// Multinomial logistic regression; parameters are n_classes rows of
// (n_features weights, bias).
class SoftmaxRegression {
 public:
  SoftmaxRegression(std::size_t n_features, std::size_t n_classes)
      : n_features_(n_features), n_classes_(n_classes) {}

  std::size_t parameter_count() const { return n_classes_ * (n_features_ + 1); }
  GlobalModel initial_model() const { return {std::vector<double>(parameter_count(), 0.0)}; }

  // Mean cross-entropy over the given samples.
  double loss(std::span<const double> params, const Dataset& data,
              std::span<const std::size_t> indices) const;
  double accuracy(std::span<const double> params, const Dataset& data) const;

  // Overwrites `grad` with the mean gradient over `batch`.
  void gradient(std::span<const double> params, const Dataset& data,
                std::span<const std::size_t> batch, std::span<double> grad) const;

 private:
  void logits(std::span<const double> params, std::span<const double> x, std::span<double> out) const;

  std::size_t n_features_;
  std::size_t n_classes_;
};

struct LocalTrainConfig {
  int epochs = 3;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;  // 0 or >= data size means full batch
};

// Mini-batch gradient descent from `start`. Returns nullopt (skip the client)
// when the client holds no data. If loss_trace is given it receives the
// training loss before the first epoch and after each epoch.
std::optional<std::vector<double>> local_train(const SoftmaxRegression& learner,
                                               const GlobalModel& start, const Dataset& data,
                                               std::span<const std::size_t> indices,
                                               const LocalTrainConfig& config, Rng& rng,
                                               std::vector<double>* loss_trace = nullptr);

struct ModelUpdate {
  std::vector<double> parameters;
  double weight = 0.0;  // client data volume
};

// Weights rescaled to sum to one.
std::vector<double> normalized_weights(std::span<const double> weights);

// Weighted mean of the updates with weights renormalised over the
// participants. nullopt when there are no participants.
std::optional<GlobalModel> aggregate(std::span<const ModelUpdate> updates);

// Edge aggregation per group followed by central aggregation of the edge
// models, each edge weighted by its members' total weight.
std::optional<GlobalModel> aggregate_hierarchical(std::span<const std::vector<ModelUpdate>> groups);

// Splits a contract price across coalition members in proportion to data.
// The largest share absorbs rounding so the payoffs sum back to the price.
std::vector<double> distribute_payoffs(double price, std::span<const double> data);

}  // namespace dualgfl
