#pragma once

#include "ecgraph/correction.hpp"
#include "ecgraph/filters.hpp"
#include "ecgraph/graph.hpp"
#include "ecgraph/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace ecgraph {

struct Splits {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Node features, class labels in [0, num_classes) and disjoint splits.
struct LabeledDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int num_classes = 0;
  Splits splits;
};

void validate(const LabeledDataset& data);

/// Seeded random permutation cut into train / val / test by fraction
/// (60/20/20 by default, the full-supervised protocol).
Splits random_splits(Index n, std::uint64_t seed, double train_fraction = 0.6,
                     double val_fraction = 0.2);

struct SplitFiles {
  std::filesystem::path train;
  std::filesystem::path val;
  std::filesystem::path test;
};

/// Features CSV (n rows, d comma-separated columns), labels CSV (one integer
/// per row) and optional index-list split files; without split files a
/// seeded 60/20/20 split is drawn.
LabeledDataset load_labeled_dataset(const std::filesystem::path& features_csv,
                                    const std::filesystem::path& labels_csv,
                                    const std::optional<SplitFiles>& split_files,
                                    std::uint64_t split_seed);

struct ClassifierConfig {
  Basis basis = GprMonomial{};
  int order = 10;
  double learning_rate = 0.2;
  double weight_decay = 5e-4;
  int max_epochs = 1000;
  int patience = 200;
  std::uint64_t seed = 0;
  // Project Bernstein coefficients onto >= 0 after every step.
  bool nonneg_bernstein = true;
};

void validate(const ClassifierConfig& config);

/// Trainable parameters: filter coefficients ((K+1) x 1 shared, or
/// (K+1) x C per output channel for Jacobi) and the feature map W (d x C).
struct ClassifierParams {
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd weights;
};

/// Softmax cross-entropy of Z = U diag(h(mu)) U^T X W over the training
/// nodes plus (weight_decay / 2) ||W||^2.
class ClassifierObjective {
 public:
  ClassifierObjective(const LabeledDataset& data, const EigenSystem& eig,
                      const CorrectedSpectrum& spec, const Basis& basis, int order,
                      double weight_decay);

  Eigen::MatrixXd logits(const ClassifierParams& params) const;
  double loss(const ClassifierParams& params) const;
  ClassifierParams gradient(const ClassifierParams& params) const;
  double accuracy(const ClassifierParams& params, const std::vector<Index>& nodes) const;

  // Shape of the alpha table for this basis.
  Index filter_channels() const noexcept { return filter_channels_; }

 private:
  const LabeledDataset* data_;
  const EigenSystem* eig_;
  Eigen::MatrixXd design_;            // n x (K+1)
  Eigen::MatrixXd feature_spectrum_;  // U^T X
  Index filter_channels_;
  double weight_decay_;
};

struct ClassifierReport {
  double beta = 1.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  double final_loss = 0.0;
  double wall_seconds = 0.0;
  ClassifierParams params;
};

/// Joint full-batch gradient descent on (alpha, W) with early stopping on
/// validation accuracy; reports accuracies of the best-validation parameters.
ClassifierReport train_classifier(const LabeledDataset& data, const EigenSystem& eig,
                                  const CorrectedSpectrum& spec, const ClassifierConfig& config);

struct SbmDatasetConfig {
  Index nodes = 200;
  int classes = 2;
  double p_in = 0.2;
  double p_out = 0.01;
  int feature_dim = 8;
  double signal = 1.0;  // added to feature column `label` of each node
  double noise = 1.0;   // stddev of Gaussian feature noise
  bool random_labels = false;
  std::uint64_t seed = 0;
};

struct SyntheticGraphDataset {
  Graph graph;
  LabeledDataset data;
  std::size_t repaired_nodes = 0;
};

/// Stochastic block model with community-indicator features corrupted by
/// Gaussian noise. With random_labels the labels are redrawn uniformly,
/// independent of graph and features.
SyntheticGraphDataset make_sbm_dataset(const SbmDatasetConfig& config);

}  // namespace ecgraph
