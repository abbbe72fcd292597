#include "ecgraph/classifier.hpp"

#include "ecgraph/errors.hpp"
#include "ecgraph/random.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace ecgraph {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

template <class T>
T parse_number(std::string_view token, std::size_t line_no) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.remove_suffix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line_no, "cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

std::vector<Index> read_index_list(const std::filesystem::path& path) {
  std::vector<Index> indices;
  const auto lines = read_lines(path);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    std::istringstream tokens(lines[l]);
    std::string token;
    while (tokens >> token) indices.push_back(parse_number<Index>(token, l + 1));
  }
  return indices;
}

// Row-wise softmax minus one-hot, restricted to `nodes`, scaled by 1/|nodes|.
double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     const std::vector<Index>& nodes, Eigen::MatrixXd* grad) {
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(nodes.size());
  if (grad) grad->setZero(logits.rows(), logits.cols());
  for (const Index i : nodes) {
    const double peak = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - peak;
    const Eigen::RowVectorXd expd = shifted.array().exp();
    const double sum = expd.sum();
    const int label = labels[static_cast<std::size_t>(i)];
    total += std::log(sum) - shifted(label);
    if (grad) {
      grad->row(i) = expd / sum * inv;
      (*grad)(i, label) -= inv;
    }
  }
  return total * inv;
}

}  // namespace

void validate(const LabeledDataset& data) {
  const Index n = data.features.rows();
  if (n == 0 || data.features.cols() == 0) throw ValidationError("empty feature matrix");
  if (!data.features.allFinite()) throw ValidationError("features contain non-finite values");
  if (static_cast<Index>(data.labels.size()) != n) {
    throw ValidationError("label count does not match feature rows");
  }
  if (data.num_classes < 2) throw ValidationError("need at least two classes");
  for (const int label : data.labels) {
    if (label < 0 || label >= data.num_classes) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, num_classes)");
    }
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* split : {&data.splits.train, &data.splits.val, &data.splits.test}) {
    for (const Index i : *split) {
      if (i < 0 || i >= n) throw ValidationError("split index " + std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)]) {
        throw ValidationError("node " + std::to_string(i) + " appears in more than one split");
      }
      seen[static_cast<std::size_t>(i)] = 1;
    }
  }
  if (data.splits.train.empty() || data.splits.val.empty() || data.splits.test.empty()) {
    throw ValidationError("train, validation and test splits must be non-empty");
  }
}

Splits random_splits(Index n, std::uint64_t seed, double train_fraction, double val_fraction) {
  if (n < 3) throw ValidationError("need at least 3 nodes to split");
  if (!(train_fraction > 0.0 && val_fraction > 0.0 && train_fraction + val_fraction < 1.0)) {
    throw ValidationError("split fractions must be positive and sum below 1");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const auto n_train = std::max<Index>(1, static_cast<Index>(std::floor(train_fraction * n)));
  const auto n_val = std::max<Index>(1, static_cast<Index>(std::floor(val_fraction * n)));
  Splits splits;
  splits.train.assign(order.begin(), order.begin() + n_train);
  splits.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  splits.test.assign(order.begin() + n_train + n_val, order.end());
  for (auto* split : {&splits.train, &splits.val, &splits.test}) std::sort(split->begin(), split->end());
  return splits;
}

LabeledDataset load_labeled_dataset(const std::filesystem::path& features_csv,
                                    const std::filesystem::path& labels_csv,
                                    const std::optional<SplitFiles>& split_files,
                                    std::uint64_t split_seed) {
  std::vector<std::vector<double>> rows;
  const auto feature_lines = read_lines(features_csv);
  for (std::size_t l = 0; l < feature_lines.size(); ++l) {
    if (blank(feature_lines[l])) continue;
    std::vector<double> row;
    std::string_view rest = feature_lines[l];
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_number<double>(rest.substr(0, comma), l + 1));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(l + 1, "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("features file is empty");

  LabeledDataset data;
  data.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      data.features(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  const auto label_lines = read_lines(labels_csv);
  for (std::size_t l = 0; l < label_lines.size(); ++l) {
    if (blank(label_lines[l])) continue;
    data.labels.push_back(parse_number<int>(label_lines[l], l + 1));
  }
  if (data.labels.empty()) throw ValidationError("labels file is empty");
  data.num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;

  if (split_files) {
    data.splits.train = read_index_list(split_files->train);
    data.splits.val = read_index_list(split_files->val);
    data.splits.test = read_index_list(split_files->test);
  } else {
    data.splits = random_splits(data.features.rows(), split_seed);
  }
  validate(data);
  return data;
}

void validate(const ClassifierConfig& config) {
  validate_basis(config.basis);
  if (config.order < 0) throw ValidationError("order must be non-negative");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(config.weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
  if (config.max_epochs < 1) throw ValidationError("max_epochs must be positive");
  if (config.patience < 1) throw ValidationError("patience must be positive");
}

ClassifierObjective::ClassifierObjective(const LabeledDataset& data, const EigenSystem& eig,
                                         const CorrectedSpectrum& spec, const Basis& basis,
                                         int order, double weight_decay)
    : data_(&data), eig_(&eig), weight_decay_(weight_decay) {
  validate(data);
  if (data.features.rows() != eig.size()) {
    throw ValidationError("dataset and eigensystem sizes differ");
  }
  if (!spec.derived_from(eig)) {
    throw ValidationError("corrected spectrum was not derived from this eigensystem");
  }
  design_ = basis_matrix(basis, as_span(spec.mu), order);
  feature_spectrum_ = eig.eigenvectors().transpose() * data.features;
  filter_channels_ = std::holds_alternative<Jacobi>(basis) ? data.num_classes : 1;
}

Eigen::MatrixXd ClassifierObjective::logits(const ClassifierParams& params) const {
  const Eigen::MatrixXd response = design_ * params.alpha;
  Eigen::MatrixXd spectral = feature_spectrum_ * params.weights;
  if (response.cols() == 1) {
    spectral = response.col(0).asDiagonal() * spectral;
  } else {
    spectral.array() *= response.array();
  }
  return eig_->eigenvectors() * spectral;
}

double ClassifierObjective::loss(const ClassifierParams& params) const {
  return cross_entropy(logits(params), data_->labels, data_->splits.train, nullptr) +
         0.5 * weight_decay_ * params.weights.squaredNorm();
}

ClassifierParams ClassifierObjective::gradient(const ClassifierParams& params) const {
  const Eigen::MatrixXd response = design_ * params.alpha;
  const Eigen::MatrixXd projected = feature_spectrum_ * params.weights;
  Eigen::MatrixXd spectral = projected;
  if (response.cols() == 1) {
    spectral = response.col(0).asDiagonal() * spectral;
  } else {
    spectral.array() *= response.array();
  }
  const Eigen::MatrixXd z = eig_->eigenvectors() * spectral;
  Eigen::MatrixXd grad_z;
  cross_entropy(z, data_->labels, data_->splits.train, &grad_z);

  const Eigen::MatrixXd grad_spectral = eig_->eigenvectors().transpose() * grad_z;
  Eigen::MatrixXd grad_response = grad_spectral.cwiseProduct(projected);
  Eigen::MatrixXd grad_projected;
  if (response.cols() == 1) {
    grad_response = grad_response.rowwise().sum().eval();
    grad_projected = response.col(0).asDiagonal() * grad_spectral;
  } else {
    grad_projected = grad_spectral.cwiseProduct(response);
  }
  return {design_.transpose() * grad_response,
          feature_spectrum_.transpose() * grad_projected + weight_decay_ * params.weights};
}

double ClassifierObjective::accuracy(const ClassifierParams& params,
                                     const std::vector<Index>& nodes) const {
  if (nodes.empty()) return 0.0;
  const Eigen::MatrixXd z = logits(params);
  std::size_t correct = 0;
  for (const Index i : nodes) {
    Index predicted = 0;
    z.row(i).maxCoeff(&predicted);
    if (predicted == data_->labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

ClassifierReport train_classifier(const LabeledDataset& data, const EigenSystem& eig,
                                  const CorrectedSpectrum& spec, const ClassifierConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const ClassifierObjective objective(data, eig, spec, config.basis, config.order,
                                      config.weight_decay);
  const bool project = config.nonneg_bernstein && std::holds_alternative<Bernstein>(config.basis);

  const Index d = data.features.cols();
  const Index classes = data.num_classes;
  ClassifierParams params;
  params.alpha = Eigen::MatrixXd::Zero(config.order + 1, objective.filter_channels());
  if (std::holds_alternative<Bernstein>(config.basis)) {
    params.alpha.setOnes();
  } else {
    params.alpha.row(0).setOnes();
  }
  Rng rng(config.seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(d + classes));
  params.weights.resize(d, classes);
  for (Index c = 0; c < classes; ++c) {
    for (Index r = 0; r < d; ++r) params.weights(r, c) = rng.uniform(-limit, limit);
  }

  const double initial_loss = objective.loss(params);
  ClassifierReport report;
  report.beta = spec.beta;
  ClassifierParams best = params;
  double best_val = -1.0;
  int epoch = 0;
  for (; epoch < config.max_epochs; ++epoch) {
    const double val = objective.accuracy(params, data.splits.val);
    if (val > best_val) {
      best_val = val;
      best = params;
      report.best_epoch = epoch;
    } else if (epoch - report.best_epoch >= config.patience) {
      break;
    }
    const ClassifierParams grad = objective.gradient(params);
    params.alpha -= config.learning_rate * grad.alpha;
    params.weights -= config.learning_rate * grad.weights;
    if (project) params.alpha = params.alpha.cwiseMax(0.0);
    const double current = objective.loss(params);
    if (!std::isfinite(current) || current > 1e6 * std::max(initial_loss, 1e-12)) {
      throw DivergedError("classifier training diverged at epoch " + std::to_string(epoch + 1) +
                          "; lower the learning rate");
    }
  }

  report.epochs_run = epoch;
  report.params = std::move(best);
  report.train_accuracy = objective.accuracy(report.params, data.splits.train);
  report.val_accuracy = objective.accuracy(report.params, data.splits.val);
  report.test_accuracy = objective.accuracy(report.params, data.splits.test);
  report.final_loss = objective.loss(report.params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SyntheticGraphDataset make_sbm_dataset(const SbmDatasetConfig& config) {
  if (config.classes < 2) throw ValidationError("need at least two classes");
  if (config.nodes < 3 * config.classes) throw ValidationError("too few nodes for the classes");
  if (config.feature_dim < config.classes) {
    throw ValidationError("feature_dim must be at least the number of classes");
  }
  if (!(config.noise >= 0.0)) throw ValidationError("noise must be non-negative");

  std::vector<Index> sizes(static_cast<std::size_t>(config.classes), config.nodes / config.classes);
  sizes.back() += config.nodes % config.classes;
  RandomGraph sampled = stochastic_block_model(sizes, config.p_in, config.p_out, config.seed);

  LabeledDataset data;
  data.num_classes = config.classes;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    data.labels.insert(data.labels.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
  }
  // Independent streams so toggling random_labels leaves graph and features intact.
  Rng feature_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  data.features.resize(config.nodes, config.feature_dim);
  for (Index i = 0; i < config.nodes; ++i) {
    for (Index c = 0; c < config.feature_dim; ++c) {
      data.features(i, c) = config.noise * feature_rng.normal();
    }
    data.features(i, data.labels[static_cast<std::size_t>(i)]) += config.signal;
  }
  if (config.random_labels) {
    Rng label_rng(config.seed ^ 0xbf58476d1ce4e5b9ULL);
    for (int& label : data.labels) {
      label = static_cast<int>(label_rng.uniform_index(static_cast<std::uint64_t>(config.classes)));
    }
  }
  data.splits = random_splits(config.nodes, config.seed ^ 0x94d049bb133111ebULL);
  validate(data);
  return {std::move(sampled.graph), std::move(data), sampled.repaired_nodes};
}

}  // namespace ecgraph
