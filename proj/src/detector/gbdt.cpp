#include "tokattr/detector/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tokattr/detector/folds.hpp"
#include "tokattr/error.hpp"

namespace tokattr::detector {

namespace {

double sigmoid(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// log(1 + exp(m)) - y m
double logistic_loss(double margin, int y) {
  const double softplus = margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - (y == 1 ? margin : 0.0);
}

using IndexList = std::vector<std::uint32_t>;

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> grad, std::span<const double> hess,
              const DetectorConfig& config)
      : data_(data), grad_(grad), hess_(hess), config_(config), go_left_(data.size(), 0) {}

  // `lists[j]` holds the in-bag rows sorted by feature `features[j]`.
  RegressionTree build(std::vector<IndexList> lists, const std::vector<std::size_t>& features) {
    features_ = &features;
    tree_ = RegressionTree{};
    grow(std::move(lists), 0);
    return std::move(tree_);
  }

 private:
  double value(std::uint32_t row, std::size_t feature) const { return data_.x[row * data_.n_features + feature]; }

  int grow(std::vector<IndexList> lists, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double g_total = 0.0, h_total = 0.0;
    for (std::uint32_t r : lists.front()) {
      g_total += grad_[r];
      h_total += hess_[r];
    }
    const double lambda = config_.reg_lambda;
    auto leaf = [&] {
      tree_.nodes[id].value = -config_.learning_rate * g_total / (h_total + lambda);
      return id;
    };
    if (depth >= config_.max_depth || h_total < 2.0 * config_.min_child_weight) return leaf();

    const double parent_score = g_total * g_total / (h_total + lambda);
    double best_gain = 0.0;
    std::size_t best_slot = 0, best_pos = 0;
    double best_threshold = 0.0;
    bool found = false;
    for (std::size_t j = 0; j < lists.size(); ++j) {
      const std::size_t f = (*features_)[j];
      const IndexList& order = lists[j];
      double gl = 0.0, hl = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        gl += grad_[order[k]];
        hl += hess_[order[k]];
        const double xa = value(order[k], f);
        const double xb = value(order[k + 1], f);
        if (!(xa < xb)) continue;
        const double hr = h_total - hl;
        if (hl < config_.min_child_weight || hr < config_.min_child_weight) continue;
        const double gr = g_total - gl;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_slot = j;
          best_pos = k;
          double mid = xa + (xb - xa) / 2.0;
          if (!(xa < mid)) mid = xb;
          best_threshold = mid;
          found = true;
        }
      }
    }
    if (!found) return leaf();

    const IndexList& split_order = lists[best_slot];
    for (std::size_t k = 0; k < split_order.size(); ++k) go_left_[split_order[k]] = k <= best_pos ? 1 : 0;
    std::vector<IndexList> left(lists.size()), right(lists.size());
    for (std::size_t j = 0; j < lists.size(); ++j) {
      left[j].reserve(best_pos + 1);
      right[j].reserve(split_order.size() - best_pos - 1);
      for (std::uint32_t r : lists[j]) (go_left_[r] ? left[j] : right[j]).push_back(r);
    }
    lists.clear();
    lists.shrink_to_fit();

    tree_.nodes[id].feature = static_cast<int>((*features_)[best_slot]);
    tree_.nodes[id].threshold = best_threshold;
    tree_.nodes[id].gain = best_gain;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const Dataset& data_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const DetectorConfig& config_;
  std::vector<char> go_left_;
  const std::vector<std::size_t>* features_ = nullptr;
  RegressionTree tree_;
};

void check_trainable(const Dataset& data) {
  data.validate();
  if (data.size() < 2) throw DataError("training needs at least 2 samples");
  if (data.n_features == 0) throw DataError("training needs at least one feature");
  if (data.positives() == 0 || data.negatives() == 0) {
    throw DataError("training set contains a single class");
  }
}

}  // namespace

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double DetectorModel::margin(std::span<const double> row) const {
  double m = base_score;
  for (const auto& tree : trees) m += tree.predict(row);
  return m;
}

double auto_class_weight(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0) throw DataError("cannot derive a class weight without positive samples");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

DetectorModel fit(const Dataset& train, const Dataset* validation, const DetectorConfig& config, TrainTrace* trace) {
  config.validate();
  check_trainable(train);
  if (validation) {
    validation->validate();
    if (validation->n_features != train.n_features) throw DataError("validation set has a different dimension");
  }

  const std::size_t n = train.size();
  const std::size_t p = train.n_features;
  const double pos_weight = config.positive_class_weight ? *config.positive_class_weight : auto_class_weight(train.y);
  std::vector<double> weight(n);
  double w_pos = 0.0, w_neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = train.y[i] == 1 ? pos_weight : 1.0;
    (train.y[i] == 1 ? w_pos : w_neg) += weight[i];
  }
  const double w_total = w_pos + w_neg;

  DetectorModel model;
  model.n_features = p;
  model.feature_names = train.feature_names;
  model.base_score = std::log(w_pos / w_neg);
  model.provenance.config = config;
  model.provenance.seed = config.seed;
  model.provenance.class_weight = pos_weight;
  model.provenance.n_train = n;
  model.provenance.n_validation = validation ? validation->size() : 0;

  std::vector<IndexList> presorted(p, IndexList(n));
  for (std::size_t f = 0; f < p; ++f) {
    std::iota(presorted[f].begin(), presorted[f].end(), 0u);
    std::stable_sort(presorted[f].begin(), presorted[f].end(), [&](std::uint32_t a, std::uint32_t b) {
      return train.x[a * p + f] < train.x[b * p + f];
    });
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> val_margin(validation ? validation->size() : 0, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::mt19937_64 rng(config.seed);
  TreeBuilder builder(train, grad, hess, config);

  TrainTrace local;
  local.class_weight = pos_weight;
  double best_val = std::numeric_limits<double>::infinity();
  int best_round = -1;

  const auto n_rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.subsample * n)));
  const auto n_cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.colsample * p)));
  std::vector<std::size_t> row_pool(n), col_pool(p);
  std::iota(row_pool.begin(), row_pool.end(), 0);
  std::iota(col_pool.begin(), col_pool.end(), 0);
  std::vector<char> in_bag(n, 1);

  for (int round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = sigmoid(margin[i]);
      grad[i] = weight[i] * (prob - train.y[i]);
      hess[i] = weight[i] * prob * (1.0 - prob);
    }
    if (n_rows < n) {
      std::shuffle(row_pool.begin(), row_pool.end(), rng);
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (std::size_t k = 0; k < n_rows; ++k) in_bag[row_pool[k]] = 1;
    }
    std::vector<std::size_t> features;
    if (n_cols < p) {
      std::shuffle(col_pool.begin(), col_pool.end(), rng);
      features.assign(col_pool.begin(), col_pool.begin() + static_cast<std::ptrdiff_t>(n_cols));
      std::sort(features.begin(), features.end());
    } else {
      features.resize(p);
      std::iota(features.begin(), features.end(), 0);
    }
    std::vector<IndexList> lists(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
      lists[j].reserve(n_rows);
      for (std::uint32_t r : presorted[features[j]]) {
        if (in_bag[r]) lists[j].push_back(r);
      }
    }
    model.trees.push_back(builder.build(std::move(lists), features));
    const RegressionTree& tree = model.trees.back();

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += tree.predict(train.row(i));
      loss += weight[i] * logistic_loss(margin[i], train.y[i]);
    }
    local.train_loss.push_back(loss / w_total);

    if (validation) {
      double vloss = 0.0;
      for (std::size_t i = 0; i < validation->size(); ++i) {
        val_margin[i] += tree.predict(validation->row(i));
        vloss += logistic_loss(val_margin[i], validation->y[i]);
      }
      vloss /= static_cast<double>(std::max<std::size_t>(1, validation->size()));
      local.validation_loss.push_back(vloss);
      if (vloss < best_val) {
        best_val = vloss;
        best_round = round;
      } else if (round - best_round >= config.early_stopping_patience) {
        break;
      }
    }
  }
  if (validation && validation->size() > 0) {
    model.trees.resize(static_cast<std::size_t>(best_round + 1));
    local.best_iteration = best_round;
  } else {
    local.best_iteration = static_cast<int>(model.trees.size()) - 1;
  }
  model.provenance.best_iteration = local.best_iteration;

  model.importance.assign(p, 0.0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) model.importance[static_cast<std::size_t>(node.feature)] += node.gain;
    }
  }
  if (trace) *trace = std::move(local);
  return model;
}

DetectorModel train(const Dataset& data, const DetectorConfig& config, double validation_fraction,
                    TrainTrace* trace) {
  if (validation_fraction <= 0.0) return fit(data, nullptr, config, trace);
  if (validation_fraction >= 1.0) throw ConfigError("validation fraction must be below 1");
  check_trainable(data);
  const auto [fit_idx, val_idx] = stratified_split(data.y, validation_fraction, config.seed);
  if (val_idx.empty()) return fit(data, nullptr, config, trace);
  const Dataset fit_set = data.subset(fit_idx);
  const Dataset val_set = data.subset(val_idx);
  return fit(fit_set, &val_set, config, trace);
}

double predict(const DetectorModel& model, std::span<const double> features) {
  if (features.size() != model.n_features) {
    throw DataError("feature vector has dimension " + std::to_string(features.size()) + ", model expects " +
                    std::to_string(model.n_features));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) throw DataError("feature " + std::to_string(i) + " is not finite");
  }
  return sigmoid(model.margin(features));
}

std::vector<double> predict_all(const DetectorModel& model, const Dataset& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(model, data.row(i));
  return out;
}

std::vector<std::pair<std::string, double>> feature_importance(const DetectorModel& model) {
  std::vector<std::size_t> used;
  std::vector<double> gain(model.n_features, 0.0);
  std::vector<char> split_on(model.n_features, 0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(node.feature);
      gain[f] += node.gain;
      split_on[f] = 1;
    }
  }
  for (std::size_t f = 0; f < model.n_features; ++f) {
    if (split_on[f]) used.push_back(f);
  }
  std::stable_sort(used.begin(), used.end(), [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });
  std::vector<std::pair<std::string, double>> table;
  for (std::size_t f : used) {
    const std::string name = f < model.feature_names.size() ? model.feature_names[f] : "f" + std::to_string(f);
    table.emplace_back(name, gain[f]);
  }
  return table;
}

}  // namespace tokattr::detector
