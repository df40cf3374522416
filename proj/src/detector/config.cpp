#include "tokattr/detector/config.hpp"

#include <cmath>

#include "tokattr/error.hpp"

namespace tokattr::detector {

void DetectorConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid detector config: ") + what);
  };
  require(n_trees >= 1, "n_trees must be >= 1");
  require(max_depth >= 1, "max_depth must be >= 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(min_child_weight >= 0.0 && std::isfinite(min_child_weight), "min_child_weight must be >= 0");
  require(subsample > 0.0 && subsample <= 1.0, "subsample must lie in (0, 1]");
  require(colsample > 0.0 && colsample <= 1.0, "colsample must lie in (0, 1]");
  require(reg_lambda >= 0.0 && std::isfinite(reg_lambda), "reg_lambda must be >= 0");
  require(!positive_class_weight || (*positive_class_weight > 0.0 && std::isfinite(*positive_class_weight)),
          "positive_class_weight must be positive or auto");
  require(early_stopping_patience >= 1, "early_stopping_patience must be >= 1");
}

std::size_t SearchGrid::size() const {
  std::size_t n = 1;
  auto mul = [&](std::size_t axis) { n *= axis == 0 ? 1 : axis; };
  mul(n_trees.size());
  mul(max_depth.size());
  mul(learning_rate.size());
  mul(min_child_weight.size());
  mul(subsample.size());
  mul(colsample.size());
  return n;
}

DetectorConfig SearchGrid::at(std::size_t index, const DetectorConfig& base) const {
  if (index >= size()) throw IndexError("grid index " + std::to_string(index) + " out of range");
  DetectorConfig c = base;
  auto take = [&index](const auto& axis, auto& field) {
    if (axis.empty()) return;
    field = axis[index % axis.size()];
    index /= axis.size();
  };
  take(colsample, c.colsample);
  take(subsample, c.subsample);
  take(min_child_weight, c.min_child_weight);
  take(learning_rate, c.learning_rate);
  take(max_depth, c.max_depth);
  take(n_trees, c.n_trees);
  return c;
}

SearchGrid SearchGrid::default_grid() {
  SearchGrid g;
  g.n_trees = {50, 100, 200, 400};
  g.max_depth = {3, 4, 5, 6, 7, 8};
  g.learning_rate = {0.01, 0.05, 0.1, 0.2, 0.3};
  g.subsample = {0.6, 0.8, 1.0};
  g.colsample = {0.6, 0.8, 1.0};
  return g;
}

std::size_t Dataset::positives() const {
  std::size_t n = 0;
  for (int label : y) n += label == 1 ? 1 : 0;
  return n;
}

void Dataset::add(std::span<const double> features, int label, std::string id) {
  if (n_features == 0 && y.empty()) n_features = features.size();
  if (features.size() != n_features) {
    throw DataError("row has " + std::to_string(features.size()) + " features, dataset has " +
                    std::to_string(n_features));
  }
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
  ids.push_back(std::move(id));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.n_features = n_features;
  out.feature_names = feature_names;
  out.x.reserve(indices.size() * n_features);
  for (std::size_t i : indices) {
    if (i >= size()) throw IndexError("sample index " + std::to_string(i) + " out of range");
    const auto r = row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
    out.y.push_back(y[i]);
    out.ids.push_back(i < ids.size() ? ids[i] : std::string());
  }
  return out;
}

void Dataset::validate() const {
  if (x.size() != y.size() * n_features) throw DataError("feature matrix does not match label count");
  if (!feature_names.empty() && feature_names.size() != n_features) {
    throw DataError("feature name count does not match feature dimension");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw DataError("sample " + std::to_string(i) + " has a label other than 0/1");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) {
      throw DataError("non-finite feature " + std::to_string(k % n_features) + " in sample " +
                      std::to_string(k / n_features));
    }
  }
}

}  // namespace tokattr::detector
