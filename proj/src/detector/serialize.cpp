#include "tokattr/detector/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tokattr/error.hpp"

namespace tokattr::detector {

namespace {

constexpr const char* kModelFormat = "tokattr-detector";
constexpr int kModelVersion = 1;

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

template <typename T>
void read_axis(const Json& j, const char* key, std::vector<T>& axis) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_array()) throw ConfigError(std::string("grid axis '") + key + "' must be an array");
  axis = j.at(key).get<std::vector<T>>();
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

Json config_to_json(const DetectorConfig& c) {
  Json j;
  j["n_trees"] = c.n_trees;
  j["max_depth"] = c.max_depth;
  j["learning_rate"] = c.learning_rate;
  j["min_child_weight"] = c.min_child_weight;
  j["subsample"] = c.subsample;
  j["colsample"] = c.colsample;
  j["reg_lambda"] = c.reg_lambda;
  if (c.positive_class_weight) {
    j["positive_class_weight"] = *c.positive_class_weight;
  } else {
    j["positive_class_weight"] = "auto";
  }
  j["early_stopping_patience"] = c.early_stopping_patience;
  j["seed"] = c.seed;
  return j;
}

DetectorConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("detector config must be a JSON object");
  DetectorConfig c;
  try {
    c.n_trees = j.value("n_trees", c.n_trees);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
    c.subsample = j.value("subsample", c.subsample);
    c.colsample = j.value("colsample", c.colsample);
    c.reg_lambda = j.value("reg_lambda", c.reg_lambda);
    c.early_stopping_patience = j.value("early_stopping_patience", c.early_stopping_patience);
    c.seed = j.value("seed", c.seed);
    if (j.contains("positive_class_weight")) {
      const auto& w = j.at("positive_class_weight");
      if (w.is_string()) {
        if (w.get<std::string>() != "auto") throw ConfigError("positive_class_weight must be a number or \"auto\"");
        c.positive_class_weight.reset();
      } else {
        c.positive_class_weight = w.get<double>();
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("detector config: ") + e.what());
  }
  c.validate();
  return c;
}

Json grid_to_json(const SearchGrid& g) {
  Json j = Json::object();
  if (!g.n_trees.empty()) j["n_trees"] = g.n_trees;
  if (!g.max_depth.empty()) j["max_depth"] = g.max_depth;
  if (!g.learning_rate.empty()) j["learning_rate"] = g.learning_rate;
  if (!g.min_child_weight.empty()) j["min_child_weight"] = g.min_child_weight;
  if (!g.subsample.empty()) j["subsample"] = g.subsample;
  if (!g.colsample.empty()) j["colsample"] = g.colsample;
  return j;
}

SearchGrid grid_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("search grid must be a JSON object");
  static const char* known[] = {"n_trees", "max_depth", "learning_rate", "min_child_weight", "subsample", "colsample"};
  for (const auto& [key, _] : j.items()) {
    if (std::ranges::find_if(known, [&](const char* k) { return key == k; }) == std::end(known)) {
      throw ConfigError("unknown grid axis '" + key + "'");
    }
  }
  SearchGrid g;
  try {
    read_axis(j, "n_trees", g.n_trees);
    read_axis(j, "max_depth", g.max_depth);
    read_axis(j, "learning_rate", g.learning_rate);
    read_axis(j, "min_child_weight", g.min_child_weight);
    read_axis(j, "subsample", g.subsample);
    read_axis(j, "colsample", g.colsample);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("search grid: ") + e.what());
  }
  // decode every point once so a bad value fails here rather than mid-search
  for (std::size_t i = 0; i < g.size(); ++i) g.at(i, DetectorConfig{}).validate();
  return g;
}

SearchGrid load_grid(const std::filesystem::path& path) { return grid_from_json(read_json_file(path)); }

Json model_to_json(const DetectorModel& m) {
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["n_features"] = m.n_features;
  j["feature_names"] = m.feature_names;
  j["base_score"] = m.base_score;
  j["threshold"] = m.threshold;
  j["importance"] = m.importance;
  Json prov;
  prov["protocol"] = m.provenance.protocol;
  prov["seed"] = m.provenance.seed;
  prov["config"] = config_to_json(m.provenance.config);
  prov["class_weight"] = m.provenance.class_weight;
  prov["n_train"] = m.provenance.n_train;
  prov["n_validation"] = m.provenance.n_validation;
  prov["best_iteration"] = m.provenance.best_iteration;
  j["provenance"] = prov;
  Json trees = Json::array();
  for (const auto& tree : m.trees) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back(
            {{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}, {"gain", n.gain}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

DetectorModel model_from_json(const Json& j) {
  DetectorModel m;
  try {
    if (j.value("format", std::string{}) != kModelFormat) throw ModelFormatError("not a detector model document");
    if (j.at("version").get<int>() != kModelVersion) {
      throw ModelFormatError("unsupported detector model version " + j.at("version").dump());
    }
    m.n_features = j.at("n_features").get<std::size_t>();
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    m.base_score = j.at("base_score").get<double>();
    m.threshold = j.value("threshold", 0.5);
    m.importance = j.value("importance", std::vector<double>(m.n_features, 0.0));
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      m.provenance.protocol = p.value("protocol", std::string{});
      m.provenance.seed = p.value("seed", std::uint64_t{0});
      if (p.contains("config")) m.provenance.config = config_from_json(p.at("config"));
      m.provenance.class_weight = p.value("class_weight", 1.0);
      m.provenance.n_train = p.value("n_train", std::size_t{0});
      m.provenance.n_validation = p.value("n_validation", std::size_t{0});
      m.provenance.best_iteration = p.value("best_iteration", -1);
    }
    for (const auto& jt : j.at("trees")) {
      RegressionTree tree;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          n.gain = jn.value("gain", 0.0);
        }
        tree.nodes.push_back(n);
      }
      m.trees.push_back(std::move(tree));
    }
  } catch (const Json::exception& e) {
    throw ModelFormatError(std::string("detector model: ") + e.what());
  }

  if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw ModelFormatError("threshold must lie in (0, 1)");
  if (!m.feature_names.empty() && m.feature_names.size() != m.n_features) {
    throw ModelFormatError("feature_names has " + std::to_string(m.feature_names.size()) + " entries, expected " +
                           std::to_string(m.n_features));
  }
  if (m.importance.size() != m.n_features) throw ModelFormatError("importance length does not match n_features");
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const auto& nodes = m.trees[t].nodes;
    if (nodes.empty()) throw ModelFormatError("tree " + std::to_string(t) + " has no nodes");
    const int count = static_cast<int>(nodes.size());
    for (int i = 0; i < count; ++i) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) continue;
      // children must come after their parent, which also rules out cycles
      if (static_cast<std::size_t>(n.feature) >= m.n_features || n.left <= i || n.right <= i || n.left >= count ||
          n.right >= count) {
        throw ModelFormatError("tree " + std::to_string(t) + " node " + std::to_string(i) + " is malformed");
      }
    }
  }
  return m;
}

void save_detector(const DetectorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

DetectorModel load_detector(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

Json report_to_json(const EvalReport& r) {
  Json j;
  j["protocol"] = r.protocol;
  j["seed"] = r.seed;
  j["auc"] = r.auc;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  j["threshold"] = r.threshold;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  j["n_evaluated"] = r.n_evaluated;
  j["n_outer_fits"] = r.n_outer_fits;
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    Json jf;
    jf["fold"] = f.fold;
    jf["n_train"] = f.train.size();
    jf["test"] = f.test;
    jf["skipped"] = f.skipped;
    if (!f.skipped) {
      jf["selected"] = config_to_json(f.selected);
      jf["search_f1"] = f.search_score;
      jf["class_weight"] = f.class_weight;
    }
    folds.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds);
  Json preds = Json::array();
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    preds.push_back({{"index", r.sample_index[i]}, {"label", r.labels[i]}, {"score", r.scores[i]}});
  }
  j["predictions"] = std::move(preds);
  j["warnings"] = r.warnings;
  return j;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "protocol   " << r.protocol << "\n";
  out << "seed       " << r.seed << "\n";
  out << "evaluated  " << r.n_evaluated << " samples, " << r.n_outer_fits << " outer fits\n";
  out << "threshold  " << fixed(r.threshold) << "\n\n";
  out << pad("metric", 10) << pad("value", 8, true) << "\n";
  out << pad("AUC", 10) << pad(fixed(r.auc), 8, true) << "\n";
  out << pad("Recall", 10) << pad(fixed(r.recall), 8, true) << "\n";
  out << pad("Precision", 10) << pad(fixed(r.precision), 8, true) << "\n";
  out << pad("F1", 10) << pad(fixed(r.f1), 8, true) << "\n\n";
  out << "confusion  tp=" << r.confusion.tp << " fp=" << r.confusion.fp << " tn=" << r.confusion.tn
      << " fn=" << r.confusion.fn << "\n";
  if (r.folds.size() > 1 && r.protocol == "kfold") {
    out << "\n" << pad("fold", 6) << pad("n_test", 8, true) << pad("search_f1", 11, true) << pad("depth", 7, true)
        << pad("trees", 7, true) << pad("lr", 8, true) << "\n";
    for (const auto& f : r.folds) {
      out << pad(std::to_string(f.fold), 6) << pad(std::to_string(f.test.size()), 8, true)
          << pad(fixed(f.search_score), 11, true) << pad(std::to_string(f.selected.max_depth), 7, true)
          << pad(std::to_string(f.selected.n_trees), 7, true) << pad(fixed(f.selected.learning_rate, 3), 8, true)
          << "\n";
    }
  }
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string format_importance(const DetectorModel& model) {
  const auto table = feature_importance(model);
  std::size_t width = 7;
  for (const auto& [name, _] : table) width = std::max(width, name.size());
  std::ostringstream out;
  out << pad("feature", width + 2) << pad("gain", 14, true) << "\n";
  for (const auto& [name, gain] : table) out << pad(name, width + 2) << pad(fixed(gain, 6), 14, true) << "\n";
  return out.str();
}

std::string format_provenance(const DetectorModel& model) {
  const auto& p = model.provenance;
  std::ostringstream out;
  out << "protocol        " << (p.protocol.empty() ? "-" : p.protocol) << "\n";
  out << "seed            " << p.seed << "\n";
  out << "trees           " << model.trees.size() << "\n";
  out << "threshold       " << fixed(model.threshold) << "\n";
  out << "class weight    " << fixed(p.class_weight) << "\n";
  out << "n_train         " << p.n_train << "\n";
  out << "n_validation    " << p.n_validation << "\n";
  out << "best iteration  " << p.best_iteration << "\n";
  out << "config          " << config_to_json(p.config).dump() << "\n";
  return out.str();
}

}  // namespace tokattr::detector
