#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <array>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"
#include "relaykit/learn/boost.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/learn/knn.hpp"
#include "relaykit/learn/nb.hpp"
#include "relaykit/learn/tree.hpp"

namespace relaykit::learn {

enum class Family { decision_tree, random_forest, gradient_boosting, xgboost, knn, naive_bayes };

inline constexpr std::array<std::string_view, 6> k_family_names = {
    "decision_tree", "random_forest", "gradient_boosting", "xgboost", "knn", "naive_bayes"};

inline std::string_view to_string(Family f) { return k_family_names[static_cast<int>(f)]; }
inline Family parse_family(std::string_view s) {
  for (std::size_t i = 0; i < k_family_names.size(); ++i)
    if (k_family_names[i] == s) return static_cast<Family>(i);
  throw ConfigError("unknown model family '" + std::string(s) + "'");
}

/// A model family plus its hyperparameters as a flat JSON object.
struct ModelSpec {
  Family family = Family::gradient_boosting;
  nlohmann::json params = nlohmann::json::object();
};

using AnyModel = std::variant<TreeModel, ForestModel, BoostedModel, KnnModel, NbModel>;

namespace detail {

template <class T>
T param(const nlohmann::json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("model parameter '") + key + "' has the wrong type");
  }
}

inline void check_keys(const nlohmann::json& p, std::initializer_list<const char*> allowed, Family f) {
  if (!p.is_object()) throw ConfigError("model params must be an object");
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    if (!ok) throw ConfigError("unknown parameter '" + it.key() + "' for " + std::string(to_string(f)));
  }
}

}  // namespace detail

inline TreeConfig tree_config(const nlohmann::json& p, std::uint64_t seed) {
  detail::check_keys(p, {"criterion", "max_depth", "min_samples_split", "max_features"}, Family::decision_tree);
  TreeConfig c;
  c.criterion = parse_criterion(detail::param<std::string>(p, "criterion", "gini"));
  c.max_depth = detail::param(p, "max_depth", -1);
  c.min_samples_split = detail::param(p, "min_samples_split", 2);
  c.max_features = detail::param(p, "max_features", 0);
  c.seed = seed;
  c.validate();
  return c;
}

inline ForestConfig forest_config(const nlohmann::json& p, std::uint64_t seed, int jobs) {
  detail::check_keys(p, {"n_estimators", "max_depth", "max_features", "bootstrap", "criterion", "min_samples_split"},
                     Family::random_forest);
  ForestConfig c;
  c.n_estimators = detail::param(p, "n_estimators", 100);
  c.max_depth = detail::param(p, "max_depth", -1);
  c.max_features = detail::param(p, "max_features", 0);
  c.bootstrap = detail::param(p, "bootstrap", true);
  c.criterion = parse_criterion(detail::param<std::string>(p, "criterion", "gini"));
  c.min_samples_split = detail::param(p, "min_samples_split", 2);
  c.seed = seed;
  c.jobs = jobs;
  c.validate();
  return c;
}

inline BoostConfig boost_config(const nlohmann::json& p, std::uint64_t seed, Family f) {
  detail::check_keys(p, {"n_stages", "learning_rate", "max_depth", "subsample", "gamma", "lambda"}, f);
  BoostConfig c;
  c.mode = f == Family::xgboost ? BoostMode::second_order : BoostMode::first_order;
  c.n_stages = detail::param(p, "n_stages", 100);
  c.learning_rate = detail::param(p, "learning_rate", 0.1);
  c.max_depth = detail::param(p, "max_depth", 3);
  c.subsample = detail::param(p, "subsample", 1.0);
  c.gamma = detail::param(p, "gamma", 0.0);
  c.lambda = detail::param(p, "lambda", 1.0);
  c.seed = seed;
  c.validate();
  return c;
}

inline KnnConfig knn_config(const nlohmann::json& p) {
  detail::check_keys(p, {"k", "p"}, Family::knn);
  KnnConfig c;
  c.k = detail::param(p, "k", 5);
  c.p = detail::param(p, "p", 2.0);
  c.validate();
  return c;
}

/// Validates spec parameters without training.
inline void validate(const ModelSpec& s) {
  switch (s.family) {
    case Family::decision_tree: tree_config(s.params, 0); break;
    case Family::random_forest: forest_config(s.params, 0, 1); break;
    case Family::gradient_boosting:
    case Family::xgboost: boost_config(s.params, 0, s.family); break;
    case Family::knn: knn_config(s.params); break;
    case Family::naive_bayes: detail::check_keys(s.params, {}, s.family); break;
  }
}

inline AnyModel train(const Dataset& d, const ModelSpec& s, std::uint64_t seed, int jobs = 1) {
  switch (s.family) {
    case Family::decision_tree: return train_tree(d, tree_config(s.params, seed));
    case Family::random_forest: return train_forest(d, forest_config(s.params, seed, jobs));
    case Family::gradient_boosting:
    case Family::xgboost: return train_boosted(d, boost_config(s.params, seed, s.family));
    case Family::knn: return train_knn(d, knn_config(s.params));
    case Family::naive_bayes:
      detail::check_keys(s.params, {}, s.family);
      return train_nb(d);
  }
  throw ConfigError("unhandled model family");
}

inline int n_features(const AnyModel& m) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KnnModel>) return static_cast<int>(v.train.d());
        else if constexpr (std::is_same_v<T, NbModel>) return v.mean.empty() ? 0 : static_cast<int>(v.mean[0].size());
        else return v.n_features;
      },
      m);
}

inline int n_classes(const AnyModel& m) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KnnModel>) return v.train.n_classes();
        else return v.n_classes;
      },
      m);
}

struct Prediction {
  std::vector<int> labels;
  Matrix scores;  // rows sum to 1
};

/// Argmax of the per-class scores; ties go to the lowest class index.
inline Prediction predict(const AnyModel& m, const Matrix& x) {
  const int d = n_features(m);
  if (x.rows > 0 && static_cast<int>(x.cols) != d)
    throw DataError("predict: row width " + std::to_string(x.cols) + " != trained width " + std::to_string(d));
  const int k = n_classes(m);
  Prediction p;
  p.scores = Matrix(x.rows, static_cast<std::size_t>(k));
  p.labels.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto s = std::visit([&](const auto& v) { return v.predict_proba(x.row(i)); }, m);
    std::copy(s.begin(), s.end(), p.scores.row(i).begin());
    p.labels[i] = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
  }
  return p;
}

// --- serialization ---

namespace detail {

inline nlohmann::json tree_node_json(const TreeModel& t, int i) {
  const auto& n = t.nodes[i];
  nlohmann::json j;
  j["impurity"] = n.impurity;
  j["counts"] = n.counts;
  if (n.feature >= 0) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = tree_node_json(t, n.left);
    j["right"] = tree_node_json(t, n.right);
  }
  return j;
}

inline int tree_node_from_json(TreeModel& t, const nlohmann::json& j, int n_classes) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  t.nodes[id].impurity = j.at("impurity").get<double>();
  t.nodes[id].counts = j.at("counts").get<std::vector<double>>();
  if (static_cast<int>(t.nodes[id].counts.size()) != n_classes) throw ModelError("model: tree node count width");
  if (j.contains("feature")) {
    const int f = j.at("feature").get<int>();
    if (f < 0 || f >= t.n_features) throw ModelError("model: tree split feature out of range");
    t.nodes[id].feature = f;
    t.nodes[id].threshold = j.at("threshold").get<double>();
    const int l = tree_node_from_json(t, j.at("left"), n_classes);
    const int r = tree_node_from_json(t, j.at("right"), n_classes);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
  }
  return id;
}

inline nlohmann::json tree_json(const TreeModel& t) {
  return {{"n_features", t.n_features},
          {"n_classes", t.n_classes},
          {"criterion", to_string(t.cfg.criterion)},
          {"max_depth", t.cfg.max_depth},
          {"importance", t.importance},
          {"root", tree_node_json(t, 0)}};
}

inline TreeModel tree_from_json(const nlohmann::json& j) {
  TreeModel t;
  t.n_features = j.at("n_features").get<int>();
  t.n_classes = j.at("n_classes").get<int>();
  t.cfg.criterion = parse_criterion(j.at("criterion").get<std::string>());
  t.cfg.max_depth = j.at("max_depth").get<int>();
  t.importance = j.at("importance").get<std::vector<double>>();
  tree_node_from_json(t, j.at("root"), t.n_classes);
  return t;
}

inline nlohmann::json reg_node_json(const RegTree& t, int i) {
  const auto& n = t.nodes[i];
  if (n.feature < 0) return {{"value", n.value}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", reg_node_json(t, n.left)},
          {"right", reg_node_json(t, n.right)}};
}

inline int reg_node_from_json(RegTree& t, const nlohmann::json& j, int n_features) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("feature")) {
    const int f = j.at("feature").get<int>();
    if (f < 0 || f >= n_features) throw ModelError("model: regression split feature out of range");
    t.nodes[id].feature = f;
    t.nodes[id].threshold = j.at("threshold").get<double>();
    const int l = reg_node_from_json(t, j.at("left"), n_features);
    const int r = reg_node_from_json(t, j.at("right"), n_features);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
  } else {
    t.nodes[id].value = j.at("value").get<double>();
  }
  return id;
}

inline nlohmann::json dataset_json(const Dataset& d) {
  return {{"rows", d.x.rows}, {"cols", d.x.cols}, {"x", d.x.data}, {"y", d.y}, {"class_names", d.class_names}};
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
  Dataset d;
  d.x.rows = j.at("rows").get<std::size_t>();
  d.x.cols = j.at("cols").get<std::size_t>();
  d.x.data = j.at("x").get<std::vector<double>>();
  d.y = j.at("y").get<std::vector<int>>();
  d.class_names = j.at("class_names").get<std::vector<std::string>>();
  if (d.x.data.size() != d.x.rows * d.x.cols) throw ModelError("model: stored matrix has wrong size");
  return d;
}

}  // namespace detail

inline nlohmann::json to_json(const AnyModel& m) {
  nlohmann::json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TreeModel>) {
          j["type"] = "decision_tree";
          j["tree"] = detail::tree_json(v);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["type"] = "random_forest";
          j["n_features"] = v.n_features;
          j["n_classes"] = v.n_classes;
          j["trees"] = nlohmann::json::array();
          for (const auto& t : v.trees) j["trees"].push_back(detail::tree_json(t));
        } else if constexpr (std::is_same_v<T, BoostedModel>) {
          j["type"] = "boosted";
          j["mode"] = to_string(v.cfg.mode);
          j["learning_rate"] = v.cfg.learning_rate;
          j["max_depth"] = v.cfg.max_depth;
          j["gamma"] = v.cfg.gamma;
          j["lambda"] = v.cfg.lambda;
          j["n_features"] = v.n_features;
          j["n_classes"] = v.n_classes;
          j["priors"] = v.priors;
          j["train_deviance"] = v.train_deviance;
          j["stages"] = nlohmann::json::array();
          for (const auto& st : v.stages) {
            nlohmann::json s = nlohmann::json::array();
            for (int k = 0; k < v.n_classes; ++k) s.push_back(detail::reg_node_json(st[k], 0));
            j["stages"].push_back(std::move(s));
          }
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          j["type"] = "knn";
          j["k"] = v.cfg.k;
          j["p"] = v.cfg.p;
          j["train"] = detail::dataset_json(v.train);
        } else {
          j["type"] = "naive_bayes";
          j["n_classes"] = v.n_classes;
          j["log_prior"] = v.log_prior;
          j["mean"] = v.mean;
          j["var"] = v.var;
          j["epsilon"] = v.epsilon;
        }
      },
      m);
  return j;
}

/// Raises ModelError on any structural problem.
inline AnyModel model_from_json(const nlohmann::json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "decision_tree") return detail::tree_from_json(j.at("tree"));
    if (type == "random_forest") {
      ForestModel f;
      f.n_features = j.at("n_features").get<int>();
      f.n_classes = j.at("n_classes").get<int>();
      for (const auto& t : j.at("trees")) f.trees.push_back(detail::tree_from_json(t));
      if (f.trees.empty()) throw ModelError("model: forest has no trees");
      return f;
    }
    if (type == "boosted") {
      BoostedModel b;
      b.cfg.mode = parse_boost_mode(j.at("mode").get<std::string>());
      b.cfg.learning_rate = j.at("learning_rate").get<double>();
      b.cfg.max_depth = j.at("max_depth").get<int>();
      b.cfg.gamma = j.at("gamma").get<double>();
      b.cfg.lambda = j.at("lambda").get<double>();
      b.n_features = j.at("n_features").get<int>();
      b.n_classes = j.at("n_classes").get<int>();
      b.priors = j.at("priors").get<std::vector<double>>();
      b.train_deviance = j.at("train_deviance").get<std::vector<double>>();
      if (static_cast<int>(b.priors.size()) != b.n_classes) throw ModelError("model: prior width");
      for (const auto& s : j.at("stages")) {
        if (static_cast<int>(s.size()) != b.n_classes) throw ModelError("model: stage width");
        std::vector<RegTree> st(b.n_classes);
        for (int k = 0; k < b.n_classes; ++k) detail::reg_node_from_json(st[k], s.at(k), b.n_features);
        b.stages.push_back(std::move(st));
      }
      b.cfg.n_stages = static_cast<int>(b.stages.size());
      return b;
    }
    if (type == "knn") {
      KnnModel k;
      k.cfg.k = j.at("k").get<int>();
      k.cfg.p = j.at("p").get<double>();
      k.train = detail::dataset_from_json(j.at("train"));
      return k;
    }
    if (type == "naive_bayes") {
      NbModel nb;
      nb.n_classes = j.at("n_classes").get<int>();
      nb.log_prior = j.at("log_prior").get<std::vector<double>>();
      nb.mean = j.at("mean").get<std::vector<std::vector<double>>>();
      nb.var = j.at("var").get<std::vector<std::vector<double>>>();
      nb.epsilon = j.at("epsilon").get<double>();
      return nb;
    }
    throw ModelError("model: unknown type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model: malformed JSON: ") + e.what());
  }
}

}  // namespace relaykit::learn
