#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "relaykit/learn/bayes_opt.hpp"
#include "relaykit/learn/cv.hpp"
#include "relaykit/learn/resample.hpp"

using namespace relaykit;
using namespace relaykit::learn;
using Catch::Approx;

namespace {

Dataset make(const std::vector<std::vector<double>>& rows, const std::vector<int>& y, int k) {
  Dataset d;
  d.x = Matrix::from_rows(rows);
  d.y = y;
  for (int c = 0; c < k; ++c) d.class_names.push_back("c" + std::to_string(c));
  return d;
}

// Two Gaussian blobs in `dim` dimensions, centred at -sep/2 and +sep/2 on every axis.
Dataset blobs(std::size_t n_per, double sep, std::uint64_t seed, int dim = 2) {
  Rng r(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < n_per; ++i) {
      std::vector<double> row(dim);
      for (auto& v : row) v = r.normal() + (c ? sep / 2 : -sep / 2);
      rows.push_back(row);
      y.push_back(c);
    }
  return make(rows, y, 2);
}

Dataset xor_data(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = r.uniform(-1, 1), b = r.uniform(-1, 1);
    rows.push_back({a, b});
    y.push_back((a > 0) != (b > 0));
  }
  return make(rows, y, 2);
}

double train_accuracy(const AnyModel& m, const Dataset& d) { return accuracy(d.y, predict(m, d.x).labels); }

// Walks the serialized regression tree.
double walk(const nlohmann::json& node, std::span<const double> row) {
  if (!node.contains("feature")) return node["value"].get<double>();
  return walk(row[node["feature"].get<int>()] <= node["threshold"].get<double>() ? node["left"] : node["right"], row);
}

}  // namespace

TEST_CASE("impurity values") {
  for (auto c : {Criterion::gini, Criterion::entropy}) CHECK(impurity(std::vector<long>{5, 0}, c) == 0.0);
  CHECK(impurity(std::vector<long>{3, 3}, Criterion::gini) == Approx(0.5));
  CHECK(impurity(std::vector<long>{3, 3}, Criterion::entropy) == Approx(1.0));
  CHECK(impurity(std::vector<long>{2, 1, 1}, Criterion::gini) == Approx(0.625));
}

TEST_CASE("split gain values") {
  CHECK(split_gain(std::vector<long>{4, 4}, {4, 4}, {0, 0}, Criterion::gini) == Approx(0.0).margin(1e-15));
  CHECK(split_gain(std::vector<long>{4, 4}, {4, 0}, {0, 4}, Criterion::gini) == Approx(0.5));
  CHECK(split_gain(std::vector<long>{4, 4}, {4, 0}, {0, 4}, Criterion::entropy) == Approx(1.0));
  CHECK(split_gain(std::vector<long>{4, 4}, {3, 1}, {1, 3}, Criterion::gini) == Approx(0.125));
}

TEST_CASE("tree fits XOR exactly with depth 2") {
  const auto d = make({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}, 2);
  TreeConfig c;
  c.max_depth = 2;
  const AnyModel t = train_tree(d, c);
  CHECK(train_accuracy(t, d) == 1.0);
  CHECK(std::get<TreeModel>(t).depth() <= 2);
}

TEST_CASE("tree degenerate cases") {
  const auto one = make({{1}, {2}, {3}}, {1, 1, 1}, 2);
  const auto t = train_tree(one);
  CHECK(t.nodes.size() == 1);
  CHECK(predict(AnyModel{t}, one.x).labels == std::vector<int>{1, 1, 1});

  const auto d = make({{1}, {2}, {3}, {4}, {5}}, {0, 1, 1, 1, 0}, 2);
  TreeConfig stump;
  stump.max_depth = 0;
  const auto s = train_tree(d, stump);
  CHECK(s.nodes.size() == 1);
  CHECK(predict(AnyModel{s}, d.x).labels == std::vector<int>(5, 1));
}

TEST_CASE("forest with one full tree and no bootstrap equals the tree") {
  const auto d = xor_data(120, 3);
  ForestConfig fc;
  fc.n_estimators = 1;
  fc.bootstrap = false;
  fc.max_features = 2;
  const AnyModel f = train_forest(d, fc);
  const AnyModel t = train_tree(d);
  const auto q = xor_data(200, 4);
  CHECK(predict(f, q.x).labels == predict(t, q.x).labels);
}

TEST_CASE("forest is deterministic per seed and separates blobs") {
  const auto d = blobs(100, 4, 1);
  const auto q = blobs(100, 4, 2);
  ForestConfig fc;
  fc.n_estimators = 50;
  fc.seed = 9;
  const AnyModel a = train_forest(d, fc), b = train_forest(d, fc);
  CHECK(predict(a, q.x).labels == predict(b, q.x).labels);
  CHECK(train_accuracy(a, q) >= 0.95);
  fc.jobs = 3;
  const AnyModel c = train_forest(d, fc);
  CHECK(predict(c, q.x).labels == predict(a, q.x).labels);
}

TEST_CASE("boosting with zero learning rate predicts the priors") {
  Dataset d = blobs(30, 2, 5);
  d.y[0] = 1;  // 29 / 31
  BoostConfig c;
  c.learning_rate = 0;
  c.n_stages = 5;
  const AnyModel m = train_boosted(d, c);
  const auto p = predict(m, blobs(10, 2, 6).x);
  for (std::size_t i = 0; i < p.scores.rows; ++i) {
    CHECK(p.scores(i, 0) == Approx(29.0 / 60));
    CHECK(p.scores(i, 1) == Approx(31.0 / 60));
  }
}

TEST_CASE("boosting reduces training deviance") {
  for (auto mode : {BoostMode::first_order, BoostMode::second_order}) {
    BoostConfig c;
    c.mode = mode;
    c.n_stages = 50;
    const auto m = train_boosted(xor_data(200, 7), c);
    REQUIRE(m.train_deviance.size() == 51);
    CHECK(m.train_deviance.back() < m.train_deviance.front());
    for (std::size_t s = 1; s < m.train_deviance.size(); ++s) CHECK(m.train_deviance[s] <= m.train_deviance[s - 1] + 1e-12);
  }
}

TEST_CASE("second-order boosting with a huge ridge stays at the priors") {
  BoostConfig c;
  c.mode = BoostMode::second_order;
  c.lambda = 1e9;
  c.n_stages = 20;
  const auto d = xor_data(100, 8);
  const auto m = train_boosted(d, c);
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto f = m.raw_scores(d.x.row(i));
    for (int k = 0; k < 2; ++k) CHECK(f[k] == Approx(m.priors[k]).margin(1e-6));
  }
}

TEST_CASE("boosted scores match a re-evaluation of the serialized trees") {
  Rng r(12);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) {
    const double a = r.uniform(-1, 1), b = r.uniform(-1, 1), c = r.normal();
    rows.push_back({a, b, c});
    y.push_back(a + b > 0.5 ? 2 : (a > b ? 1 : 0));
  }
  const auto ds = make(rows, y, 3);
  BoostConfig c;
  c.n_stages = 30;
  c.subsample = 0.7;
  c.seed = 4;
  const AnyModel m = train_boosted(ds, c);
  const auto j = to_json(m);
  const auto p = predict(m, ds.x);
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<double> f = j["priors"].get<std::vector<double>>();
    for (const auto& st : j["stages"])
      for (int k = 0; k < 3; ++k) f[k] += 0.1 * walk(st[k], ds.x.row(i));
    double z = 0;
    for (double v : f) z += std::exp(v);
    for (int k = 0; k < 3; ++k) CHECK(p.scores(i, k) == Approx(std::exp(f[k]) / z).margin(1e-12));
  }
}

TEST_CASE("kNN basics") {
  const auto d = blobs(20, 1, 13);
  KnnConfig one;
  one.k = 1;
  const AnyModel m1 = train_knn(d, one);
  CHECK(predict(m1, d.x).labels == d.y);

  Dataset skew = d;
  skew.y[0] = 1;  // 19 / 21
  KnnConfig all;
  all.k = static_cast<int>(skew.n());
  const AnyModel mn = train_knn(skew, all);
  for (int lab : predict(mn, blobs(5, 1, 14).x).labels) CHECK(lab == 1);
  all.k = 100;
  CHECK_THROWS_AS(train_knn(skew, all), DataError);
  KnnConfig manhattan;
  manhattan.p = 1;
  manhattan.k = 3;
  CHECK(train_accuracy(train_knn(d, manhattan), d) > 0.5);
}

TEST_CASE("naive Bayes on well separated Gaussians") {
  Rng r(21);
  auto sample = [&](std::size_t n) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % 2);
      rows.push_back({r.normal() + (c ? 3 : -3)});
      y.push_back(c);
    }
    return make(rows, y, 2);
  };
  const auto tr = sample(400), te = sample(2000);
  CHECK(train_accuracy(train_nb(tr), te) >= 0.99);
}

TEST_CASE("prediction scores are probabilities") {
  const auto d = xor_data(200, 30);
  Rng r(31);
  Matrix q(1000, 2);
  for (auto& v : q.data) v = r.uniform(-2, 2);
  const auto none = nlohmann::json::object();
  const std::vector<ModelSpec> specs = {{Family::decision_tree, none},
                                        {Family::random_forest, {{"n_estimators", 10}}},
                                        {Family::gradient_boosting, {{"n_stages", 10}}},
                                        {Family::xgboost, {{"n_stages", 10}}},
                                        {Family::knn, none},
                                        {Family::naive_bayes, none}};
  for (const auto& s : specs) {
    const auto p = predict(train(d, s, 1), q);
    for (std::size_t i = 0; i < q.rows; ++i) {
      double sum = 0;
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(p.scores(i, k) >= 0);
        sum += p.scores(i, k);
      }
      CHECK(sum == Approx(1.0).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(predict(train(d, specs[0], 1), Matrix(2, 3)), DataError);
}

TEST_CASE("model JSON round trip preserves predictions") {
  const auto d = xor_data(150, 40);
  const auto q = xor_data(100, 41);
  for (auto f : {Family::decision_tree, Family::random_forest, Family::gradient_boosting, Family::xgboost, Family::knn,
                 Family::naive_bayes}) {
    nlohmann::json params = nlohmann::json::object();
    if (f == Family::random_forest) params["n_estimators"] = 5;
    if (f == Family::gradient_boosting || f == Family::xgboost) params["n_stages"] = 5;
    const auto m = train(d, {f, params}, 2);
    const auto back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
    const auto a = predict(m, q.x), b = predict(back, q.x);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < a.scores.data.size(); ++i) CHECK(a.scores.data[i] == Approx(b.scores.data[i]).margin(1e-12));
  }
  CHECK_THROWS_AS(model_from_json({{"type", "svm"}}), ModelError);
  CHECK_THROWS_AS(model_from_json({{"type", "boosted"}}), ModelError);
}

TEST_CASE("model parameter validation") {
  CHECK_THROWS_AS(validate({Family::knn, {{"kk", 3}}}), ConfigError);
  CHECK_THROWS_AS(validate({Family::decision_tree, {{"max_depth", "deep"}}}), ConfigError);
  CHECK_THROWS_AS(validate({Family::gradient_boosting, {{"learning_rate", -1.0}}}), ConfigError);
  CHECK_THROWS_AS(parse_family("svm"), ConfigError);
  CHECK_NOTHROW(validate({Family::xgboost, {{"gamma", 0.5}, {"lambda", 2.0}}}));
}

TEST_CASE("stratified folds") {
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) y[i] = i % 2;
  auto folds = stratified_folds(y, 10, 1);
  REQUIRE(folds.size() == 10);
  std::set<std::size_t> all;
  for (const auto& f : folds) {
    long c1 = 0;
    for (auto i : f) {
      c1 += y[i];
      CHECK(all.insert(i).second);
    }
    CHECK(f.size() == 10);
    CHECK(c1 == 5);
  }
  CHECK(all.size() == 100);

  std::vector<int> z(97, 0);
  for (int i = 0; i < 37; ++i) z[i * 2] = 1;
  folds = stratified_folds(z, 10, 3);
  all.clear();
  for (const auto& f : folds) {
    long ones = 0, zeros = 0;
    for (auto i : f) {
      (z[i] ? ones : zeros) += 1;
      all.insert(i);
    }
    CHECK((zeros == 6 || zeros == 7));
    CHECK((ones == 3 || ones == 4));
  }
  CHECK(all.size() == 97);
}

TEST_CASE("grid search") {
  const auto d = xor_data(300, 50);
  const auto one = grid_search(d, Family::decision_tree, {{{"max_depth", 2}}}, 5, 1);
  CHECK(one.best_index == 0);
  const auto g = grid_search(d, Family::decision_tree, expand_grid({{"max_depth", {1, 5}}}), 5, 1);
  CHECK(g.best_params["max_depth"] == 5);
  CHECK(g.best_score == cross_val_score(d, {Family::decision_tree, g.best_params}, 5, 1));
  CHECK(expand_grid({{"a", {1, 2}}, {"b", {3, 4, 5}}}).size() == 6);
  CHECK(expand_grid({{"a", {1, 2}}, {"b", {3, 4}}})[1] == nlohmann::json{{"a", 1}, {"b", 4}});
  CHECK_THROWS_AS(grid_search(d, Family::knn, {}, 5, 1), ConfigError);
}

TEST_CASE("Bayesian optimization finds a 1-D quadratic optimum") {
  const SearchSpace space = {SearchAxis::real("z", 0, 1)};
  auto f = [](const std::vector<double>& z) { return -(z[0] - 0.33) * (z[0] - 0.33); };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BayesOptConfig c;
    c.n_init = 4;
    c.n_iter = 11;
    c.seed = seed;
    const auto r = bayes_opt(f, space, c);
    CHECK(std::abs(r.best_z[0] - 0.33) < 0.02);
    CHECK(r.history_y.size() == 15);
    const auto again = bayes_opt(f, space, c);
    CHECK(again.history_z == r.history_z);
  }
}

TEST_CASE("Bayesian optimization with no iterations keeps the best initial point") {
  const SearchSpace space = {SearchAxis::real("a", -1, 1), SearchAxis::integer("b", 1, 5), SearchAxis::categorical("c", 3)};
  auto f = [](const std::vector<double>& z) { return z[0] + z[1] - z[2]; };
  BayesOptConfig c;
  c.n_init = 6;
  c.n_iter = 0;
  const auto r = bayes_opt(f, space, c);
  REQUIRE(r.history_y.size() == 6);
  CHECK(r.best_y == *std::max_element(r.history_y.begin(), r.history_y.end()));
  for (const auto& z : r.history_z) {
    CHECK(z[1] == std::round(z[1]));
    CHECK((z[2] == 0 || z[2] == 1 || z[2] == 2));
  }
  c.n_init = 1;
  CHECK_THROWS_AS(bayes_opt(f, space, c), ConfigError);
}

TEST_CASE("SMOTE places synthetic rows on same-class segments") {
  const auto d = blobs(15, 3, 60, 3);
  CHECK(smote(d, 1, 0, 3, 1).n() == d.n());
  const auto s = smote(d, 1, 40, 3, 1);
  REQUIRE(s.n() == d.n() + 40);
  for (std::size_t i = d.n(); i < s.n(); ++i) {
    CHECK(s.y[i] == 1);
    bool found = false;
    for (std::size_t a = 0; a < d.n() && !found; ++a)
      for (std::size_t b = 0; b < d.n() && !found; ++b) {
        if (d.y[a] != 1 || d.y[b] != 1 || a == b) continue;
        // Same interpolation weight on every coordinate.
        const double u = std::abs(d.x(b, 0) - d.x(a, 0)) > 1e-12 ? (s.x(i, 0) - d.x(a, 0)) / (d.x(b, 0) - d.x(a, 0)) : -1;
        if (u < -1e-12 || u > 1 + 1e-12) continue;
        bool ok = true;
        for (std::size_t j = 0; j < 3; ++j) ok &= std::abs(d.x(a, j) + u * (d.x(b, j) - d.x(a, j)) - s.x(i, j)) < 1e-9;
        found = ok;
      }
    CHECK(found);
  }
  CHECK_THROWS_AS(smote(d, 1, 10, 20, 1), DataError);
}

TEST_CASE("SMOTE scales a 720-row class to 3000") {
  Rng r(70);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 720; ++i) {
    rows.push_back({r.normal(), r.normal()});
    y.push_back(0);
  }
  const auto s = smote(make(rows, y, 1), 0, 3000 - 720, 5, 2);
  CHECK(s.class_counts()[0] == 3000);
}

TEST_CASE("NearMiss keeps the boundary-nearest majority rows") {
  // Majority on x in [0, 10), minority at x >= 20.
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i), 0.0});
    y.push_back(0);
  }
  for (int i = 0; i < 4; ++i) {
    rows.push_back({20.0 + i, 0.0});
    y.push_back(1);
  }
  const auto d = make(rows, y, 2);
  CHECK(nearmiss(d, 0, 10).n() == d.n());
  const auto k = nearmiss(d, 0, 3);
  CHECK(k.class_counts() == std::vector<long>{3, 4});
  std::set<double> kept;
  for (std::size_t i = 0; i < k.n(); ++i)
    if (k.y[i] == 0) kept.insert(k.x(i, 0));
  CHECK(kept == std::set<double>{7, 8, 9});
  CHECK_THROWS_AS(nearmiss(d, 0, 11), DataError);
}

TEST_CASE("balanced accuracy") {
  const Confusion c = {{2105, 2}, {0, 1852}};
  CHECK(std::round(balanced_accuracy(c) * 10000) / 100 == 99.95);
  CHECK(balanced_accuracy({{5, 0, 0}, {0, 3, 0}, {0, 0, 9}}) == 1.0);
  CHECK(balanced_accuracy({{90, 0}, {10, 0}}) == 0.5);
  CHECK(per_class_recall({{3, 1}, {0, 4}}) == std::vector<double>{0.75, 1.0});
  CHECK(confusion({0, 1, 1}, {0, 0, 1}, 2) == Confusion{{1, 0}, {1, 1}});
  CHECK_THROWS_AS(confusion({0, 2}, {0, 1}, 2), DataError);
}
