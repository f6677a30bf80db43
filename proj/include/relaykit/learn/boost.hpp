#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/learn/metrics.hpp"
#include "relaykit/random.hpp"

namespace relaykit::learn {

enum class BoostMode { first_order, second_order };

inline std::string_view to_string(BoostMode m) { return m == BoostMode::first_order ? "first_order" : "second_order"; }
inline BoostMode parse_boost_mode(std::string_view s) {
  if (s == "first_order") return BoostMode::first_order;
  if (s == "second_order") return BoostMode::second_order;
  throw ConfigError("unknown boosting mode '" + std::string(s) + "'");
}

struct BoostConfig {
  BoostMode mode = BoostMode::first_order;
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double subsample = 1.0;
  double gamma = 0.0;   // second order: minimum split gain
  double lambda = 1.0;  // second order: L2 penalty on leaf weights
  std::uint64_t seed = 0;

  void validate() const {
    if (n_stages < 0) throw ConfigError("boost: n_stages must be >= 0");
    if (!(learning_rate >= 0)) throw ConfigError("boost: learning_rate must be >= 0");
    if (max_depth < 1) throw ConfigError("boost: max_depth must be >= 1");
    if (!(subsample > 0 && subsample <= 1)) throw ConfigError("boost: subsample must be in (0, 1]");
    if (!(gamma >= 0)) throw ConfigError("boost: gamma must be >= 0");
    if (!(lambda >= 0)) throw ConfigError("boost: lambda must be >= 0");
    if (mode == BoostMode::second_order && !(lambda > 0) && !(gamma >= 0)) throw ConfigError("boost: bad regularization");
  }
};

struct RegNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;
};

struct RegTree {
  std::vector<RegNode> nodes;

  double eval(std::span<const double> row) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
  }
};

struct BoostedModel {
  BoostConfig cfg;
  int n_features = 0;
  int n_classes = 0;
  std::vector<double> priors;               // stage-0 scores: log class frequencies
  std::vector<std::vector<RegTree>> stages;  // stages[s][k]
  std::vector<double> train_deviance;       // mean deviance after 0..n_stages stages

  std::vector<double> raw_scores(std::span<const double> row) const {
    std::vector<double> f = priors;
    for (const auto& st : stages)
      for (int k = 0; k < n_classes; ++k) f[k] += cfg.learning_rate * st[k].eval(row);
    return f;
  }

  std::vector<double> predict_proba(std::span<const double> row) const {
    auto f = raw_scores(row);
    const double mx = *std::max_element(f.begin(), f.end());
    double s = 0.0;
    for (auto& v : f) s += (v = std::exp(v - mx));
    for (auto& v : f) v /= s;
    return f;
  }
};

namespace detail {

/// Level-wise regression-tree growth over features presorted once per model.
class RegTreeBuilder {
public:
  RegTreeBuilder(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted, const BoostConfig& cfg,
                 int n_classes)
      : x_(x), sorted_(sorted), cfg_(cfg), k_(n_classes) {}

  /// g, h: per-row gradient statistics; r: residuals for first-order leaves. Rows
  /// with active[i] == 0 are ignored.
  RegTree build(const std::vector<double>& g, const std::vector<double>& h, const std::vector<double>& r,
                const std::vector<char>& active) {
    const std::size_t n = x_.rows;
    RegTree t;
    std::vector<int> node_of(n, -1);
    struct Stat {
      double G = 0, H = 0, R = 0, D = 0;
      long cnt = 0;
    };
    std::vector<Stat> stat(1);
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) {
        node_of[i] = 0;
        add(stat[0], g[i], h[i], r[i]);
      }
    t.nodes.emplace_back();
    std::vector<int> open = {0};

    for (int depth = 0; depth < cfg_.max_depth && !open.empty(); ++depth) {
      struct Best {
        int feature = -1;
        double threshold = 0.0, gain = 0.0;
      };
      std::vector<Best> best(t.nodes.size());
      std::vector<char> is_open(t.nodes.size(), 0);
      for (int o : open) is_open[o] = 1;
      std::vector<Stat> run(t.nodes.size());
      std::vector<double> last(t.nodes.size());
      std::vector<char> seen(t.nodes.size());
      for (std::size_t f = 0; f < x_.cols; ++f) {
        for (int o : open) {
          run[o] = Stat{};
          seen[o] = 0;
        }
        for (std::uint32_t i : sorted_[f]) {
          const int nd = node_of[i];
          if (nd < 0 || !is_open[nd]) continue;
          const double v = x_(i, f);
          if (seen[nd] && v > last[nd]) {
            const double gain = split_gain(run[nd], stat[nd]);
            if (valid(gain) && (best[nd].feature < 0 || gain > best[nd].gain + 1e-12 * std::abs(best[nd].gain) + 1e-300)) {
              double thr = 0.5 * (last[nd] + v);
              if (!(thr < v)) thr = last[nd];
              best[nd] = {static_cast<int>(f), thr, gain};
            }
          }
          add(run[nd], g[i], h[i], r[i]);
          last[nd] = v;
          seen[nd] = 1;
        }
      }
      std::vector<int> next;
      std::vector<int> left_of(t.nodes.size(), -1);
      for (int o : open) {
        if (best[o].feature < 0) continue;
        const int l = static_cast<int>(t.nodes.size());
        t.nodes[o].feature = best[o].feature;
        t.nodes[o].threshold = best[o].threshold;
        t.nodes[o].left = l;
        t.nodes[o].right = l + 1;
        t.nodes.emplace_back();
        t.nodes.emplace_back();
        stat.resize(t.nodes.size());
        left_of[o] = l;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const int nd = node_of[i];
        if (nd < 0 || nd >= static_cast<int>(left_of.size()) || left_of[nd] < 0) continue;
        const int c = x_(i, t.nodes[nd].feature) <= t.nodes[nd].threshold ? left_of[nd] : left_of[nd] + 1;
        node_of[i] = c;
        add(stat[c], g[i], h[i], r[i]);
      }
      open = std::move(next);
    }
    for (std::size_t j = 0; j < t.nodes.size(); ++j)
      if (t.nodes[j].feature < 0) t.nodes[j].value = leaf_value(stat[j]);
    return t;
  }

private:
  template <class S>
  static void add(S& s, double g, double h, double r) {
    s.G += g;
    s.H += h;
    s.R += r;
    s.D += std::abs(r) * (1.0 - std::abs(r));
    ++s.cnt;
  }

  template <class S>
  double split_gain(const S& left, const S& parent) const {
    const double GL = left.G, HL = left.H, GR = parent.G - left.G, HR = parent.H - left.H;
    if (cfg_.mode == BoostMode::second_order) {
      const double l = cfg_.lambda;
      return 0.5 * (GL * GL / (HL + l) + GR * GR / (HR + l) - parent.G * parent.G / (parent.H + l)) - cfg_.gamma;
    }
    // Squared-error reduction; h is 1 per row so H counts rows.
    return GL * GL / HL + GR * GR / HR - parent.G * parent.G / parent.H;
  }

  bool valid(double gain) const { return cfg_.mode == BoostMode::second_order ? gain > 0.0 : gain > 1e-14; }

  template <class S>
  double leaf_value(const S& s) const {
    if (s.cnt == 0) return 0.0;
    if (cfg_.mode == BoostMode::second_order) return -s.G / (s.H + cfg_.lambda);
    if (std::abs(s.D) < 1e-150) return 0.0;
    return (k_ - 1.0) / k_ * s.R / s.D;
  }

  const Matrix& x_;
  const std::vector<std::vector<std::uint32_t>>& sorted_;
  BoostConfig cfg_;
  double k_;
};

inline std::vector<double> softmax(std::vector<double> f) {
  const double mx = *std::max_element(f.begin(), f.end());
  double s = 0.0;
  for (auto& v : f) s += (v = std::exp(v - mx));
  for (auto& v : f) v /= s;
  return f;
}

}  // namespace detail

/// Multiclass gradient boosting with one regression tree per class and stage.
/// first_order fits trees to the negative gradient of the multinomial deviance;
/// second_order uses gradient and hessian with gamma/lambda regularization.
inline BoostedModel train_boosted(const Dataset& d, const BoostConfig& cfg) {
  cfg.validate();
  d.validate();
  if (d.n() == 0) throw DataError("boost: no training rows");
  const int K = d.n_classes();
  const std::size_t n = d.n();
  BoostedModel m;
  m.cfg = cfg;
  m.n_features = static_cast<int>(d.d());
  m.n_classes = K;
  auto counts = d.class_counts();
  for (int k = 0; k < K; ++k)
    m.priors.push_back(std::log(std::max(static_cast<double>(counts[k]) / static_cast<double>(n), 1e-12)));

  std::vector<std::vector<std::uint32_t>> sorted(d.d(), std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d.d(); ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), 0u);
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](std::uint32_t a, std::uint32_t b) { return d.x(a, f) < d.x(b, f); });
  }
  detail::RegTreeBuilder builder(d.x, sorted, cfg, K);

  std::vector<std::vector<double>> F(n, m.priors);
  auto deviance = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s -= std::log(std::max(detail::softmax(F[i])[d.y[i]], 1e-300));
    return s / static_cast<double>(n);
  };
  m.train_deviance.push_back(deviance());

  Rng rng(derive_seed(cfg.seed, {0xb0057}));
  std::vector<double> g(n), h(n), r(n);
  std::vector<char> active(n, 1);
  const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::floor(cfg.subsample * static_cast<double>(n))));
  std::vector<std::size_t> perm(n);
  for (int s = 0; s < cfg.n_stages; ++s) {
    if (n_sub < n) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < n_sub; ++i) std::swap(perm[i], perm[i + rng.index(n - i)]);
      std::fill(active.begin(), active.end(), 0);
      for (std::size_t i = 0; i < n_sub; ++i) active[perm[i]] = 1;
    }
    std::vector<std::vector<double>> P(n);
    for (std::size_t i = 0; i < n; ++i) P[i] = detail::softmax(F[i]);
    std::vector<RegTree> stage;
    stage.reserve(K);
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double y = d.y[i] == k ? 1.0 : 0.0;
        r[i] = y - P[i][k];
        if (cfg.mode == BoostMode::second_order) {
          g[i] = P[i][k] - y;
          h[i] = std::max(P[i][k] * (1.0 - P[i][k]), 1e-16);
        } else {
          g[i] = r[i];
          h[i] = 1.0;
        }
      }
      stage.push_back(builder.build(g, h, r, active));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) F[i][k] += cfg.learning_rate * stage[k].eval(d.x.row(i));
    m.stages.push_back(std::move(stage));
    m.train_deviance.push_back(deviance());
  }
  return m;
}

}  // namespace relaykit::learn
