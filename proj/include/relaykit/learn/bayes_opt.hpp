#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relaykit/error.hpp"
#include "relaykit/random.hpp"

namespace relaykit::learn {

/// One search axis. Real and integer axes are boxes [lo, hi]; categorical axes
/// take values 0..n_categories-1 and are one-hot encoded for the kernel.
struct SearchAxis {
  enum class Kind { real, integer, categorical };
  std::string name;
  Kind kind = Kind::real;
  double lo = 0.0, hi = 1.0;
  int n_categories = 0;

  static SearchAxis real(std::string n, double lo, double hi) { return {std::move(n), Kind::real, lo, hi, 0}; }
  static SearchAxis integer(std::string n, int lo, int hi) { return {std::move(n), Kind::integer, double(lo), double(hi), 0}; }
  static SearchAxis categorical(std::string n, int k) { return {std::move(n), Kind::categorical, 0, 0, k}; }

  void validate() const {
    if (kind == Kind::categorical) {
      if (n_categories < 1) throw ConfigError("axis '" + name + "': no categories");
    } else if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw ConfigError("axis '" + name + "': bad bounds");
    }
  }
};

using SearchSpace = std::vector<SearchAxis>;

struct BayesOptConfig {
  int n_init = 4;
  int n_iter = 10;
  int n_candidates = 1024;
  std::uint64_t seed = 0;
};

struct GpState {
  std::vector<std::vector<double>> z;  // encoded inputs
  std::vector<double> y;
  double length_scale = 1.0, signal_var = 1.0, noise = 1e-6;
};

struct BayesOptResult {
  std::vector<double> best_z;
  double best_y = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> history_z;
  std::vector<double> history_y;
};

namespace detail {

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline std::uint64_t nth_prime(std::size_t k) {
  static const std::uint64_t p[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (k >= std::size(p)) throw ConfigError("bayes_opt: too many axes for the quasi-random sequence");
  return p[k];
}

/// Maps a point in [0,1)^axes to axis values.
inline std::vector<double> decode(const SearchSpace& s, const std::vector<double>& u) {
  std::vector<double> v(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    const auto& ax = s[a];
    switch (ax.kind) {
      case SearchAxis::Kind::real: v[a] = ax.lo + u[a] * (ax.hi - ax.lo); break;
      case SearchAxis::Kind::integer:
        v[a] = std::min(ax.hi, std::floor(ax.lo + u[a] * (ax.hi - ax.lo + 1.0)));
        break;
      case SearchAxis::Kind::categorical:
        v[a] = std::min<double>(ax.n_categories - 1, std::floor(u[a] * ax.n_categories));
        break;
    }
  }
  return v;
}

/// Unit-cube encoding used by the kernel.
inline std::vector<double> encode(const SearchSpace& s, const std::vector<double>& v) {
  std::vector<double> e;
  for (std::size_t a = 0; a < s.size(); ++a) {
    const auto& ax = s[a];
    if (ax.kind == SearchAxis::Kind::categorical) {
      for (int c = 0; c < ax.n_categories; ++c) e.push_back(static_cast<int>(v[a]) == c ? 1.0 : 0.0);
    } else {
      e.push_back(ax.hi > ax.lo ? (v[a] - ax.lo) / (ax.hi - ax.lo) : 0.0);
    }
  }
  return e;
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline Eigen::MatrixXd kernel(const std::vector<std::vector<double>>& z, double ell, double sv, double noise) {
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = sv * std::exp(-0.5 * sq_dist(z[i], z[j]) / (ell * ell));
  k.diagonal().array() += noise;
  return k;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace detail

/// Squared-exponential GP posterior on standardized targets with kernel
/// hyperparameters picked by marginal likelihood over a fixed 8x8 grid.
class GaussianProcess {
public:
  explicit GaussianProcess(GpState st) : st_(std::move(st)) {
    const auto n = static_cast<Eigen::Index>(st_.y.size());
    if (n == 0) throw DataError("gp: no observations");
    mean_ = 0.0;
    for (double v : st_.y) mean_ += v;
    mean_ /= static_cast<double>(n);
    double var = 0.0;
    for (double v : st_.y) var += (v - mean_) * (v - mean_);
    scale_ = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 1.0;
    if (!(scale_ > 1e-300)) scale_ = 1.0;
    yn_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) yn_(i) = (st_.y[i] - mean_) / scale_;

    double best_ll = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        const double ell = 0.03 * std::pow(100.0, a / 7.0);  // 0.03 .. 3
        const double sv = 0.1 * std::pow(100.0, b / 7.0);    // 0.1 .. 10
        Eigen::LLT<Eigen::MatrixXd> llt(detail::kernel(st_.z, ell, sv, st_.noise));
        if (llt.info() != Eigen::Success) continue;
        const Eigen::VectorXd alpha = llt.solve(yn_);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double ll = -0.5 * yn_.dot(alpha) - 0.5 * logdet;
        if (ll > best_ll) {
          best_ll = ll;
          st_.length_scale = ell;
          st_.signal_var = sv;
        }
      }
    if (!std::isfinite(best_ll)) throw ModelError("gp: kernel matrix not positive definite");
    llt_.compute(detail::kernel(st_.z, st_.length_scale, st_.signal_var, st_.noise));
    alpha_ = llt_.solve(yn_);
  }

  const GpState& state() const { return st_; }

  /// Posterior mean and standard deviation in original target units.
  std::pair<double, double> posterior(const std::vector<double>& z) const {
    const auto n = static_cast<Eigen::Index>(st_.z.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i)
      k(i) = st_.signal_var * std::exp(-0.5 * detail::sq_dist(z, st_.z[i]) / (st_.length_scale * st_.length_scale));
    const double mu = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = std::max(st_.signal_var - v.squaredNorm(), 1e-18);
    return {mean_ + scale_ * mu, scale_ * std::sqrt(var)};
  }

  /// Expected improvement over `best` for maximization.
  double expected_improvement(const std::vector<double>& z, double best) const {
    const auto [mu, sd] = posterior(z);
    const double g = (mu - best) / sd;
    return (mu - best) * detail::normal_cdf(g) + sd * detail::normal_pdf(g);
  }

private:
  GpState st_;
  double mean_ = 0.0, scale_ = 1.0;
  Eigen::VectorXd yn_, alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Maximizes `objective` over `space`. Initial points are seeded uniform draws;
/// each iteration maximizes expected improvement over a randomly shifted Halton set.
inline BayesOptResult bayes_opt(const std::function<double(const std::vector<double>&)>& objective,
                                const SearchSpace& space, const BayesOptConfig& cfg) {
  if (space.empty()) throw ConfigError("bayes_opt: empty search space");
  for (const auto& a : space) a.validate();
  if (cfg.n_init < 2) throw ConfigError("bayes_opt: n_init must be >= 2");
  if (cfg.n_iter < 0 || cfg.n_candidates < 1) throw ConfigError("bayes_opt: bad iteration counts");
  const std::size_t d = space.size();
  BayesOptResult res;
  GpState st;
  auto observe = [&](const std::vector<double>& v) {
    const double y = objective(v);
    if (!std::isfinite(y)) throw DataError("bayes_opt: objective returned a non-finite value");
    res.history_z.push_back(v);
    res.history_y.push_back(y);
    st.z.push_back(detail::encode(space, v));
    st.y.push_back(y);
    if (y > res.best_y) {
      res.best_y = y;
      res.best_z = v;
    }
  };

  Rng init(derive_seed(cfg.seed, {0x1417}));
  for (int i = 0; i < cfg.n_init; ++i) {
    std::vector<double> u(d);
    for (auto& x : u) x = init.uniform();
    observe(detail::decode(space, u));
  }
  for (int it = 0; it < cfg.n_iter; ++it) {
    GaussianProcess gp(st);
    Rng shift_rng(derive_seed(cfg.seed, {0x5417, static_cast<std::uint64_t>(it)}));
    std::vector<double> shift(d);
    for (auto& s : shift) s = shift_rng.uniform();
    double best_ei = -1.0;
    std::vector<double> pick;
    for (int c = 0; c < cfg.n_candidates; ++c) {
      std::vector<double> u(d);
      for (std::size_t a = 0; a < d; ++a) {
        const double h = detail::radical_inverse(static_cast<std::uint64_t>(c) + 1, detail::nth_prime(a)) + shift[a];
        u[a] = h - std::floor(h);
      }
      auto v = detail::decode(space, u);
      const double ei = gp.expected_improvement(detail::encode(space, v), res.best_y);
      if (ei > best_ei) {
        best_ei = ei;
        pick = std::move(v);
      }
    }
    observe(pick);
  }
  return res;
}

}  // namespace relaykit::learn
