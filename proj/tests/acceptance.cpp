// Acceptance run: one PASS/FAIL line per criterion, with timing.
// Exit status counts failures outside k_known_failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "relaykit/detector.hpp"
#include "relaykit/features/extract.hpp"
#include "relaykit/learn/bayes_opt.hpp"
#include "relaykit/learn/cv.hpp"
#include "relaykit/learn/metrics.hpp"
#include "relaykit/random.hpp"
#include "relaykit/relay/ar_rules.hpp"
#include "relaykit/relay/cascade.hpp"
#include "relaykit/relay/impedance.hpp"
#include "relaykit/synth.hpp"
#include "relaykit/txmodel.hpp"

using namespace relaykit;

namespace {

// 2: four published rows break the all-phase threshold rule; the rows are listed.
// 6: the noise-free AR(2) record decays within ~30 samples, so at 30 dB of its mean
//    square the remaining samples are noise and the fit is pulled toward zero.
const std::set<int> k_known_failures = {2, 6};

struct Outcome {
  bool ok;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

ThreePhaseRecord make_record(std::size_t n, const std::function<double(int, std::size_t)>& f, SamplingSpec spec = {}) {
  ThreePhaseRecord r;
  r.sampling = spec;
  for (int p = 0; p < 3; ++p) {
    r.phases[p].resize(n);
    for (std::size_t i = 0; i < n; ++i) r.phases[p][i] = f(p, i);
  }
  return r;
}

std::vector<double> random_signal(Rng& r, std::size_t n, double lo, double hi) {
  std::vector<double> x(n);
  for (auto& v : x) v = r.uniform(lo, hi);
  return x;
}

long uniform_int(Rng& r, long lo, long hi) { return lo + static_cast<long>(r.index(static_cast<std::uint64_t>(hi - lo + 1))); }

// --- 1 -----------------------------------------------------------------------

Outcome balanced_accuracy_arith() {
  const learn::Confusion c = {{2105, 2}, {0, 1852}};
  const double ba = 100 * learn::balanced_accuracy(c);
  const double rounded = std::round(ba * 100) / 100;
  return {rounded == 99.95, fmt("BA = %.4f%%", ba)};
}

// --- 2 -----------------------------------------------------------------------

using Row = relay::PhaseCoefficients;

struct Table {
  const char* name;
  std::vector<Row> rows;
  bool zone;      // phi_7 table
  int expect;     // Direction or Zone as int, per block of rows
};

std::vector<Table> published_tables() {
  using D = relay::Direction;
  using Z = relay::Zone;
  const int grid = static_cast<int>(D::grid_fed), dfig = static_cast<int>(D::dfig_fed);
  const int z1 = static_cast<int>(Z::zone1), z2 = static_cast<int>(Z::zone2);
  return {
      {"4-bus L2", {{.238, .268, .262}, {.212, .220, .212}, {-.178, -.209, -.227},
                    {.238, .268, .262}, {.212, .220, .212}, {-.178, -.209, -.227},
                    {.237, .267, .261}, {.212, .220, .212}, {-.180, -.211, -.229}}, false, grid},
      {"4-bus L4", {{-1.429, -1.258, -1.065}, {-2.157, -1.777, -1.417}, {-1.022, -1.676, -1.255},
                    {-1.439, -1.163, -1.086}, {-2.080, -1.693, -1.382}, {-1.001, -1.650, -1.198},
                    {-1.494, -1.214, -1.057}, {-2.082, -1.783, -1.475}, {-1.040, -1.628, -1.203}}, false, dfig},
      {"9-bus L2", {{.483, .307, .434}, {.495, .369, .436}, {.463, .403, .420},
                    {.482, .307, .435}, {.492, .368, .436}, {.451, .399, .421},
                    {.483, .306, .433}, {.493, .367, .435}, {.454, .398, .416}}, false, grid},
      {"9-bus L4", {{-1.868, -1.659, -1.331}, {-2.398, -2.237, -1.823}, {-2.192, -2.451, -1.788},
                    {-1.879, -1.645, -1.467}, {-2.195, -2.584, -1.771}, {-1.133, -1.583, -0.932},
                    {-1.936, -1.621, -1.333}, {-2.374, -2.136, -1.818}, {-2.168, -2.530, -1.734}}, false, dfig},
      {"39-bus L2", {{.206, .169, -.087}, {.250, .079, -.090}, {.032, -.082, -.176},
                     {.207, .170, -.087}, {.251, .080, -.091}, {.035, -.080, -.179},
                     {.207, .170, -.086}, {.252, .080, -.092}, {.036, -.079, -.178}}, false, grid},
      {"39-bus L4", {{-1.170, -0.667, -1.441}, {-2.270, -1.972, -2.047}, {-2.289, -2.287, -1.963},
                     {-1.266, -0.762, -1.506}, {-2.202, -1.930, -2.098}, {-2.239, -2.170, -1.826},
                     {-1.202, -0.708, -1.534}, {-2.244, -2.009, -2.072}, {-2.195, -2.231, -1.892}}, false, dfig},
      {"zone 1", {{1.141, .834, .799}, {1.036, .843, .814}, {1.066, .925, .828},
                  {.880, .953, 1.002}, {.775, .951, .901}, {.813, 1.090, .976},
                  {1.042, 1.152, .818}, {1.005, 1.154, .764}, {1.074, 1.165, .863}}, true, z1},
      {"zone 2", {{-.400, -.997, -.926}, {-.417, -.947, -.903}, {-.485, -.945, -.902},
                  {.123, -.906, -.828}, {-.366, -1.008, -.967}, {-.382, -1.004, -.961},
                  {-.417, -.947, -.903}, {.093, -.916, -.834}, {.159, -.917, -.839}}, true, z2},
  };
}

Outcome ar_tables() {
  relay::ArRelayConfig cfg;  // th1 -0.7, th2 -0.1
  int dir_rows = 0, zone_rows = 0;
  std::vector<std::string> wrong;
  for (const auto& t : published_tables()) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      const int got = t.zone ? static_cast<int>(relay::zone_from_phi7(r, cfg))
                             : static_cast<int>(relay::direction_from_phi2(r, cfg));
      (t.zone ? zone_rows : dir_rows)++;
      if (got != t.expect) wrong.push_back(fmt("%s row %zu (%.3f, %.3f, %.3f)", t.name, i + 1, r[0], r[1], r[2]));
    }
  }
  std::string d = fmt("%d direction + %d zone rows, %zu errors", dir_rows, zone_rows, wrong.size());
  for (const auto& w : wrong) d += "; " + w;
  return {wrong.empty(), d};
}

// --- 3 -----------------------------------------------------------------------

Outcome dwt_suite() {
  using namespace features;
  Rng rng(3);
  double worst_rec = 0, worst_parseval = 0;
  int wavelets = 0;
  for (auto name : supported_wavelets()) {
    ++wavelets;
    const auto& fb = filter_bank(name);
    const long F = static_cast<long>(fb.dec_lo.size());
    for (int k = 0; k < 100; ++k) {
      const long n = uniform_int(rng, std::max<long>(2 * F, 40), 400);
      const auto x = random_signal(rng, n, -5, 5);
      const int level = static_cast<int>(uniform_int(rng, 1, max_level(n, F)));
      for (auto mode : {ExtensionMode::symmetric, ExtensionMode::periodization}) {
        const auto c = dwt(x, WaveletSpec::parse(name, level), mode);
        const auto y = idwt(c, name, mode, n);
        for (long i = 0; i < n; ++i) worst_rec = std::max(worst_rec, std::abs(y[i] - x[i]));
      }
      if (!fb.orthogonal) continue;
      // Periodization pads odd lengths, so energy is only conserved when every
      // level halves evenly: n is drawn as a multiple of 2^level.
      const int pl = static_cast<int>(uniform_int(rng, 1, 4));
      const long step = 1L << pl;
      long pn = step * uniform_int(rng, (2 * F + step - 1) / step, 400 / step);
      while (max_level(pn, F) < pl) pn += step;
      const auto px = random_signal(rng, pn, -5, 5);
      const auto c = dwt(px, WaveletSpec::parse(name, pl), ExtensionMode::periodization);
      double ex = 0, ec = wavelet_energy(c.approx);
      for (double v : px) ex += v * v;
      for (const auto& dd : c.details) ec += wavelet_energy(dd);
      worst_parseval = std::max(worst_parseval, std::abs(ec - ex) / ex);
    }
  }
  return {worst_rec < 1e-8 && worst_parseval < 1e-10,
          fmt("%d wavelets x 100; max reconstruction error %.2e, max Parseval rel. error %.2e", wavelets, worst_rec,
              worst_parseval)};
}

// --- 4 -----------------------------------------------------------------------

Outcome max_level_check() {
  const int l = features::max_level(167, 8);
  return {l == 4, fmt("max_level(167, 8) = %d", l)};
}

// --- 5 -----------------------------------------------------------------------

Outcome feature_oracles() {
  using namespace features;
  Rng rng(5);
  long checks = 0, sampen_cases = 0;
  std::map<std::string, long> bad;
  double worst = 0;
  auto expect = [&](const char* what, double got, double want) {
    ++checks;
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    if (!close(got, want, 1e-9)) ++bad[what];
  };
  for (int k = 0; k < 1000; ++k) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 16, 64));
    const auto x = random_signal(rng, n, -3, 3);
    const double ql = 0.1 * static_cast<double>(uniform_int(rng, 0, 5));
    const double qh = std::min(1.0, ql + 0.1 * static_cast<double>(uniform_int(rng, 1, 10)));
    expect("change_quantile", change_quantile(x, ql, qh), oracle::o_change_quantile(x, ql, qh));
    const auto m = moments(x);
    const auto om = oracle::o_moments(x);
    expect("mean", m.mean, om.mean);
    expect("variance", m.variance, om.var);
    expect("kurtosis", m.excess_kurtosis.value_or(NAN), om.kurt);
    expect("cid", complexity_invariant_distance(x), oracle::o_cid(x));
    const double r = 0.2 * std::sqrt(om.var);
    if (const auto os = oracle::o_sampen(x, 2, r)) {
      ++sampen_cases;
      expect("sample_entropy", sample_entropy(x, 2, r), *os);
    }
    const long chunk = uniform_int(rng, 2, 15);
    const int attr = static_cast<int>(uniform_int(rng, 0, 2)), agg = static_cast<int>(uniform_int(rng, 0, 3));
    expect("linear_trend", linear_trend(x, chunk, static_cast<TrendAttr>(attr), static_cast<TrendAgg>(agg)),
           oracle::o_linear_trend(x, chunk, attr, agg));
    const auto X = fft_coefficients(x);
    const auto oX = oracle::o_dft(x);
    expect("fft_size", static_cast<double>(X.size()), static_cast<double>(oX.size()));
    for (std::size_t b = 0; b < std::min(X.size(), oX.size()); ++b) {
      expect("fft_real", X[b].real(), oX[b].real());
      expect("fft_imag", X[b].imag(), oX[b].imag());
    }
  }
  long total_bad = 0;
  std::string which;
  for (const auto& [name, count] : bad) {
    total_bad += count;
    which += fmt(" %s:%ld", name.c_str(), count);
  }
  return {total_bad == 0, fmt("%ld comparisons on 1000 signals (%ld with defined sample entropy), %ld mismatches%s; "
                              "max rel. difference %.2e",
                              checks, sampen_cases, total_bad, which.c_str(), worst)};
}

// --- 6 -----------------------------------------------------------------------

Outcome ar_recovery() {
  const double a1 = 0.75, a2 = -0.125;
  const std::size_t n = 200;
  std::vector<double> x(n);
  x[0] = 1.0;
  x[1] = 0.3;
  for (std::size_t t = 2; t < n; ++t) x[t] = a1 * x[t - 1] + a2 * x[t - 2];
  const auto clean = features::ar_fit(x, 2, false);
  const double clean_err = std::max(std::abs(clean.phi[0] - a1), std::abs(clean.phi[1] - a2));

  // Measurement noise at 30 dB of the record's mean square, via add_noise on a
  // record carrying the series in phase a.
  const auto rec = make_record(n, [&](int, std::size_t i) { return x[i]; });
  int within = 0;
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto noisy = add_noise(rec, 30.0, seed);
    const auto f = features::ar_fit(noisy.phases[0], 2, false);
    const double e = std::max(std::abs(f.phi[0] - a1), std::abs(f.phi[1] - a2));
    errs.push_back(e);
    within += e <= 0.05;
  }
  std::sort(errs.begin(), errs.end());
  return {clean_err <= 1e-6 && within >= 95,
          fmt("noise-free max error %.2e; 30 dB: %d/100 seeds within 0.05 (median error %.3f)", clean_err, within,
              errs[50])};
}

// --- 7 -----------------------------------------------------------------------

Outcome detector_steps() {
  const SamplingSpec spec;
  const double period = spec.sample_rate_hz / spec.nominal_freq_hz;
  const double w = 2 * std::numbers::pi / period;
  Rng rng(7);
  int late = 0, missed = 0, false_steady = 0;
  for (int k = 0; k < 100; ++k) {
    std::map<int, double> mix;
    for (int h = 2; h <= 9; ++h)
      if (rng.uniform() < 0.5) mix[h] = rng.uniform(0, 0.3);
    const double ph = rng.uniform(0, 2 * std::numbers::pi), amp = rng.uniform(0.1, 100);
    const double ratio = rng.uniform(2, 10);
    const long step = uniform_int(rng, 400, 800);
    auto wave = [&](bool stepped) {
      return make_record(1200, [&](int p, std::size_t i) {
        const double arg = w * static_cast<double>(i) + ph - 2 * std::numbers::pi * p / 3;
        double v = std::sin(arg);
        for (auto [h, f] : mix) v += f * std::sin(h * arg + 0.1 * h);
        return amp * v * (stepped && static_cast<long>(i) >= step ? ratio : 1.0);
      }, spec);
    };
    const auto steady = wave(false), stepped = wave(true);
    for (auto method : {detector::Method::ed, detector::Method::cdf}) {
      false_steady += detector::scan(steady, {}, method).triggered;
      const auto d = detector::scan(stepped, {}, method);
      if (!d.triggered) ++missed;
      else if (*d.trigger_index < step || static_cast<double>(*d.trigger_index - step) > period) ++late;
    }
  }
  return {late == 0 && missed == 0 && false_steady == 0,
          fmt("100 mixes x {ED, CDF}: %d missed, %d outside one cycle, %d steady false triggers", missed, late,
              false_steady)};
}

// --- 8, 9 --------------------------------------------------------------------

struct Split {
  std::vector<relay::EventRecord> train, test;
};

const std::vector<txmodel::CorpusItem>& corpus() {
  static const auto c = txmodel::generate_corpus(txmodel::default_corpus_classes(), 200, SamplingSpec(), 42, 1);
  return c;
}

Split split_corpus() {
  const auto& c = corpus();
  std::map<std::string, int> cls;
  std::vector<int> y;
  // Stratified on the full label so every fault type keeps 80% of its records.
  for (const auto& it : c) y.push_back(cls.emplace(it.scenario.label.str(), static_cast<int>(cls.size())).first->second);
  const auto folds = learn::stratified_folds(y, 5, 2024);
  std::vector<bool> held(c.size(), false);
  for (auto i : folds[0]) held[i] = true;
  Split s;
  for (std::size_t i = 0; i < c.size(); ++i) (held[i] ? s.test : s.train).push_back({c[i].current, c[i].voltage});
  return s;
}

std::optional<double> stage_ba(const std::vector<relay::StageEvaluation>& ev, const std::string& name) {
  for (const auto& e : ev)
    if (e.stage == name) return e.balanced_accuracy;
  return std::nullopt;
}

Outcome end_to_end() {
  const auto s = split_corpus();
  auto cfg = relay::default_cascade_config();
  cfg.capture_snr_db = 30;
  cfg.cv_folds = 0;
  cfg.seed = 7;
  const auto m = relay::build_cascade(s.train, cfg, 1);
  const auto ev = relay::evaluate_cascade(m, s.test, 99, 1);
  const auto det = stage_ba(ev, "detect"), dist = stage_ba(ev, "disturbance_type");
  std::string d = fmt("%zu records, %zu held out", corpus().size(), s.test.size());
  for (const auto& e : ev) d += fmt("; %s %.4f", e.stage.c_str(), e.balanced_accuracy.value_or(-1.0));
  return {det && dist && *det >= 0.95 && *dist >= 0.90, d};
}

Outcome noise_ordering() {
  const auto s = split_corpus();
  auto detect_at = [&](double snr) {
    auto cfg = relay::default_cascade_config();
    cfg.stages.resize(1);  // detect
    cfg.capture_snr_db = snr;
    cfg.cv_folds = 0;
    cfg.seed = 7;
    const auto m = relay::build_cascade(s.train, cfg, 1);
    return stage_ba(relay::evaluate_cascade(m, s.test, 99, 1), "detect").value_or(-1.0);
  };
  const double lo = detect_at(20), hi = detect_at(40);
  return {lo >= 0 && lo <= hi, fmt("detect BA %.4f at 20 dB, %.4f at 40 dB", lo, hi)};
}

// --- 10 ----------------------------------------------------------------------

Outcome bayes() {
  int ok = 0;
  std::string zs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    learn::BayesOptConfig c;
    c.n_init = 4;
    c.n_iter = 11;
    c.seed = seed;
    const auto r = learn::bayes_opt([](const std::vector<double>& z) { return -(z[0] - 0.33) * (z[0] - 0.33); },
                                    {learn::SearchAxis::real("z", 0, 1)}, c);
    ok += std::abs(r.best_z[0] - 0.33) <= 0.02;
    zs += fmt("%s%.4f", seed ? " " : "", r.best_z[0]);
  }
  return {ok == 10, fmt("%d/10 seeds within 0.02 (%s)", ok, zs.c_str())};
}

// --- 11 ----------------------------------------------------------------------

double max_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double e = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double s = std::max(std::abs(a(i, j)), std::abs(b(i, j)));
      if (s > 0) e = std::max(e, std::abs(a(i, j) - b(i, j)) / s);
    }
  return e;
}

Outcome winding_matrices() {
  Rng r(11);
  double w2 = 0, w3 = 0;
  for (int k = 0; k < 1000; ++k) {
    const txmodel::TwoWindingParams p{r.uniform(10, 1000), r.uniform(10, 500), r.uniform(10, 500),
                                      r.uniform() < 0.5 ? 50.0 : 60.0, r.uniform(0.001, 0.5), r.uniform(0.02, 0.3)};
    const double f1 = r.uniform(0, 100), f2 = r.uniform(0, 100);
    w2 = std::max(w2, max_rel_err(txmodel::two_winding_matrix(p, {f1, f2}).entries,
                                  oracle::script_two_winding(p.mva, p.v1, p.v2, p.f, p.im, p.xl, f1, f2)));
    const double a = r.uniform(0.01, 0.2), b = r.uniform(0.01, 0.2), c = r.uniform(0.0, 0.2);
    const txmodel::ThreeWindingParams q{r.uniform(10, 1000), r.uniform(10, 500), r.uniform(10, 500), r.uniform(10, 500),
                                        60.0, r.uniform(0.001, 0.5), a + b, a + c, b + c};
    const double g1 = r.uniform(0, 100), g2 = r.uniform(0, 100);
    w3 = std::max(w3, max_rel_err(txmodel::three_winding_matrix(q, g1, g2, g1).entries,
                                  oracle::script_three_winding(q.mva, q.v1, q.v2, q.v3, q.f, q.im, q.x12, q.x13,
                                                               q.x23, g1, g2)));
  }
  return {w2 <= 1e-12 && w3 <= 1e-12, fmt("1000 draws; max rel. error %.2e (2-winding), %.2e (3-winding)", w2, w3)};
}

// --- 12 ----------------------------------------------------------------------

Outcome impedance() {
  const double deg = std::numbers::pi / 180;
  const auto z1 = std::polar(0.189, 84.0 * deg), z0 = std::polar(1.06, 84.17 * deg);
  const auto k = relay::k0(z1, z0);
  // Oracle: (Z0/Z1 - 1)/3 with the quotient taken in polar form.
  const double qm = 1.06 / 0.189, qa = (84.17 - 84.0) * deg;
  const std::complex<double> ref((qm * std::cos(qa) - 1) / 3, qm * std::sin(qa) / 3);
  const double k_err = std::abs(k - ref) / std::abs(ref);

  relay::ImpedanceParams p;
  p.z1_per_km = z1;
  p.z0_per_km = z0;
  p.line_km = 100;
  p.ct_ratio = 400;
  p.vt_ratio = 1000;
  Rng r(12);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    // Phase-a-ground bolted fault: sequence networks in series, I1 = I2 = I0.
    const auto i0 = std::polar(r.uniform(0.5, 5), r.uniform(-3, 3));
    const double d = 0.8 * p.line_km;
    const auto va = d * (2.0 * p.z1_per_km + p.z0_per_km) * i0;
    const auto z = relay::measure_impedance(va, 3.0 * i0, i0, p);
    const double expect = 0.8 * p.line_km * std::abs(p.z1_per_km) * p.ratio();
    worst = std::max(worst, std::abs(std::abs(z) - expect) / expect);
  }
  return {k_err <= 1e-3 && worst <= 0.005,
          fmt("k0 = %.4f at %.3f deg, rel. error %.2e; 80%% reach worst rel. error %.2e", std::abs(k),
              std::arg(k) / deg, k_err, worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "balanced accuracy arithmetic", 1, balanced_accuracy_arith},
      {2, "AR coefficient tables", 1, ar_tables},
      {3, "DWT reconstruction and Parseval", 30, dwt_suite},
      {4, "max_level", 1, max_level_check},
      {5, "feature oracles", 60, feature_oracles},
      {6, "AR(2) recovery", 10, ar_recovery},
      {7, "ED/CDF step detection", 30, detector_steps},
      {8, "end-to-end cascade at 30 dB", 180, end_to_end},
      {9, "detect BA noise ordering", 600, noise_ordering},
      {10, "Bayesian optimization", 10, bayes},
      {11, "winding inductance matrices", 10, winding_matrices},
      {12, "k0 and zone-1 reach", 5, impedance},
  };
  int unexpected = 0, failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.ok && in_time;
    const bool known = k_known_failures.count(c.id) > 0;
    if (!pass) {
      ++failed;
      unexpected += !known;
    }
    std::printf("%s  #%-2d %s: %s [%.2f s, budget %.0f s]%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, !pass && known ? " (known)" : (!in_time ? " (over budget)" : ""));
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d passed, %d failed (%d unexpected)\n", all.size(), static_cast<int>(all.size()) - failed,
              failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
