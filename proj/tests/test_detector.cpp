#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "relaykit/detector.hpp"
#include "relaykit/synth.hpp"

using namespace relaykit;
using namespace relaykit::detector;
using Catch::Approx;

namespace {

// Direct evaluation of the two-cycle indices with plain loops.
double oracle_index(const std::vector<double>& x, long tau, long nc, bool ed) {
  double cur = 0, prev = 0;
  for (long i = tau - nc + 1; i <= tau; ++i) cur += std::abs(x[i]);
  for (long i = tau - 2 * nc + 1; i <= tau - nc; ++i) prev += std::abs(x[i]);
  if (ed) return cur == 0 ? 0.0 : (cur - prev) / cur;
  return prev == 0 ? (cur - prev) / 1e-30 : (cur - prev) / prev;
}

ThreePhaseRecord step_record(std::size_t n, long step_at, double ratio, double phase, const std::map<int, double>& mix = {}) {
  const double w = 2 * std::numbers::pi * 60 / 10000;
  return testutil::make_record(n, [&](int p, std::size_t i) {
    const double arg = w * static_cast<double>(i) + phase - 2 * std::numbers::pi * p / 3;
    double v = std::sin(arg);
    for (auto [h, f] : mix) v += f * std::sin(h * arg);
    return static_cast<long>(i) >= step_at ? ratio * v : v;
  });
}

}  // namespace

TEST_CASE("capture lengths use the exact period") {
  CHECK(capture_lengths(SamplingSpec(), 0.5, 1.0).total() == 250);
  CHECK(capture_lengths(SamplingSpec(), 0.5, 1.0).pre == 83);
  CHECK(capture_lengths(SamplingSpec(), 0.0, 1.0).total() == 167);
  CHECK(capture_lengths(SamplingSpec(), 0.5, 2.5).total() == 500);
}

TEST_CASE("index traces match the brute-force formulas") {
  const auto r = step_record(1000, 500, 3.0, 0.4);
  const long nc = 167;
  for (bool ed : {true, false}) {
    const auto res = ed ? ed_scan(r) : cdf_scan(r);
    for (long tau = 2 * nc - 1; tau < 1000; tau += 7)
      for (int p = 0; p < 3; ++p) CHECK(res.index_trace[p][tau] == Approx(oracle_index(r.phases[p], tau, nc, ed)).margin(1e-12));
  }
}

TEST_CASE("steady sinusoids never trigger") {
  for (double amp : {1e-6, 1.0, 1e4}) {
    const auto r = testutil::sinusoid(2000, amp, 0.3);
    CHECK_FALSE(ed_scan(r).triggered);
    CHECK_FALSE(cdf_scan(r).triggered);
  }
}

TEST_CASE("all-zero record does not trigger and does not throw") {
  const auto r = testutil::make_record(600, [](int, std::size_t) { return 0.0; });
  CHECK_FALSE(ed_scan(r).triggered);
  CHECK_FALSE(cdf_scan(r).triggered);
}

TEST_CASE("short records are rejected") {
  CHECK_THROWS_AS(ed_scan(testutil::sinusoid(300)), DataError);
  CHECK_THROWS_AS(cdf_scan(testutil::sinusoid(333)), DataError);
}

TEST_CASE("a 1 to 10 step triggers within one cycle") {
  const long s = 600;
  const auto r = step_record(1200, s, 10.0, 1.1);
  for (const auto& res : {ed_scan(r), cdf_scan(r)}) {
    REQUIRE(res.triggered);
    CHECK(*res.trigger_index >= s);
    CHECK(*res.trigger_index <= s + 167);
    CHECK(*res.trigger_index >= 167);
  }
}

TEST_CASE("step in the final half cycle lacks lookahead") {
  const auto r = step_record(1000, 1000 - 60, 4.0, 0.2);
  const auto res = cdf_scan(r);
  CHECK_FALSE(res.triggered);
  CHECK_FALSE(res.trigger_index.has_value());
}

TEST_CASE("index traces are scale invariant") {
  const auto r = step_record(900, 450, 2.5, 0.9, {{3, 0.2}});
  auto s = r;
  for (auto& ph : s.phases)
    for (auto& v : ph) v *= 37.5;
  for (bool ed : {true, false}) {
    const auto a = ed ? ed_scan(r) : cdf_scan(r);
    const auto b = ed ? ed_scan(s) : cdf_scan(s);
    for (int p = 0; p < 3; ++p)
      for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(std::abs(a.index_trace[p][i] - b.index_trace[p][i]) <= 1e-10 * std::max(1.0, std::abs(a.index_trace[p][i])));
  }
}

TEST_CASE("harmonic mixes with cycle-divisible periods never trigger") {
  // 6 kHz / 60 Hz keeps every harmonic period an exact divisor of the cycle.
  const SamplingSpec spec(6000, 60);
  Rng r(17);
  for (int k = 0; k < 100; ++k) {
    std::map<int, double> mix;
    for (int h = 2; h <= 9; ++h)
      if (r.uniform() < 0.5) mix[h] = r.uniform(0, 0.5);
    const double ph = r.uniform(0, 6.3), amp = r.uniform(0.1, 100);
    const double w = 2 * std::numbers::pi / 100;
    const auto rec = testutil::make_record(
        800,
        [&](int p, std::size_t i) {
          const double arg = w * static_cast<double>(i) + ph - 2 * std::numbers::pi * p / 3;
          double v = std::sin(arg);
          for (auto [h, f] : mix) v += f * std::sin(h * arg + 0.1 * h);
          return amp * v;
        },
        spec);
    CHECK_FALSE(ed_scan(rec).triggered);
    CHECK_FALSE(cdf_scan(rec).triggered);
  }
}

TEST_CASE("trigger phase priority is a before b before c") {
  const long s = 500;
  const auto r = testutil::make_record(1000, [&](int, std::size_t i) {
    const double v = std::sin(2 * std::numbers::pi * 60 / 10000 * static_cast<double>(i));
    return static_cast<long>(i) >= s ? 5 * v : v;
  });
  const auto res = ed_scan(r);
  REQUIRE(res.triggered);
  CHECK(*res.trigger_phase == 0);
}

TEST_CASE("capture windows around the trigger") {
  const auto r = step_record(1200, 600, 5.0, 0.0);
  const auto det = cdf_scan(r);
  REQUIRE(det.triggered);
  const auto c = capture(r, det, {});
  CHECK(c.size() == 250);
  CHECK(c.phases[0][83] == r.phases[0][*det.trigger_index]);
  DetectorConfig post_only;
  post_only.pre_cycles = 0.0;
  CHECK(capture(r, det, post_only).size() == 167);

  DetectionResult fake;
  fake.triggered = true;
  fake.trigger_index = 80;
  CHECK_THROWS_AS(capture(r, fake, {}), DataError);
  CHECK_THROWS_AS(capture(r, DetectionResult{}, {}), DataError);
}

TEST_CASE("quiescent synthesized scenarios never trigger") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rec = txmodel::synthesize(txmodel::steady_scenario(0.2 + 0.1 * static_cast<double>(seed), seed), SamplingSpec(), 6);
    CHECK_FALSE(ed_scan(rec).triggered);
    CHECK_FALSE(cdf_scan(rec).triggered);
  }
}

TEST_CASE("detector config validation") {
  DetectorConfig c;
  c.alpha = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.post_cycles = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_method("ed") == Method::ed);
  CHECK_THROWS_AS(parse_method("x"), ConfigError);
}
