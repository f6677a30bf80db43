#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "helpers.hpp"
#include "relaykit/relay/ar_rules.hpp"
#include "relaykit/relay/cascade.hpp"
#include "relaykit/relay/impedance.hpp"
#include "relaykit/synth.hpp"

using namespace relaykit;
using namespace relaykit::relay;
using Catch::Approx;

namespace {

std::vector<EventRecord> as_events(const std::vector<txmodel::CorpusItem>& items) {
  std::vector<EventRecord> out;
  for (const auto& it : items) out.push_back({it.current, it.voltage});
  return out;
}

std::vector<txmodel::CorpusClass> pick(const std::vector<std::string>& names) {
  std::vector<txmodel::CorpusClass> out;
  for (const auto& c : txmodel::default_corpus_classes())
    if (std::find(names.begin(), names.end(), c.name) != names.end()) out.push_back(c);
  return out;
}

learn::ModelSpec small_boost() { return {learn::Family::gradient_boosting, {{"n_stages", 40}, {"max_depth", 3}}}; }

CascadeConfig two_stage() {
  auto c = default_cascade_config();
  c.stages = {c.stages[0], c.stages[5]};
  for (auto& s : c.stages) s.model = small_boost();
  c.cv_folds = 3;
  c.seed = 11;
  return c;
}

// Polar-form complex helpers written out by hand for the k0 oracle.
struct Polar {
  double mag, deg;
};
Polar polar_div(Polar a, Polar b) { return {a.mag / b.mag, a.deg - b.deg}; }

// AR(2) series driven by unit innovations, with the given coefficients.
ThreePhaseRecord ar_record(double a1, double a2, std::uint64_t seed, double scale = 1.0) {
  Rng r(seed);
  return testutil::make_record(3000, [&, x1 = 0.0, x2 = 0.0](int, std::size_t i) mutable {
    if (i == 0) x1 = x2 = 0.0;
    const double x = a1 * x1 + a2 * x2 + r.normal();
    x2 = x1;
    x1 = x;
    return scale * x;
  });
}

}  // namespace

TEST_CASE("direction rule on published coefficient rows") {
  CHECK(direction_from_phi2({-1.429, -1.258, -1.065}) == Direction::dfig_fed);
  CHECK(direction_from_phi2({0.238, 0.268, 0.262}) == Direction::grid_fed);
  CHECK(direction_from_phi2({-0.7, -0.7, -0.7}) == Direction::dfig_fed);
  CHECK(direction_from_phi2({-0.7, -0.7, -0.69}) == Direction::grid_fed);
}

TEST_CASE("zone rule on published coefficient rows") {
  CHECK(zone_from_phi7({1.141, 0.834, 0.799}) == Zone::zone1);
  CHECK(zone_from_phi7({-0.400, -0.997, -0.926}) == Zone::zone2);
  CHECK(zone_from_phi7({-0.1, -0.1, -0.1}) == Zone::zone2);
  ArRelayConfig c;
  c.th2 = 0.2;
  CHECK(zone_from_phi7({0.123, -0.906, -0.828}, c) == Zone::zone2);
}

TEST_CASE("AR relay fits recover driven AR(2) coefficients") {
  const auto fits = phase_ar(ar_record(1.0, -0.9, 3), {});
  for (const auto& f : fits) {
    CHECK(f.phi.size() == 10);
    CHECK(f.phi[1] == Approx(-0.9).margin(0.08));
  }
  CHECK(ar_direction(ar_record(1.0, -0.9, 3)) == Direction::dfig_fed);
  CHECK(ar_direction(ar_record(0.5, 0.2, 4)) == Direction::grid_fed);
}

TEST_CASE("AR relay decisions are scale invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = ar_record(0.6, -0.5 - 0.05 * static_cast<double>(seed), seed);
    const auto b = ar_record(0.6, -0.5 - 0.05 * static_cast<double>(seed), seed, 250.0);
    CHECK(ar_direction(a) == ar_direction(b));
    CHECK(ar_zone(a) == ar_zone(b));
    const auto fa = phase_ar(a, {}), fb = phase_ar(b, {});
    for (int p = 0; p < 3; ++p)
      for (int k = 0; k < 10; ++k) CHECK(fa[p].phi[k] == Approx(fb[p].phi[k]).margin(1e-9));
  }
}

TEST_CASE("AR relay argument checks") {
  ArRelayConfig c;
  c.lag = 4;
  CHECK_THROWS_AS(phase_ar(testutil::sinusoid(100), c), ConfigError);
  CHECK_THROWS_AS(phase_ar(testutil::sinusoid(11), {}), DataError);
}

TEST_CASE("zero-sequence compensation factor") {
  CHECK(k0({0.3, 0.4}, {0.3, 0.4}) == std::complex<double>(0, 0));
  const auto z1 = std::polar(0.189, 84.0 * std::numbers::pi / 180);
  const auto z0 = std::polar(1.06, 84.17 * std::numbers::pi / 180);
  const auto k = k0(z1, z0);
  // (Z0/Z1 - 1) / 3 with the division done in polar form.
  const Polar q = polar_div({1.06, 84.17}, {0.189, 84.0});
  const double re = q.mag * std::cos(q.deg * std::numbers::pi / 180) - 1, im = q.mag * std::sin(q.deg * std::numbers::pi / 180);
  const double mag = std::hypot(re, im) / 3, ang = std::atan2(im, re) * 180 / std::numbers::pi;
  CHECK(std::abs(k) == Approx(mag).epsilon(1e-3));
  CHECK(std::arg(k) * 180 / std::numbers::pi == Approx(ang).epsilon(1e-3));
  CHECK(std::abs(k) == Approx(1.536).margin(0.01));
  CHECK(std::arg(k) * 180 / std::numbers::pi == Approx(0.21).margin(0.01));
  CHECK_THROWS_AS(k0({0, 0}, {1, 1}), ConfigError);
}

TEST_CASE("bolted ground fault at 80 percent measures 80 percent of the line") {
  ImpedanceParams p;
  p.z1_per_km = std::polar(0.189, 84.0 * std::numbers::pi / 180);
  p.z0_per_km = std::polar(1.06, 84.17 * std::numbers::pi / 180);
  p.line_km = 100;
  p.ct_ratio = 400;
  p.vt_ratio = 1000;
  Rng r(5);
  for (int k = 0; k < 20; ++k) {
    const std::complex<double> i1 = std::polar(r.uniform(0.5, 5), r.uniform(-3, 3));
    const auto i2 = i1, i0 = i1;  // phase-a-ground sequence network in series
    const double d = 0.8 * p.line_km;
    const auto va = d * (p.z1_per_km * i1 + p.z1_per_km * i2 + p.z0_per_km * i0);
    const auto z = measure_impedance(va, i1 + i2 + i0, i0, p);
    CHECK(std::abs(z) == Approx(0.8 * p.line_km * std::abs(p.z1_per_km) * p.ratio()).epsilon(0.005));
  }
  ImpedanceParams homog = p;
  homog.z0_per_km = homog.z1_per_km;
  const std::complex<double> v{100, 20}, i{3, -1};
  CHECK(std::abs(measure_impedance(v, i, {0.7, 0.1}, homog) - v / i * homog.ratio()) < 1e-12);
  CHECK_THROWS_AS(measure_impedance(v, {0, 0}, {0, 0}, p), DataError);
}

TEST_CASE("zone characteristics") {
  for (auto shape : {ZoneShape::mho_circle, ZoneShape::quadrilateral}) {
    ImpedanceParams p;
    p.z1_per_km = std::polar(0.3, 80.0 * std::numbers::pi / 180);
    p.line_km = 50;
    p.shape = shape;
    const auto zr1 = zone_reach(p, 1);
    CHECK(in_zone({0, 0}, p, 1));
    CHECK_FALSE(in_zone(zr1 * 1.01, p, 1));
    CHECK(in_zone(zr1 * 1.01, p, 2));
    CHECK(in_zone(zr1 * 0.99, p, 1));
    const double m = std::abs(zr1);
    CHECK_FALSE(in_zone({0, -0.1 * m}, p, 1));
    CHECK_FALSE(in_zone({0.3 * m, -0.3 * m}, p, 2));
    CHECK_THROWS_AS(zone_reach(p, 3), ConfigError);
  }
  CHECK(parse_zone_shape("mho") == ZoneShape::mho_circle);
  CHECK_THROWS_AS(parse_zone_shape("lens"), ConfigError);
}

TEST_CASE("stage targets") {
  StageSpec s;
  s.kind = StageKind::detect;
  CHECK(stage_target(s, TransientLabel::parse("internal_fault/ispar_series/wa-g")) == "internal_fault");
  CHECK(stage_target(s, TransientLabel::parse("ferroresonance")) == "disturbance");
  CHECK_FALSE(stage_target(s, TransientLabel::parse("power_swing/stable/symmetrical")));
  s.kind = StageKind::fault_type;
  s.unit = FaultUnit::ispar_series;
  CHECK(stage_target(s, TransientLabel::parse("internal_fault/ispar_series/t-t")) == "t-t");
  CHECK_FALSE(stage_target(s, TransientLabel::parse("internal_fault/power_transformer/t-t")));
  s.kind = StageKind::swing_symmetry;
  s.unit.reset();
  CHECK(stage_target(s, TransientLabel::parse("power_swing/unstable/asymmetrical")) == "asymmetrical");
  CHECK(class_order(StageSpec{"d", StageKind::disturbance_type}).size() == 7);
}

TEST_CASE("cascade config validation") {
  auto c = default_cascade_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.stages.size() == 6);
  auto dup = c;
  dup.stages[1].name = "detect";
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  auto role = c;
  role.stages[1] = role.stages[0];
  role.stages[1].name = "detect2";
  CHECK_THROWS_AS(role.validate(), ConfigError);
  auto unit = c;
  unit.stages[2].unit.reset();
  CHECK_THROWS_AS(unit.validate(), ConfigError);
  auto folds = c;
  folds.cv_folds = 1;
  CHECK_THROWS_AS(folds.validate(), ConfigError);
  auto shortcap = c;
  shortcap.stages[0].post_cycles = 0.25;
  shortcap.stages[0].pre_cycles = 0.25;
  CHECK_THROWS_AS(shortcap.validate(), ConfigError);
  const auto back = cascade_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK(to_json(cascade_config_from_json(to_json(swing_cascade_config()))) == to_json(swing_cascade_config()));
}

TEST_CASE("two-stage event cascade trains, classifies and round-trips") {
  const auto classes = pick({"internal_fault/power_transformer", "internal_fault/ispar_series", "magnetizing_inrush",
                             "ferroresonance", "capacitor_switching"});
  const auto train = as_events(txmodel::generate_corpus(classes, 24, SamplingSpec(), 100));
  const auto cfg = two_stage();
  const auto model = build_cascade(train, cfg);
  REQUIRE(model.stages.size() == 2);
  for (const auto& s : model.stages) {
    REQUIRE(s.cv_score);
    CHECK(*s.cv_score >= 0.0);
    CHECK(*s.cv_score <= 1.0);
  }
  CHECK(model.stages[0].class_names == std::vector<std::string>{"internal_fault", "disturbance"});

  // Fresh records from another seed.
  const auto test = txmodel::generate_corpus(classes, 6, SamplingSpec(), 200);
  int fault_ok = 0, inrush_ok = 0, faults = 0, inrushes = 0;
  for (const auto& it : test) {
    const auto d = classify_event(model, it.current);
    if (it.scenario.label.category == Category::internal_fault) {
      ++faults;
      fault_ok += d.verdict == Verdict::trip && d.category == "internal_fault";
    } else if (it.scenario.label.category == Category::magnetizing_inrush) {
      ++inrushes;
      inrush_ok += d.verdict == Verdict::restrain && d.category == "magnetizing_inrush";
    }
  }
  // Small training set; winding-to-ground series faults are the usual misses.
  CHECK(fault_ok >= faults - 2);
  CHECK(inrush_ok >= inrushes - 1);

  CHECK(classify_event(model, testutil::sinusoid(1002)).verdict == Verdict::no_event);
  CHECK(to_json(classify_event(model, testutil::sinusoid(1002)))["verdict"] == "no_event");

  const auto j = nlohmann::json::parse(to_json(model).dump());
  const auto back = cascade_model_from_json(j);
  for (const auto& it : test) {
    const auto a = classify_event(model, it.current), b = classify_event(back, it.current);
    CHECK(to_json(a) == to_json(b));
  }

  const auto ev = evaluate_cascade(model, train, 7);
  REQUIRE(ev.size() == 2);
  for (const auto& e : ev) {
    REQUIRE(e.balanced_accuracy);
    double s = 0;
    int used = 0;
    for (const auto& r : e.recall)
      if (r) s += *r, ++used;
    CHECK(*e.balanced_accuracy == Approx(s / used).margin(1e-12));
  }

  auto bad = j;
  bad["version"] = 99;
  CHECK_THROWS_AS(cascade_model_from_json(bad), ModelError);
  bad = j;
  bad["format"] = "other";
  CHECK_THROWS_AS(cascade_model_from_json(bad), ModelError);
  bad = j;
  bad["stages"][0]["feature_names"].erase(0);
  try {
    cascade_model_from_json(bad);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("detect") != std::string::npos);
  }
  bad = j;
  bad["config"]["stages"][0]["features"]["set"] = "td5";
  CHECK_THROWS_AS(cascade_model_from_json(bad), ModelError);
}

TEST_CASE("cascade training rejects thin or mismatched corpora") {
  const auto classes = pick({"internal_fault/power_transformer", "ferroresonance", "capacitor_switching"});
  const auto few = as_events(txmodel::generate_corpus(classes, 4, SamplingSpec(), 1));
  CHECK_THROWS_AS(build_cascade(few, two_stage()), DataError);
  auto other = as_events(txmodel::generate_corpus(classes, 12, SamplingSpec(5000, 60), 1));
  CHECK_THROWS_AS(build_cascade(other, two_stage()), DataError);
}

TEST_CASE("swing cascade separates faults from unstable swings") {
  const auto classes = pick({"internal_fault/power_transformer", "power_swing/stable", "power_swing/unstable",
                             "fault_during_swing"});
  auto cfg = swing_cascade_config();
  for (auto& s : cfg.stages) s.model = small_boost();
  cfg.cv_folds = 0;
  const auto model = build_cascade(as_events(txmodel::generate_corpus(classes, 30, SamplingSpec(), 300)), cfg);
  CHECK_FALSE(model.stages[0].cv_score);
  const auto test = txmodel::generate_corpus(classes, 6, SamplingSpec(), 400);
  int faults = 0, fault_ok = 0, unstable = 0, unstable_ok = 0;
  for (const auto& it : test) {
    const auto d = classify_swing_record(model, it.current, it.voltage);
    const auto& l = it.scenario.label;
    if (l.category == Category::internal_fault) {
      ++faults;
      fault_ok += d.verdict == Verdict::trip;
    } else if (l.category == Category::power_swing && l.swing->stability == Stability::unstable) {
      ++unstable;
      unstable_ok += d.verdict == Verdict::block && d.stability == "unstable";
    }
  }
  // Small training set; winding-to-ground series faults are the usual misses.
  CHECK(fault_ok >= faults - 2);
  CHECK(unstable_ok >= unstable - 1);
  const auto steady = testutil::sinusoid(3000);
  CHECK(classify_swing_record(model, steady, steady).verdict == Verdict::no_event);
  CHECK_THROWS_AS(classify_swing_record(model, steady, std::nullopt), DataError);
}
