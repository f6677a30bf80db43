#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "relaykit/synth.hpp"
#include "relaykit/waveform.hpp"

using namespace relaykit;
using Catch::Approx;

TEST_CASE("sampling spec derives samples per cycle by rounding") {
  CHECK(SamplingSpec(10000, 60).samples_per_cycle() == 167);
  CHECK(SamplingSpec(5000, 60).samples_per_cycle() == 83);
  CHECK(SamplingSpec(1920, 60).samples_per_cycle() == 32);
  CHECK_THROWS_AS(SamplingSpec(100, 60), ConfigError);   // below Nyquist
  CHECK_THROWS_AS(SamplingSpec(400, 60), ConfigError);   // under 8 samples per cycle
  CHECK_THROWS_AS(SamplingSpec(-1, 60), ConfigError);
}

TEST_CASE("cycle_count") {
  CHECK(cycle_count(SamplingSpec(10000, 60), 0.05) == 3);
  CHECK(cycle_count(SamplingSpec(10000, 60), 0.0) == 0);
  CHECK(cycle_count(SamplingSpec(5000, 60), 1.0 / 60) == 1);
  CHECK(cycle_count(SamplingSpec(10000, 50), 0.1) == 5);
  CHECK_THROWS_AS(cycle_count(SamplingSpec(), -0.1), ConfigError);
}

TEST_CASE("labels round trip through their string form") {
  for (const char* s : {"internal_fault/power_transformer/wa-g", "internal_fault/ispar_exciting/t-t",
                        "fault_during_swing/power_transformer/3-ph-g", "power_swing/unstable/asymmetrical",
                        "ferroresonance", "magnetizing_inrush"}) {
    CHECK(TransientLabel::parse(s).str() == s);
  }
  CHECK_THROWS_AS(TransientLabel::parse("internal_fault"), DataError);
  CHECK_THROWS_AS(TransientLabel::parse("ferroresonance/stable/symmetrical"), DataError);
  CHECK_THROWS_AS(TransientLabel::parse("lightning"), DataError);
}

TEST_CASE("label detail presence is enforced") {
  TransientLabel l;
  l.category = Category::internal_fault;
  CHECK_THROWS_AS(l.validate(), DataError);
  l.fault = FaultDetail{FaultUnit::ispar_series, FaultType::ph3};
  CHECK_NOTHROW(l.validate());
  l.swing = SwingDetail{};
  CHECK_THROWS_AS(l.validate(), DataError);
}

TEST_CASE("record validation") {
  auto r = testutil::sinusoid(10);
  CHECK_NOTHROW(r.validate());
  r.phases[1].pop_back();
  CHECK_THROWS_AS(r.validate(), DataError);
  r = testutil::sinusoid(10);
  r.phases[2][3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(r.validate(), DataError);
}

TEST_CASE("window slices exactly and keeps metadata") {
  auto r = testutil::sinusoid(1000);
  r.label = TransientLabel::parse("ferroresonance");
  r.meta["k"] = "v";
  CHECK(window(r, 0, 1000) == r);
  CHECK_THROWS_AS(window(r, 999, 2), DataError);
  CHECK_THROWS_AS(window(r, -1, 2), DataError);

  auto s = testutil::sinusoid(500);
  const auto w = window(s, 167, 167);
  REQUIRE(w.size() == 167);
  for (int p = 0; p < 3; ++p)
    for (std::size_t i = 0; i < 167; ++i) CHECK(w.phases[p][i] == s.phases[p][167 + i]);
  CHECK(w.sampling == s.sampling);
}

TEST_CASE("add_noise hits the requested SNR per phase") {
  const auto r = testutil::sinusoid(2000, 1.0);
  for (double snr : {10.0, 20.0, 30.0, 40.0}) {
    const auto n = add_noise(r, snr, 7);
    for (int p = 0; p < 3; ++p) {
      double ps = 0, pn = 0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        ps += r.phases[p][i] * r.phases[p][i];
        pn += (n.phases[p][i] - r.phases[p][i]) * (n.phases[p][i] - r.phases[p][i]);
      }
      CHECK(10 * std::log10(ps / pn) == Approx(snr).margin(0.5));
    }
  }
}

TEST_CASE("add_noise at 20 dB on a unit sinusoid has variance near 0.005") {
  const auto r = testutil::sinusoid(5010, 1.0);  // whole cycles, so signal power is 0.5
  const auto n = add_noise(r, 20, 3);
  double pn = 0;
  for (std::size_t i = 0; i < r.size(); ++i) pn += std::pow(n.phases[0][i] - r.phases[0][i], 2);
  CHECK(pn / static_cast<double>(r.size()) == Approx(0.005).epsilon(0.02));
}

TEST_CASE("add_noise at 40 dB moves RMS by under 2 percent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = testutil::sinusoid(600, 1.0 + static_cast<double>(seed), 0.1 * static_cast<double>(seed));
    const auto n = add_noise(r, 40, seed);
    for (int p = 0; p < 3; ++p) {
      const double a = std::sqrt(mean_square(r.phases[p])), b = std::sqrt(mean_square(n.phases[p]));
      CHECK(std::abs(b - a) / a < 0.02);
    }
  }
}

TEST_CASE("add_noise is deterministic and handles the infinite sentinel") {
  const auto r = testutil::sinusoid(300);
  CHECK(add_noise(r, 25, 11) == add_noise(r, 25, 11));
  CHECK_FALSE(add_noise(r, 25, 11) == add_noise(r, 25, 12));
  CHECK(add_noise(r, std::numeric_limits<double>::infinity(), 1) == r);
  auto z = r;
  z.phases[1].assign(z.size(), 0.0);
  CHECK_THROWS_AS(add_noise(z, 30, 1), DataError);
}

TEST_CASE("CSV writer emits a header for an empty list and one row per sample") {
  std::ostringstream os;
  write_csv(os, {});
  CHECK(os.str() == "t,pa,pb,pc,label\n");

  auto r = testutil::make_record(3, [](int p, std::size_t i) { return p + 0.5 * static_cast<double>(i); });
  std::ostringstream os2;
  write_csv(os2, {r});
  const auto text = os2.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.rfind("t,pa,pb,pc,label\n0,0,1,2,\n", 0) == 0);
}

TEST_CASE("CSV round trip of a synthesized corpus is lossless") {
  const auto dir = std::filesystem::temp_directory_path() / "relaykit_test_waveform";
  std::filesystem::create_directories(dir);
  auto classes = txmodel::default_corpus_classes();
  const auto items = txmodel::generate_corpus(classes, 9, SamplingSpec(), 5);  // 108 records
  std::vector<ThreePhaseRecord> recs;
  for (const auto& it : items) {
    auto c = it.current;
    c.meta.clear();  // meta is not serialized
    recs.push_back(c);
  }
  write_csv(recs, dir / "c.csv");
  const auto back = read_csv(dir / "c.csv");
  REQUIRE(back.size() == recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(back[k].label == recs[k].label);
    REQUIRE(back[k].size() == recs[k].size());
    for (int p = 0; p < 3; ++p)
      for (std::size_t i = 0; i < recs[k].size(); ++i) {
        const double a = recs[k].phases[p][i], b = back[k].phases[p][i];
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
      }
  }
  const auto sc = read_sidecar(dir / "c.csv");
  CHECK(sc.kind == RecordKind::current);
  CHECK(sc.sampling == SamplingSpec());
  CHECK(sc.units == "A");
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV reader reports the offending line") {
  CsvSidecar sc;
  auto expect_error = [&](const std::string& text, const std::string& needle) {
    std::istringstream is(text);
    try {
      read_csv(is, sc);
      FAIL("no error for: " << text);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("t,a,b,c,label\n", "line 1");
  expect_error("t,pa,pb,pc,label\n0,1,2,3,\n0.1,1,2,\n", "line 3");
  expect_error("t,pa,pb,pc,label\n0,1,2,3,\n0.1,1,nan,3,\n", "line 3");
  expect_error("t,pa,pb,pc,label\n0,1,2,x,\n", "line 2");
  expect_error("t,pa,pb,pc,label\n0,1,2,3,ferroresonance\n0.1,1,2,3,magnetizing_inrush\n", "line 3");
}

TEST_CASE("CSV reader splits records at time resets and accepts empty labels") {
  std::istringstream is("t,pa,pb,pc,label\n0,1,1,1,\n0.1,2,2,2,\n0,3,3,3,ferroresonance\n0.1,4,4,4,ferroresonance\n");
  const auto recs = read_csv(is, CsvSidecar{});
  REQUIRE(recs.size() == 2);
  CHECK_FALSE(recs[0].label.has_value());
  CHECK(recs[1].label->category == Category::ferroresonance);
  CHECK(recs[1].phases[2][1] == 4);
}
