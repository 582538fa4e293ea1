#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "faastrace/workload.h"

using namespace faastrace;

namespace {

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double lag1(const std::vector<double>& x) {
  const double m = mean_of(x);
  double num = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) num += (x[i] - m) * (x[i + 1] - m);
  return num / (static_cast<double>(x.size()) * variance_of(x));
}

std::vector<double> as_double(const SecondSeries& s) { return {s.rates.begin(), s.rates.end()}; }

}  // namespace

TEST_CASE("fGn moments and correlation") {
  const auto x = generate_fgn(1 << 16, 0.8, 3);
  CHECK(x.size() == (1u << 16));
  CHECK(std::abs(mean_of(x)) < 0.2);
  CHECK(variance_of(x) == doctest::Approx(1.0).epsilon(0.1));
  // Lag-one autocorrelation of fGn is 2^(2H-1) - 1.
  CHECK(lag1(x) == doctest::Approx(std::pow(2.0, 0.6) - 1.0).epsilon(0.05));
  CHECK(generate_fgn(1000, 0.8, 3) == generate_fgn(1000, 0.8, 3));
  CHECK(generate_fgn(1000, 0.8, 3) != generate_fgn(1000, 0.8, 4));
  CHECK(generate_fgn(1, 0.5, 1).size() == 1);
}

TEST_CASE("Hosking generator agrees in distribution") {
  const auto x = generate_fgn_hosking(4096, 0.7, 11);
  CHECK(variance_of(x) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(lag1(x) == doctest::Approx(std::pow(2.0, 0.4) - 1.0).epsilon(0.1));
  CHECK_THROWS_AS(generate_fgn_hosking((1u << 15) + 1, 0.7, 1), std::length_error);
}

TEST_CASE("fGn argument checks") {
  CHECK_THROWS_AS(generate_fgn(0, 0.8, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_fgn(10, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_fgn(10, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_fgn(kMaxFgnLength + 1, 0.8, 1), std::length_error);
}

TEST_CASE("R/S Hurst estimate") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double h = estimate_hurst(generate_fgn(1 << 14, 0.8, seed));
    hits += (h > 0.7 && h < 0.9) ? 1 : 0;
  }
  CHECK(hits >= 9);
  const double white = estimate_hurst(generate_fgn(1 << 14, 0.5, 1));
  CHECK(white == doctest::Approx(0.55).epsilon(0.15));
  CHECK_THROWS_AS(estimate_hurst(std::vector<double>(100, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_hurst(std::vector<double>(1024, 1.0)), std::invalid_argument);
}

TEST_CASE("largest_remainder") {
  CHECK(largest_remainder({1, 1, 1}, 10) == std::vector<std::int64_t>{4, 3, 3});
  CHECK(largest_remainder({0, 0}, 3) == std::vector<std::int64_t>{2, 1});
  CHECK(largest_remainder({3, 1}, 8) == std::vector<std::int64_t>{6, 2});
  CHECK(largest_remainder({1, 2}, 0) == std::vector<std::int64_t>{0, 0});
  CHECK_THROWS_AS(largest_remainder({-1, 2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(largest_remainder({1, 2}, -3), std::invalid_argument);
  const std::vector<double> w = {0.1, 7.3, 2.2, 0.0, 11.9};
  for (std::int64_t total : {1, 17, 1000, 123457}) {
    const auto out = largest_remainder(w, total);
    CHECK(std::accumulate(out.begin(), out.end(), std::int64_t{0}) == total);
    CHECK(out[3] == 0);
  }
}

TEST_CASE("upscale") {
  SUBCASE("conserves every minute") {
    MinuteSeries m{{0, 1, 59, 60, 61, 600, 100000, 7}};
    const auto s = upscale(m, {0.8, 1.0, 42});
    REQUIRE(s.rates.size() == m.counts.size() * 60);
    CHECK(s.origin == SeriesOrigin::kUpscaled);
    for (std::size_t i = 0; i < m.counts.size(); ++i) {
      std::int64_t sum = 0;
      for (std::size_t k = 0; k < 60; ++k) {
        CHECK(s.rates[i * 60 + k] >= 0);
        sum += s.rates[i * 60 + k];
      }
      CHECK(sum == m.counts[i]);
    }
  }
  SUBCASE("deterministic given a seed") {
    MinuteSeries m{{120, 300, 45}};
    CHECK(upscale(m, {0.8, 1.0, 5}).rates == upscale(m, {0.8, 1.0, 5}).rates);
    CHECK(upscale(m, {0.8, 1.0, 5}).rates != upscale(m, {0.8, 1.0, 6}).rates);
  }
  SUBCASE("zero amplitude spreads evenly") {
    const auto s = upscale({{120}}, {0.8, 0.0, 1});
    for (auto r : s.rates) CHECK(r == 2);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(upscale({{}}), std::invalid_argument);
    CHECK_THROWS_AS(upscale({{5, -1}}), std::invalid_argument);
  }
  SUBCASE("long-range dependence survives within each minute") {
    MinuteSeries day{std::vector<std::int64_t>(1440, 600)};
    const auto s = upscale(day, {0.8, 1.0, 1});
    const double h = estimate_hurst(as_double(s), {8, 60});
    CHECK(h > 0.65);
    CHECK(h < 0.95);
  }
}

TEST_CASE("pattern kinds by name") {
  for (auto k : {PatternKind::kSteady, PatternKind::kFluctuating, PatternKind::kSpikes, PatternKind::kJump,
                 PatternKind::kConstant, PatternKind::kOnOff}) {
    CHECK(pattern_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(pattern_kind_from_string("bursty").has_value());
}

TEST_CASE("synth_pattern") {
  SUBCASE("constant") {
    PatternSpec p;
    p.kind = PatternKind::kConstant;
    p.average_rate = 200;
    const auto s = synth_pattern(p);
    REQUIRE(s.rates.size() == 1200);
    for (auto r : s.rates) CHECK(r == 200);
  }
  SUBCASE("constant with a fractional rate alternates floor and ceiling") {
    PatternSpec p;
    p.average_rate = 2.5;
    p.duration = 4;
    CHECK(synth_pattern(p).rates == std::vector<std::int64_t>{2, 3, 2, 3});
  }
  SUBCASE("on_off cycle") {
    PatternSpec p;
    p.kind = PatternKind::kOnOff;
    p.average_rate = 25;
    const auto s = synth_pattern(p);
    for (std::size_t i = 0; i < s.rates.size(); ++i) CHECK(s.rates[i] == (i % 4 == 0 ? 100 : 0));
  }
  SUBCASE("every kind hits its mean") {
    for (auto k : {PatternKind::kSteady, PatternKind::kFluctuating, PatternKind::kSpikes, PatternKind::kJump,
                   PatternKind::kConstant, PatternKind::kOnOff}) {
      for (double rate : {10.0, 25.0, 200.0}) {
        PatternSpec p;
        p.kind = k;
        p.average_rate = rate;
        p.seed = 77;
        const auto s = synth_pattern(p);
        CHECK(s.rates.size() == 1200);
        CHECK(std::abs(s.mean() - rate) / rate < 0.01);
        for (auto r : s.rates) CHECK(r >= 0);
      }
    }
  }
  SUBCASE("shapes are recognisable") {
    PatternSpec p;
    p.average_rate = 100;
    p.seed = 3;
    p.kind = PatternKind::kJump;
    const auto jump = synth_pattern(p);
    const auto peak = *std::max_element(jump.rates.begin(), jump.rates.end());
    const auto low = *std::min_element(jump.rates.begin(), jump.rates.end());
    CHECK(static_cast<double>(peak) / static_cast<double>(low) > 3.0);
    p.kind = PatternKind::kSteady;
    const auto steady = synth_pattern(p);
    CHECK(std::sqrt(variance_of(as_double(steady))) < 10.0);
  }
  SUBCASE("errors") {
    PatternSpec p;
    p.average_rate = 0;
    CHECK_THROWS_AS(synth_pattern(p), std::invalid_argument);
    p.average_rate = 0.0001;
    p.duration = 10;
    CHECK_THROWS_AS(synth_pattern(p), std::invalid_argument);
  }
}

TEST_CASE("series text formats") {
  std::istringstream minutes("# counts\n10\n\n20\r\n30\n");
  CHECK(read_minute_series(minutes).counts == std::vector<std::int64_t>{10, 20, 30});
  std::istringstream csv("minute,count\n0,5\n1,6\n");
  CHECK(read_minute_series(csv, 1).counts == std::vector<std::int64_t>{5, 6});
  std::istringstream bad("10\nabc\n");
  CHECK_THROWS(read_minute_series(bad));
  std::istringstream negative("-3\n");
  CHECK_THROWS(read_minute_series(negative));

  SecondSeries s;
  s.rates = {3, 0, 7};
  const std::string text = write_second_series(s);
  CHECK(text == "second_index,rate\n0,3\n1,0\n2,7\n");
  std::istringstream back(text);
  CHECK(read_second_series(back).rates == s.rates);
  std::istringstream bare("4\n5\n");
  CHECK(read_second_series(bare).rates == std::vector<std::int64_t>{4, 5});
}
