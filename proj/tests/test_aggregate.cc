#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "faastrace/aggregate.h"

using namespace faastrace;

namespace {

constexpr Micros ms = 1000;
constexpr auto kComp = static_cast<std::size_t>(Category::kComputation);
constexpr auto kExt = static_cast<std::size_t>(Category::kExternalService);
constexpr auto kRuntime = static_cast<std::size_t>(Category::kRuntimeInitialization);
constexpr auto kContainer = static_cast<std::size_t>(Category::kContainerInitialization);

TraceRecord record(std::string id, AggregatedBreakdown agg, ColdStatus cold = ColdStatus::kWarm,
                   Micros wall = 0) {
  TraceRecord r;
  r.trace_id = std::move(id);
  r.wall_time = wall;
  r.aggregated = agg;
  r.e2e = total(agg);
  r.cold = cold;
  return r;
}

AggregatedBreakdown only(std::size_t c, Micros v) {
  AggregatedBreakdown a{};
  a[c] = v;
  return a;
}

// Independent percentile oracle: sort, then index by ceil(p * n) - 1.
Micros sorted_rank(std::vector<Micros> v, double p) {
  std::sort(v.begin(), v.end());
  std::size_t k = 1;
  while (static_cast<double>(k) < p * static_cast<double>(v.size())) ++k;
  return v[k - 1];
}

}  // namespace

TEST_CASE("nearest_rank") {
  CHECK(nearest_rank({30, 10, 20}, 0.5) == 20);
  CHECK(nearest_rank({5}, 0.99) == 5);
  CHECK(nearest_rank({1, 2, 3, 4}, 0.0) == 1);
  CHECK(nearest_rank({1, 2, 3, 4}, 1.0) == 4);
  CHECK_THROWS_AS(nearest_rank({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(nearest_rank({1}, 1.5), std::invalid_argument);
}

TEST_CASE("summarize") {
  SUBCASE("median of three") {
    std::vector<TraceRecord> rs = {record("a", only(kComp, 10 * ms)), record("b", only(kComp, 20 * ms)),
                                   record("c", only(kComp, 30 * ms))};
    const auto r = summarize(rs, 0.5);
    CHECK(r.values[kComp] == 20 * ms);
    CHECK(r.samples == 3);
    CHECK(r.fractions[kComp] == 1.0);
    CHECK(r.filter == "valid,no-exception,cold=warm");
  }
  SUBCASE("singleton equals its record at every percentile") {
    AggregatedBreakdown agg{};
    agg[kComp] = 7;
    agg[kExt] = 3;
    for (double p : {0.01, 0.5, 0.99, 1.0}) {
      const auto r = summarize({record("a", agg)}, p);
      CHECK(r.values == agg);
      CHECK(r.e2e == 10);
    }
  }
  SUBCASE("p99 of 101 records is the 100th ranked") {
    std::vector<TraceRecord> rs;
    for (int i = 0; i < 101; ++i) rs.push_back(record(std::to_string(i), only(kComp, (i * 37) % 101)));
    CHECK(summarize(rs, 0.99).values[kComp] == 99);
  }
  SUBCASE("filters exclude invalid, exceptional and other cold states") {
    std::vector<TraceRecord> rs = {record("w", only(kComp, 1)), record("c", only(kComp, 2), ColdStatus::kCold),
                                   record("p", only(kComp, 3), ColdStatus::kPartial)};
    rs.push_back(record("x", only(kComp, 4)));
    rs.back().has_exception = true;
    rs.push_back(record("i", only(kComp, 5)));
    rs.back().verdict = Verdict::kInvalid;
    CHECK(summarize(rs, 0.5).samples == 1);
    CHECK(summarize(rs, 0.5, {ColdStatus::kCold}).values[kComp] == 2);
    try {
      summarize({rs[0]}, 0.5, {ColdStatus::kCold});
      FAIL("expected an empty set");
    } catch (const EmptySetError& e) {
      CHECK(e.filter() == "valid,no-exception,cold=cold");
    }
  }
  SUBCASE("permutation invariance") {
    std::mt19937 gen(5);
    std::vector<TraceRecord> rs;
    for (int i = 0; i < 50; ++i) {
      AggregatedBreakdown a{};
      for (auto& v : a) v = static_cast<Micros>(gen() % 1000);
      rs.push_back(record(std::to_string(i), a));
    }
    const auto before = summarize(rs, 0.9);
    std::shuffle(rs.begin(), rs.end(), gen);
    const auto after = summarize(rs, 0.9);
    CHECK(before.values == after.values);
    CHECK(before.e2e == after.e2e);
  }
}

TEST_CASE("cold_penalty") {
  AggregatedBreakdown warm{};
  warm[kComp] = 120 * ms;
  warm[kExt] = 40 * ms;
  AggregatedBreakdown cold = warm;
  cold[kRuntime] = 167 * ms;
  cold[kContainer] = 98 * ms;
  std::vector<TraceRecord> rs;
  for (int i = 0; i < 5; ++i) {
    rs.push_back(record("w" + std::to_string(i), warm));
    rs.push_back(record("c" + std::to_string(i), cold, ColdStatus::kCold));
  }
  const auto w = summarize(rs, 0.5, {ColdStatus::kWarm});
  const auto c = summarize(rs, 0.5, {ColdStatus::kCold});
  const auto p = cold_penalty(w, c);
  CHECK(p.total == 265 * ms);
  CHECK(p.diff[kRuntime] == 167 * ms);
  CHECK(p.diff[kContainer] == 98 * ms);
  CHECK(p.diff[kComp] == 0);
  CHECK(p.fractions[kRuntime] + p.fractions[kContainer] == doctest::Approx(1.0));

  const auto same = cold_penalty(w, w);
  CHECK(same.total == 0);
  CHECK(same.diff == std::array<Micros, kCategoryCount>{});

  // Negative components are kept.
  const auto reversed = cold_penalty(c, w);
  CHECK(reversed.diff[kRuntime] == -167 * ms);
}

TEST_CASE("tail_penalty") {
  SUBCASE("constant latency has no tail") {
    std::vector<TraceRecord> rs(150, record("a", only(kComp, 10)));
    const auto p = tail_penalty(rs);
    CHECK(p.total == 0);
    CHECK(p.warnings.empty());
  }
  SUBCASE("variance in one category concentrates the penalty") {
    std::vector<TraceRecord> rs;
    for (int i = 0; i < 200; ++i) {
      AggregatedBreakdown a{};
      a[kComp] = 50;
      a[kExt] = i;
      rs.push_back(record(std::to_string(i), a));
    }
    const auto p = tail_penalty(rs);
    CHECK(p.diff[kComp] == 0);
    CHECK(p.diff[kExt] == sorted_rank([&] {
            std::vector<Micros> v;
            for (const auto& r : rs) v.push_back(r.aggregated[kExt]);
            return v;
          }(), 0.99) - 99);
    CHECK(p.fractions[kExt] == 1.0);
  }
  SUBCASE("matches a sort oracle per category") {
    std::mt19937_64 gen(9);
    std::vector<TraceRecord> rs;
    for (int i = 0; i < 200; ++i) {
      AggregatedBreakdown a{};
      for (auto& v : a) v = static_cast<Micros>(gen() % 100000);
      rs.push_back(record(std::to_string(i), a));
    }
    const auto p = tail_penalty(rs);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      std::vector<Micros> col;
      for (const auto& r : rs) col.push_back(r.aggregated[c]);
      CHECK(p.diff[c] == sorted_rank(col, 0.99) - sorted_rank(col, 0.5));
    }
  }
  SUBCASE("small sets warn") {
    CHECK(tail_penalty({record("a", only(kComp, 1))}).warnings.size() == 1);
  }
}

TEST_CASE("discard_warmup") {
  const Micros s = 1000000;
  CHECK(discard_warmup({record("a", {}, ColdStatus::kWarm, 0), record("b", {}, ColdStatus::kWarm, 0)}).empty());
  const auto kept = discard_warmup({record("a", {}, ColdStatus::kWarm, 30 * s), record("b", {}, ColdStatus::kWarm, 90 * s)}, 60);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].trace_id == "b");
  CHECK(discard_warmup({record("a", {}, ColdStatus::kWarm, 0)}, 0).size() == 1);
}

TEST_CASE("aggregate export round-trips") {
  std::vector<TraceRecord> rs = {record("plain", only(kComp, 5), ColdStatus::kWarm, 17),
                                 record("with,comma", only(kExt, 9), ColdStatus::kPartial, 18)};
  rs[1].verdict = Verdict::kIncomplete;
  rs[1].has_exception = true;
  std::ostringstream os;
  os << aggregate_csv_header() << '\n';
  for (const auto& r : rs) os << aggregate_csv_row(r) << '\n';
  std::istringstream in(os.str());
  CHECK(read_aggregate_csv(in) == rs);

  std::istringstream bad("nope\n");
  CHECK_THROWS(read_aggregate_csv(bad));
  std::istringstream short_row(aggregate_csv_header() + "\na,1,2\n");
  CHECK_THROWS(read_aggregate_csv(short_row));
}

TEST_CASE("report exports") {
  std::vector<TraceRecord> rs = {record("a", only(kComp, 10)), record("b", only(kComp, 30))};
  const auto r = summarize(rs, 0.5);
  const std::string csv = breakdown_report_csv({r});
  CHECK(csv.rfind("statistic,percentile,samples,e2e_us,computation,", 0) == 0);
  CHECK(csv.find("value_us,0.5,2,10,10,0,") != std::string::npos);
  CHECK(csv.find("fraction,0.5,2,10,1.000000,0.000000,") != std::string::npos);
  const auto p = cold_penalty(r, r);
  CHECK(penalty_report_csv(p).find("diff_us,cold p50 - warm p50,2,2,0,") != std::string::npos);
  const std::string json = reports_json({r}, p, p);
  CHECK(json.find("\"fraction_of_category_sum\"") != std::string::npos);
}
