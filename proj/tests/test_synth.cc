#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "faastrace/analysis.h"
#include "faastrace/io.h"
#include "faastrace/synth.h"

using namespace faastrace;

namespace {

TraceSpec seeded(std::uint64_t seed) {
  TraceSpec s;
  s.seed = seed;
  s.cold_probability = 0.2;
  return s;
}

bool conserves(const LatencyBreakdown& b) {
  Micros cursor = b.e2e_start;
  Micros sum = 0;
  for (const auto& s : b.segments) {
    if (s.start != cursor || s.end < s.start) return false;
    cursor = s.end;
    sum += s.duration();
  }
  return cursor == b.e2e_end && sum == b.e2e_end - b.e2e_start;
}

}  // namespace

TEST_CASE("depth one yields a single span") {
  TraceSpec s;
  s.max_depth = 1;
  s.cold_probability = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    s.seed = seed;
    const auto r = generate(s);
    CHECK(r.trace.size() == 1);
    CHECK(r.truth.expected_path == std::vector<std::string>{r.trace.span(0).id});
    CHECK(extract(r.trace).ids(r.trace) == r.truth.expected_path);
  }
}

TEST_CASE("invalid specs are rejected") {
  TraceSpec s;
  s.max_depth = 0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = {};
  s.async_probability = 1.5;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = {};
  s.trigger_gap_min = 100;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = {};
  s.service_mix.fill(0.0);
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("generation is deterministic") {
  for (std::uint64_t seed : {1u, 7u, 99u}) {
    const auto a = generate(seeded(seed));
    const auto b = generate(seeded(seed));
    CHECK(serialize_canonical(a.trace) == serialize_canonical(b.trace));
    CHECK(ground_truth_json("x", a.truth) == ground_truth_json("x", b.truth));
  }
}

TEST_CASE("no async calls: path follows the synchronous chain") {
  TraceSpec s;
  s.async_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    s.seed = seed;
    const auto r = generate(s);
    const auto path = extract(r.trace);
    REQUIRE(path.ids(r.trace) == r.truth.expected_path);
    // Without async work the root ends last and every span is on the path.
    CHECK(path.spans.size() == r.trace.size());
  }
}

TEST_CASE("always async: path ends at the latest-ending async leaf") {
  TraceSpec s;
  s.async_probability = 1.0;
  s.max_depth = 3;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    s.seed = seed;
    const auto r = generate(s);
    const auto path = extract(r.trace);
    REQUIRE(path.ids(r.trace) == r.truth.expected_path);
    const std::size_t tail = path.spans.back();
    CHECK(tail == last_ending_span(r.trace));
    CHECK(r.trace.children(tail).empty());
    const auto role = r.truth.roles[tail];
    CHECK((role == InvocationRole::kAsyncOverlap || role == InvocationRole::kAsyncGap));
  }
}

TEST_CASE("generated traces validate and truth conserves latency") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto r = generate(seeded(seed));
    CHECK(validate(r.trace).verdict == Verdict::kValid);
    CHECK(r.trace.size() <= 50);
    LatencyBreakdown truth;
    truth.segments = r.truth.expected_segments;
    truth.e2e_start = r.trace.span(r.trace.root()).start;
    truth.e2e_end = r.trace.span(last_ending_span(r.trace)).end;
    CHECK(conserves(truth));
  }
}

TEST_CASE("analysis matches ground truth on the seeded corpus") {
  std::array<std::size_t, 6> cases{};
  std::set<ColdStatus> colds;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto r = generate(seeded(seed));
    const auto a = analyze_trace(r.trace);
    REQUIRE(a.path.ids(r.trace) == r.truth.expected_path);
    REQUIRE(a.breakdown.segments == r.truth.expected_segments);
    CHECK(a.cold.status == r.truth.expected_cold);
    CHECK(a.breakdown.warnings.empty());
    for (std::size_t c = 0; c < cases.size(); ++c) cases[c] += r.truth.case_counts[c];
    colds.insert(r.truth.expected_cold);
  }
  for (auto c : {SegmentCase::kSync1, SegmentCase::kSync2, SegmentCase::kAsync1, SegmentCase::kAsync2}) {
    CHECK(cases[static_cast<std::size_t>(c)] >= 50);
  }
  CHECK(colds.size() == 3);
}

TEST_CASE("hidden async calls are flagged") {
  TraceSpec s;
  s.undetectable_async = true;
  std::size_t flagged = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    s.seed = seed;
    flagged += generate(s).truth.has_undetectable ? 1 : 0;
  }
  CHECK(flagged > 0);
  s.undetectable_async = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    s.seed = seed;
    CHECK_FALSE(generate(s).truth.has_undetectable);
  }
}

TEST_CASE("skew injection") {
  const auto r = generate(seeded(3));
  SUBCASE("zero magnitude is the identity") {
    CHECK(serialize_canonical(inject_skew(r.trace, 0, 1)) == serialize_canonical(r.trace));
  }
  SUBCASE("noise stays within bounds and keeps start <= end") {
    const auto skewed = inject_skew(r.trace, 400, 11);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      const auto& a = r.trace.span(i);
      const auto& b = skewed.span(i);
      CHECK(std::abs(b.start - a.start) <= 400);
      CHECK(b.start <= b.end);
      CHECK(b.end - a.end <= 400);
    }
  }
  SUBCASE("negative magnitude is rejected") {
    CHECK_THROWS_AS(inject_skew(r.trace, -1, 1), std::invalid_argument);
  }
}

TEST_CASE("sub-margin skew keeps the path") {
  std::size_t agree = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto r = generate(seeded(seed));
    const auto skewed = inject_skew(r.trace, 400, seed + 17);
    agree += extract(skewed).ids(skewed) == r.truth.expected_path ? 1 : 0;
  }
  CHECK(agree == 300);
}
