#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "faastrace/breakdown.h"
#include "faastrace/trace.h"
#include "faastrace/validate.h"

namespace faastrace {

/// Knobs for the synthetic trace generator. Every generated timing decision
/// sits at least 2 ms (trigger gaps: trigger_gap_min) away from the point
/// where a temporal heuristic would flip.
struct TraceSpec {
  std::uint64_t seed = 0;
  /// Invocation levels including the root; 1 yields a single span. Cold-start
  /// initialization spans are not counted.
  int max_depth = 6;
  int max_children = 4;
  double async_probability = 0.3;
  /// Share of asynchronous children started before their parent ends.
  double overlap_probability = 0.5;
  Micros trigger_gap_min = 3000;
  Micros trigger_gap_max = 50000;
  /// Relative weights of synchronous child kinds, indexed by SpanKind.
  std::array<double, kSpanKindCount> service_mix = default_service_mix();
  /// Probability that the request hits cold function instances.
  double cold_probability = 0.1;
  /// Within a cold request, probability that any given function is cold.
  double cold_function_fraction = 1.0;
  std::size_t max_spans = 50;
  /// Also emit asynchronous calls that finish before their caller, which no
  /// temporal heuristic can tell apart from synchronous ones.
  bool undetectable_async = false;
  Micros start_us = 0;
  std::string trace_id;  // defaults to "synth-<seed>"

  static std::array<double, kSpanKindCount> default_service_mix();
};

/// How a generated span was invoked by its parent.
enum class InvocationRole { kRoot, kSync, kAsyncOverlap, kAsyncGap, kAsyncHidden };

struct GroundTruth {
  std::vector<std::string> expected_path;
  std::vector<Segment> expected_segments;
  ColdStatus expected_cold = ColdStatus::kWarm;
  /// Transition cases on the true path, indexed by SegmentCase.
  std::array<std::size_t, 6> case_counts{};
  /// A hidden asynchronous call exists; analysis cannot be expected to match.
  bool has_undetectable = false;
  /// Role per span, in trace span order.
  std::vector<InvocationRole> roles;
};

struct SynthResult {
  ExecutionTrace trace;
  GroundTruth truth;
};

/// Builds a causal tree by simulating each span's timeline (optional init
/// spans, sequential synchronous calls, at most one trailing asynchronous
/// trigger) and records the true critical path and segment attribution from
/// the invocation roles rather than from timestamps. Throws
/// std::invalid_argument for invalid specs.
SynthResult generate(const TraceSpec& spec);

/// Perturbs every start and end by uniform noise in [-magnitude, +magnitude];
/// a span whose end would precede its start collapses to zero length.
ExecutionTrace inject_skew(const ExecutionTrace& trace, Micros magnitude, std::uint64_t seed);

/// Companion document for regression fixtures.
std::string ground_truth_json(const std::string& trace_id, const GroundTruth& truth);

}  // namespace faastrace
