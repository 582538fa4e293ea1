#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faastrace/critical_path.h"
#include "faastrace/trace.h"

namespace faastrace {

/// Activity categories. The order here is the column order of every export.
enum class Category {
  kComputation,
  kExternalService,
  kOrchestration,
  kTrigger,
  kQueuing,
  kContainerInitialization,
  kRuntimeInitialization,
  kFinalizationOverhead,
  kInstrumentationOverhead,
};

inline constexpr std::size_t kCategoryCount = 9;

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view name);

/// Which pair-wise extraction case produced a segment.
enum class SegmentCase { kWithin, kSync1, kSync2, kAsync1, kAsync2, kTrailing };

std::string_view to_string(SegmentCase c);

struct Segment {
  Micros start = 0;
  Micros end = 0;
  Category category = Category::kComputation;
  /// Span id, or "gap" for trigger gaps between an ending parent and a later
  /// asynchronous child.
  std::string owner;
  SegmentCase case_label = SegmentCase::kWithin;

  Micros duration() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

inline constexpr std::string_view kGapOwner = "gap";

struct LatencyBreakdown {
  std::vector<Segment> segments;
  Micros e2e_start = 0;
  Micros e2e_end = 0;
  /// One entry per clamped segment, detail holds the skew in microseconds.
  std::vector<Finding> warnings;
};

/// Where in its owner's lifetime a segment falls.
enum class SpanContext { kBody, kTrailing };

/// (kind, context) -> category. Queue spans always yield kQueuing and trigger
/// gaps always yield kTrigger, whatever the table says.
class CategoryMap {
 public:
  /// function -> computation (trailing: finalization_overhead), runtime_init ->
  /// runtime_initialization, container_init -> container_initialization,
  /// external_service -> external_service, orchestrator -> orchestration,
  /// queue -> queuing, finalization -> finalization_overhead, instrumentation ->
  /// instrumentation_overhead, client -> orchestration, generic -> computation.
  CategoryMap();

  void set(SpanKind kind, SpanContext ctx, Category c);
  Category lookup(SpanKind kind, SpanContext ctx) const;

  /// Applies overrides from a JSON object {"<kind>": "<category>",
  /// "<kind>.trailing": "<category>"}. Setting the body category of a kind
  /// also resets its trailing category unless given explicitly.
  void apply_json(std::string_view json_object);

 private:
  std::array<std::array<Category, 2>, kSpanKindCount> table_{};
};

/// Cuts [e2e_start, e2e_end] of the critical path into contiguous categorized
/// segments. Walks the path pair-wise with a time cursor:
///  - next is a synchronous child of current: current owns up to next.start (Sync1)
///  - next hangs off an ancestor P of current: current runs to its end, each
///    ancestor below P contributes its trailing time, then P owns up to
///    next.start (Sync2)
///  - next is an asynchronous child starting within margin of its parent's end:
///    the parent owns up to next.start (Async1)
///  - otherwise the parent owns up to its end and a trigger gap covers the rest
///    (Async2)
/// The last path span runs to its end, then every ancestor ending later adds a
/// trailing segment. Segments that would run backwards because of clock skew
/// are emitted with zero length and reported in `warnings`. Throws TraceError
/// if the path does not belong to the trace.
LatencyBreakdown extract_breakdown(const ExecutionTrace& trace, const CriticalPath& path,
                                   const TemporalConfig& cfg = {},
                                   const CategoryMap& map = CategoryMap());

using AggregatedBreakdown = std::array<Micros, kCategoryCount>;

AggregatedBreakdown aggregate(const LatencyBreakdown& b);

inline Micros total(const AggregatedBreakdown& a) {
  Micros s = 0;
  for (auto v : a) s += v;
  return s;
}

}  // namespace faastrace
