#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "faastrace/trace.h"

namespace faastrace {

/// Tolerance applied to temporal comparisons between spans recorded on
/// different hosts.
struct TemporalConfig {
  Micros margin = 1000;
};

/// current finished before next started, allowing `margin` of clock skew:
/// current.end < next.start + margin.
bool happens_before(const TraceSpan& current, const TraceSpan& next, const TemporalConfig& cfg);

/// next outlives current by more than `margin`: next.end > current.end + margin.
/// Ends within the margin count as synchronous.
bool is_async(const TraceSpan& current, const TraceSpan& next, const TemporalConfig& cfg);

/// The last-ending span together with all of its ancestors. Stored bottom to
/// top: back() is the root, front() the last-ending span.
class AncestorStack {
 public:
  explicit AncestorStack(std::vector<std::size_t> bottom_to_top)
      : items_(std::move(bottom_to_top)) {}

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::size_t top() const { return items_.back(); }
  void pop() { items_.pop_back(); }
  /// Root first, last-ending span last.
  std::vector<std::size_t> top_down() const { return {items_.rbegin(), items_.rend()}; }

 private:
  std::vector<std::size_t> items_;
};

/// Latest end wins; ties go to the later start, then the greater span id.
std::size_t last_ending_span(const ExecutionTrace& trace);

AncestorStack build_stack(const ExecutionTrace& trace);

struct CriticalPath {
  /// Span indices into the trace, in pre-order.
  std::vector<std::size_t> spans;
  Micros e2e_start = 0;
  Micros e2e_end = 0;

  Micros latency() const { return e2e_end - e2e_start; }
  std::vector<std::string> ids(const ExecutionTrace& trace) const;
};

/// Extracts the critical path across synchronous and asynchronous invocations.
/// Children are visited in (end, start, id) order. A non-last child is taken
/// when it happens before the last child and the path tail is not
/// asynchronous to the current span; the last child is taken when it is an
/// asynchronous hop toward the last-ending span, or a synchronous call while
/// the tail is still synchronous. Runs without recursion, so arbitrarily deep
/// traces are fine.
CriticalPath extract(const ExecutionTrace& trace, const TemporalConfig& cfg = {});

}  // namespace faastrace
