#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace faastrace {

/// Microseconds since the epoch. All trace arithmetic is exact integer math.
using Micros = std::int64_t;

enum class SpanKind {
  kClient,
  kFunction,
  kRuntimeInit,
  kContainerInit,
  kExternalService,
  kOrchestrator,
  kQueue,
  kFinalization,
  kInstrumentation,
  kGeneric,
};

inline constexpr std::size_t kSpanKindCount = 10;

std::string_view to_string(SpanKind kind);
/// Returns nullopt for names outside the closed set.
std::optional<SpanKind> span_kind_from_string(std::string_view name);

struct TraceSpan {
  std::string id;
  std::optional<std::string> parent_id;
  std::string name;
  SpanKind kind = SpanKind::kGeneric;
  Micros start = 0;
  Micros end = 0;
  bool error = false;
  /// Set for spans that were still open when the trace was captured.
  bool in_progress = false;
  std::map<std::string, std::string> attributes;

  Micros duration() const { return end - start; }
};

/// A coded observation about a trace (parse warning, validation finding).
struct Finding {
  std::string code;
  std::string span_id;
  std::string detail;

  bool operator==(const Finding&) const = default;
};

/// Raised for structurally unusable traces. `span_id` names the offender when
/// one exists.
class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::string span_id = {})
      : std::runtime_error(span_id.empty() ? what : what + ": " + span_id),
        span_id_(std::move(span_id)) {}

  const std::string& span_id() const { return span_id_; }

 private:
  std::string span_id_;
};

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

/// Immutable, structurally indexed request trace: exactly one root, every
/// parent reference resolves, and the parent graph is a tree.
class ExecutionTrace {
 public:
  /// Indexes `spans` and checks tree structure. Throws TraceError on duplicate
  /// or empty ids, zero or multiple roots, unresolved parents and cycles.
  static ExecutionTrace build(std::string trace_id, std::vector<TraceSpan> spans,
                              std::vector<Finding> ingest_findings = {});

  const std::string& trace_id() const { return trace_id_; }
  const std::vector<TraceSpan>& spans() const { return spans_; }
  std::size_t size() const { return spans_.size(); }
  const TraceSpan& span(std::size_t i) const { return spans_[i]; }

  std::size_t root() const { return root_; }
  /// kNoParent for the root.
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  std::optional<std::size_t> find(std::string_view id) const;

  /// Non-fatal observations made while ingesting (unknown kinds, open spans).
  const std::vector<Finding>& ingest_findings() const { return ingest_findings_; }

  /// True if `ancestor` lies on the parent chain of `node` (or equals it).
  bool is_ancestor_or_self(std::size_t ancestor, std::size_t node) const;

 private:
  ExecutionTrace() = default;

  std::string trace_id_;
  std::vector<TraceSpan> spans_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t root_ = 0;
  // Pre-order entry/exit stamps for O(1) ancestry queries.
  std::vector<std::uint32_t> enter_;
  std::vector<std::uint32_t> exit_;
  std::vector<Finding> ingest_findings_;
};

}  // namespace faastrace
