#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "faastrace/trace.h"

namespace faastrace {

/// Parses one canonical trace document:
///   {"trace_id": "...", "spans": [{"id", "parent_id"?, "name", "kind",
///    "start_us", "end_us", "error", "attributes"?, "in_progress"?}]}
/// Temporal anomalies are accepted; see validate(). Throws TraceError.
ExecutionTrace parse_canonical(std::string_view document);

/// Single-line canonical document with spans in stored order.
std::string serialize_canonical(const ExecutionTrace& trace);

/// Which X-Ray segment field a kind rule inspects.
enum class XRayField { kName, kOrigin, kNamespace };

struct KindRule {
  XRayField field;
  std::string value;
  SpanKind kind;
};

/// Ordered rule table mapping X-Ray segment metadata onto span kinds. The first
/// matching rule wins; unmatched records become kGeneric.
class KindMapping {
 public:
  KindMapping() = default;
  explicit KindMapping(std::vector<KindRule> rules) : rules_(std::move(rules)) {}

  /// Lambda, API Gateway and Step Functions conventions. "Initialization"
  /// subsegments map to runtime_init; container init needs an explicit rule.
  static KindMapping defaults();

  /// Inserts rules ahead of the existing ones so they take precedence.
  void prepend(std::vector<KindRule> rules);

  SpanKind classify(std::string_view name, std::string_view origin,
                    std::string_view ns) const;

  const std::vector<KindRule>& rules() const { return rules_; }

 private:
  std::vector<KindRule> rules_;
};

/// Flattens a batch of X-Ray-style segment documents into one trace. Accepts a
/// JSON array of segments, {"segments": [...]}, or the BatchGetTraces shape
/// {"Id": ..., "Segments": [{"Document": "<json>"}]}. Epoch seconds become
/// integer microseconds (half away from zero). Records without end_time are
/// kept as zero-length in-progress spans and flagged for validation.
ExecutionTrace import_xray(std::string_view document,
                           const KindMapping& mapping = KindMapping::defaults());

}  // namespace faastrace
