#pragma once

#include <string_view>
#include <vector>

#include "faastrace/critical_path.h"
#include "faastrace/trace.h"

namespace faastrace {

enum class Verdict { kValid, kInvalid, kIncomplete };

std::string_view to_string(Verdict v);

struct ValidationReport {
  Verdict verdict = Verdict::kValid;
  std::vector<Finding> structural_errors;
  std::vector<Finding> temporal_anomalies;
  /// Non-fatal notes (e.g. unknown span kinds); they do not affect the verdict.
  std::vector<Finding> warnings;
  bool has_exception = false;

  bool operator==(const ValidationReport&) const = default;
};

/// Logical and time-based checks. Never throws and never touches the trace.
///
/// Structural: spans left open at capture time make the verdict incomplete.
/// Temporal: a child starting more than `margin` before its parent, and spans
/// ending before they start.
ValidationReport validate(const ExecutionTrace& trace, Micros margin = 1000);

enum class ColdStatus { kWarm, kCold, kPartial };

std::string_view to_string(ColdStatus s);

struct ColdResult {
  ColdStatus status = ColdStatus::kWarm;
  std::vector<Finding> warnings;
};

/// A function span is cold when an init span (runtime or container) sits below
/// it with no other function span in between. All path functions cold gives
/// kCold, none gives kWarm, anything else kPartial. A path without functions is
/// vacuously warm and reported as a warning.
ColdResult cold_status(const ExecutionTrace& trace, const CriticalPath& path);

}  // namespace faastrace
