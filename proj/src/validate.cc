#include "faastrace/validate.h"

namespace faastrace {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kValid: return "valid";
    case Verdict::kInvalid: return "invalid";
    case Verdict::kIncomplete: return "incomplete";
  }
  return "invalid";
}

std::string_view to_string(ColdStatus s) {
  switch (s) {
    case ColdStatus::kWarm: return "warm";
    case ColdStatus::kCold: return "cold";
    case ColdStatus::kPartial: return "partial";
  }
  return "warm";
}

ValidationReport validate(const ExecutionTrace& trace, Micros margin) {
  ValidationReport r;
  bool incomplete = false;
  for (const auto& f : trace.ingest_findings()) {
    if (f.code == "in_progress") {
      r.structural_errors.push_back(f);
      incomplete = true;
    } else {
      r.warnings.push_back(f);
    }
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceSpan& s = trace.span(i);
    r.has_exception = r.has_exception || s.error;
    if (s.end < s.start) {
      r.temporal_anomalies.push_back(
          {"negative_duration", s.id, std::to_string(s.end - s.start) + "us"});
    }
    const std::size_t p = trace.parent(i);
    if (p == kNoParent) continue;
    const TraceSpan& parent = trace.span(p);
    if (s.start < parent.start - margin) {
      r.temporal_anomalies.push_back(
          {"child_precedes_parent", s.id,
           std::to_string(parent.start - s.start) + "us before " + parent.id});
    }
  }

  if (incomplete) {
    r.verdict = Verdict::kIncomplete;
  } else if (!r.structural_errors.empty() || !r.temporal_anomalies.empty()) {
    r.verdict = Verdict::kInvalid;
  }
  return r;
}

namespace {

bool is_init(SpanKind k) { return k == SpanKind::kRuntimeInit || k == SpanKind::kContainerInit; }

}  // namespace

ColdResult cold_status(const ExecutionTrace& trace, const CriticalPath& path) {
  // Attribute every init span to its nearest function ancestor.
  std::vector<bool> cold(trace.size(), false);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!is_init(trace.span(i).kind)) continue;
    for (std::size_t a = trace.parent(i); a != kNoParent; a = trace.parent(a)) {
      if (trace.span(a).kind == SpanKind::kFunction) {
        cold[a] = true;
        break;
      }
    }
  }

  ColdResult out;
  std::size_t functions = 0;
  std::size_t cold_functions = 0;
  for (auto i : path.spans) {
    if (trace.span(i).kind != SpanKind::kFunction) continue;
    ++functions;
    if (cold[i]) ++cold_functions;
  }
  if (functions == 0) {
    out.warnings.push_back({"no_function_on_path", trace.span(trace.root()).id, ""});
  } else if (cold_functions == functions) {
    out.status = ColdStatus::kCold;
  } else if (cold_functions > 0) {
    out.status = ColdStatus::kPartial;
  }
  return out;
}

}  // namespace faastrace
