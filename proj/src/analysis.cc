#include "faastrace/analysis.h"

#include <exception>

namespace faastrace {

TraceAnalysis analyze_trace(const ExecutionTrace& trace, const AnalysisConfig& cfg) {
  TraceAnalysis a;
  a.validation = validate(trace, cfg.temporal.margin);
  a.path = extract(trace, cfg.temporal);
  a.breakdown = extract_breakdown(trace, a.path, cfg.temporal, cfg.categories);
  a.cold = cold_status(trace, a.path);

  TraceRecord& r = a.record;
  r.trace_id = trace.trace_id();
  r.wall_time = a.path.e2e_start;
  r.e2e = a.path.latency();
  r.cold = a.cold.status;
  r.verdict = a.validation.verdict;
  r.has_exception = a.validation.has_exception;
  r.aggregated = aggregate(a.breakdown);
  return a;
}

std::vector<TraceAnalysis> analyze_batch_serial(const std::vector<ExecutionTrace>& traces,
                                                const AnalysisConfig& cfg) {
  std::vector<TraceAnalysis> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(analyze_trace(t, cfg));
  return out;
}

std::vector<TraceAnalysis> analyze_batch_parallel(const std::vector<ExecutionTrace>& traces,
                                                  const AnalysisConfig& cfg) {
  std::vector<TraceAnalysis> out(traces.size());
  const auto n = static_cast<std::ptrdiff_t>(traces.size());
  // Exceptions must not cross the parallel region; rethrow the first by index.
  std::vector<std::exception_ptr> errors(traces.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = analyze_trace(traces[k], cfg);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace faastrace
