#pragma once

#include <vector>

#include "faastrace/aggregate.h"
#include "faastrace/breakdown.h"
#include "faastrace/critical_path.h"
#include "faastrace/trace.h"
#include "faastrace/validate.h"

namespace faastrace {

struct AnalysisConfig {
  TemporalConfig temporal;
  CategoryMap categories;
};

/// Everything the pipeline derives from one trace.
struct TraceAnalysis {
  ValidationReport validation;
  CriticalPath path;
  LatencyBreakdown breakdown;
  ColdResult cold;
  TraceRecord record;
};

/// Validates, extracts the critical path and its breakdown, and classifies
/// cold starts. Invalid traces are still analyzed; their record carries the
/// verdict so reports can filter them out.
TraceAnalysis analyze_trace(const ExecutionTrace& trace, const AnalysisConfig& cfg = {});

/// Serial reference for the batch kernel.
std::vector<TraceAnalysis> analyze_batch_serial(const std::vector<ExecutionTrace>& traces,
                                                const AnalysisConfig& cfg = {});

/// OpenMP fan-out over traces. Output order is input order.
std::vector<TraceAnalysis> analyze_batch_parallel(const std::vector<ExecutionTrace>& traces,
                                                  const AnalysisConfig& cfg = {});

}  // namespace faastrace
