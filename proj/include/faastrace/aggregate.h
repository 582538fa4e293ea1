#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faastrace/breakdown.h"
#include "faastrace/validate.h"

namespace faastrace {

/// One analyzed request: the row form used by the report stage.
struct TraceRecord {
  std::string trace_id;
  Micros wall_time = 0;  // request start
  Micros e2e = 0;
  ColdStatus cold = ColdStatus::kWarm;
  Verdict verdict = Verdict::kValid;
  bool has_exception = false;
  AggregatedBreakdown aggregated{};

  bool valid() const { return verdict == Verdict::kValid; }
  bool operator==(const TraceRecord&) const = default;
};

/// Records that count toward a report: valid, exception-free, one cold status.
/// Partial cold starts never match a warm or cold filter.
struct RecordFilter {
  ColdStatus cold = ColdStatus::kWarm;

  bool accepts(const TraceRecord& r) const {
    return r.valid() && !r.has_exception && r.cold == cold;
  }
  std::string describe() const;
};

/// Raised when a filter leaves nothing to aggregate.
class EmptySetError : public std::runtime_error {
 public:
  explicit EmptySetError(const std::string& filter)
      : std::runtime_error("no records match filter '" + filter + "'"), filter_(filter) {}
  const std::string& filter() const { return filter_; }

 private:
  std::string filter_;
};

/// Nearest-rank percentile (rank = ceil(p * n), at least 1). `values` need
/// not be sorted; p in [0, 1].
Micros nearest_rank(std::vector<Micros> values, double p);

/// Per-category percentiles taken independently, so they need not add up to
/// the e2e percentile. Fractions are relative to the sum of the category
/// values.
struct BreakdownReport {
  double percentile = 0.5;
  std::size_t samples = 0;
  std::string filter;
  AggregatedBreakdown values{};
  std::array<double, kCategoryCount> fractions{};
  Micros e2e = 0;  // same percentile of end-to-end latency
};

struct PenaltyReport {
  std::string description;
  std::size_t baseline_samples = 0;
  std::size_t treatment_samples = 0;
  /// treatment - baseline per category; negative values are kept.
  std::array<Micros, kCategoryCount> diff{};
  /// diff / total(diff), zero when the total is zero.
  std::array<double, kCategoryCount> fractions{};
  Micros total = 0;
  std::vector<std::string> warnings;
};

BreakdownReport summarize(const std::vector<TraceRecord>& records, double percentile,
                          const RecordFilter& filter = {});

/// cold p50 - warm p50 per category.
PenaltyReport cold_penalty(const BreakdownReport& warm, const BreakdownReport& cold);

/// p99 - p50 per category over warm, valid records. Warns below 100 samples.
PenaltyReport tail_penalty(const std::vector<TraceRecord>& records);

/// Drops records that started less than `window_seconds` after the earliest one.
std::vector<TraceRecord> discard_warmup(const std::vector<TraceRecord>& records,
                                        double window_seconds = 60);

// Delimited-text exports. Columns after the fixed ones follow Category order.

/// trace_id,wall_time_us,e2e_us,verdict,has_exception,cold,<categories...>
std::string aggregate_csv_header();
std::string aggregate_csv_row(const TraceRecord& r);
/// Reads an aggregate export; throws std::runtime_error on malformed input.
std::vector<TraceRecord> read_aggregate_csv(std::istream& in);

std::string breakdown_report_csv(const std::vector<BreakdownReport>& reports);
std::string penalty_report_csv(const PenaltyReport& report);
/// Structured document with all three report kinds.
std::string reports_json(const std::vector<BreakdownReport>& warm, const PenaltyReport& cold,
                         const PenaltyReport& tail);

}  // namespace faastrace
