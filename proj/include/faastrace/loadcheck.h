#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "faastrace/workload.h"

namespace faastrace {

struct DtwResult {
  double distance = 0.0;
  /// Cells on the optimal warping path.
  std::size_t path_length = 0;
};

/// Classic DTW with |a_i - b_j| local cost and steps {match, insert, delete}.
/// Among equal-cost alignments the shortest warping path is reported. Serial
/// reference, O(min(n, m)) memory.
DtwResult dtw_exact(std::span<const double> a, std::span<const double> b);

/// Same recurrence evaluated by anti-diagonal wavefronts with OpenMP. Produces
/// bit-identical results to dtw_exact.
DtwResult dtw_exact_parallel(std::span<const double> a, std::span<const double> b);

/// A warping path as (i, j) cells from (0, 0) to (n-1, m-1).
using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

/// Per-row inclusive column ranges [lo, hi] a constrained DTW may visit.
struct Window {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
};

/// DTW restricted to `window`, returning the distance and the path.
DtwResult dtw_windowed(std::span<const double> a, std::span<const double> b, const Window& window,
                       WarpPath* path = nullptr);

/// FastDTW: halve both series by pairwise averaging until one is no longer than
/// max(radius + 2, 10), solve exactly there, then project the path back up one
/// level at a time and refine inside the projection widened by `radius`.
DtwResult fastdtw(std::span<const double> a, std::span<const double> b, std::size_t radius = 10,
                  WarpPath* path = nullptr);

struct LoadThresholds {
  /// Maximum relative difference of the series totals (exclusive).
  double deviation = 0.10;
  /// Maximum DTW distance per aligned step, in invocations per second.
  double normalized_distance = 1.0;
  std::size_t radius = 10;
};

struct LoadVerdict {
  std::string reference;
  std::string candidate;
  double dtw_distance = 0.0;
  std::size_t path_length = 0;
  double normalized_distance = 0.0;
  /// |sum(reference) - sum(candidate)| / sum(reference).
  double total_deviation = 0.0;
  bool pass = false;
  LoadThresholds thresholds;
};

LoadVerdict compare_load(const SecondSeries& reference, const SecondSeries& candidate,
                         const LoadThresholds& thresholds, std::string reference_role = "reference",
                         std::string candidate_role = "candidate");

struct LoadValidation {
  LoadVerdict plan_vs_sent;
  LoadVerdict sent_vs_executed;
};

/// Throws std::invalid_argument naming the role of an empty series.
LoadValidation validate_load(const SecondSeries& planned, const SecondSeries& sent,
                             const SecondSeries& executed, const LoadThresholds& thresholds = {});

std::string load_verdicts_json(const LoadValidation& v);

}  // namespace faastrace
