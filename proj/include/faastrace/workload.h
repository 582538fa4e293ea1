#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faastrace {

/// Invocations per minute, as reported by provider invocation logs.
struct MinuteSeries {
  std::vector<std::int64_t> counts;
};

enum class SeriesOrigin { kUpscaled, kSynthetic, kObserved };

/// Invocations per second.
struct SecondSeries {
  std::vector<std::int64_t> rates;
  SeriesOrigin origin = SeriesOrigin::kObserved;

  double mean() const;
  std::int64_t total() const;
};

/// Largest series generate_fgn accepts.
inline constexpr std::size_t kMaxFgnLength = std::size_t{1} << 26;

/// n samples of zero-mean, unit-variance fractional Gaussian noise with Hurst
/// exponent `hurst`, by circulant embedding (Davies-Harte). Falls back to
/// Hosking's recursion if the embedding has negative eigenvalues.
std::vector<double> generate_fgn(std::size_t n, double hurst, std::uint64_t seed);

/// Hosking (Durbin-Levinson) generator; O(n^2), exposed for testing.
std::vector<double> generate_fgn_hosking(std::size_t n, double hurst, std::uint64_t seed);

struct HurstOptions {
  std::size_t min_window = 8;
  /// Largest window considered; 0 means half the series length.
  std::size_t max_window = 0;
};

/// Rescaled-range estimate: mean R/S over non-overlapping blocks for each
/// dyadic window size, slope of log(R/S) against log(window). Requires at
/// least 512 samples and two window sizes; throws on zero variance.
double estimate_hurst(const std::vector<double>& series, const HurstOptions& opts = {});

struct UpscaleConfig {
  double hurst = 0.8;
  /// Noise scale relative to sqrt(per-second baseline).
  double amplitude = 1.0;
  std::uint64_t seed = 0;
};

/// Per-minute counts to per-second rates. Each second gets
/// max(0, b + amplitude * sqrt(max(b, 1)) * g) with b = count / 60 and g drawn
/// from one fGn series spanning all minutes; values are rescaled per minute
/// and rounded by largest remainder so every minute keeps its exact count.
SecondSeries upscale(const MinuteSeries& minutes, const UpscaleConfig& cfg = {});

/// Distributes `total` over `weights` proportionally with largest-remainder
/// rounding (ties to the lower index). Zero total weight spreads evenly.
std::vector<std::int64_t> largest_remainder(const std::vector<double>& weights,
                                            std::int64_t total);

enum class PatternKind { kSteady, kFluctuating, kSpikes, kJump, kConstant, kOnOff };

std::string_view to_string(PatternKind k);
std::optional<PatternKind> pattern_kind_from_string(std::string_view name);

/// Invocation pattern parameters. Shape defaults reproduce the four archetypes
/// observed in provider logs plus the constant and on/off baselines.
struct PatternSpec {
  PatternKind kind = PatternKind::kConstant;
  double average_rate = 1.0;  // requests per second
  std::size_t duration = 1200;  // seconds
  std::uint64_t seed = 0;

  double hurst = 0.8;
  double steady_amplitude = 0.25;
  double fluctuating_base = 0.7;
  double fluctuating_amplitude = 1.0;
  double spikes_base = 0.5;
  double spikes_per_20min = 3.0;
  double spike_height = 8.0;  // multiple of average_rate
  std::size_t spike_min_width = 2;
  std::size_t spike_max_width = 5;
  double jump_base = 0.6;
  double jump_level = 2.2;
  std::size_t jump_min_seconds = 180;
  std::size_t jump_max_seconds = 480;
  std::size_t on_seconds = 1;
  std::size_t off_seconds = 3;
};

/// Per-second schedule of the requested shape whose total is
/// round(average_rate * duration). constant spreads floor/ceil of the rate;
/// on_off puts (on+off)/on times the rate into each on-second.
SecondSeries synth_pattern(const PatternSpec& spec);

/// One non-negative count per line; blank lines and '#' comments skipped.
/// With `column` set, lines are comma separated and that column is used.
MinuteSeries read_minute_series(std::istream& in, std::optional<std::size_t> column = {});

/// "second_index,rate" lines with a header.
std::string write_second_series(const SecondSeries& s);
/// Accepts the write_second_series format or bare one-rate-per-line.
SecondSeries read_second_series(std::istream& in);

}  // namespace faastrace
