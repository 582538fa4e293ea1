#include "faastrace/workload.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "faastrace/csv.h"
#include "faastrace/rng.h"

namespace faastrace {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place forward complex DFT.
void dft(std::vector<fftw_complex>& data) {
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), data.data(), data.data(),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

double fgn_autocovariance(std::size_t k, double hurst) {
  const double h2 = 2.0 * hurst;
  const auto kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + std::pow(std::abs(kd - 1.0), h2));
}

void check_fgn_args(std::size_t n, double hurst) {
  if (n == 0) throw std::invalid_argument("fGn length must be at least 1");
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst exponent must lie in (0, 1)");
  if (n > kMaxFgnLength) throw std::length_error("fGn length exceeds memory budget");
}

constexpr std::size_t kMaxHoskingLength = std::size_t{1} << 15;

}  // namespace

double SecondSeries::mean() const {
  if (rates.empty()) return 0.0;
  return static_cast<double>(total()) / static_cast<double>(rates.size());
}

std::int64_t SecondSeries::total() const {
  return std::accumulate(rates.begin(), rates.end(), std::int64_t{0});
}

std::vector<double> generate_fgn(std::size_t n, double hurst, std::uint64_t seed) {
  check_fgn_args(n, hurst);
  std::size_t m = 1;
  while (m < n) m <<= 1;
  const std::size_t big = 2 * m;

  // Eigenvalues of the circulant whose first row embeds the autocovariance.
  std::vector<fftw_complex> buf(big);
  for (std::size_t k = 0; k <= m; ++k) {
    buf[k][0] = fgn_autocovariance(k, hurst);
    buf[k][1] = 0.0;
  }
  for (std::size_t k = 1; k < m; ++k) {
    buf[big - k][0] = buf[k][0];
    buf[big - k][1] = 0.0;
  }
  dft(buf);

  std::vector<double> eig(big);
  double max_eig = 0.0;
  for (std::size_t k = 0; k < big; ++k) {
    eig[k] = buf[k][0];
    max_eig = std::max(max_eig, eig[k]);
  }
  for (auto& e : eig) {
    if (e < -1e-10 * max_eig) return generate_fgn_hosking(n, hurst, seed);
    e = std::max(e, 0.0);
  }

  Rng rng(seed);
  buf[0][0] = std::sqrt(eig[0]) * rng.normal();
  buf[0][1] = 0.0;
  buf[m][0] = std::sqrt(eig[m]) * rng.normal();
  buf[m][1] = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double scale = std::sqrt(eig[k] / 2.0);
    const double re = scale * rng.normal();
    const double im = scale * rng.normal();
    buf[k][0] = re;
    buf[k][1] = im;
    buf[big - k][0] = re;
    buf[big - k][1] = -im;
  }
  dft(buf);

  const double norm = 1.0 / std::sqrt(static_cast<double>(big));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i][0] * norm;
  return out;
}

std::vector<double> generate_fgn_hosking(std::size_t n, double hurst, std::uint64_t seed) {
  check_fgn_args(n, hurst);
  if (n > kMaxHoskingLength) throw std::length_error("fGn length too large for Hosking fallback");

  std::vector<double> gamma(n);
  for (std::size_t k = 0; k < n; ++k) gamma[k] = fgn_autocovariance(k, hurst);

  Rng rng(seed);
  std::vector<double> x(n);
  std::vector<double> phi(n, 0.0), prev(n, 0.0);
  double v = 1.0;
  x[0] = rng.normal();
  for (std::size_t t = 1; t < n; ++t) {
    double acc = gamma[t];
    for (std::size_t j = 1; j < t; ++j) acc -= prev[j] * gamma[t - j];
    const double k = acc / v;
    phi[t] = k;
    for (std::size_t j = 1; j < t; ++j) phi[j] = prev[j] - k * prev[t - j];
    v *= (1.0 - k * k);
    double mean = 0.0;
    for (std::size_t j = 1; j <= t; ++j) mean += phi[j] * x[t - j];
    x[t] = mean + std::sqrt(std::max(v, 0.0)) * rng.normal();
    std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(t) + 1, prev.begin());
  }
  return x;
}

double estimate_hurst(const std::vector<double>& series, const HurstOptions& opts) {
  const std::size_t n = series.size();
  if (n < 512) throw std::invalid_argument("R/S estimate needs at least 512 samples");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw std::invalid_argument("zero variance");
  if (opts.min_window < 2) throw std::invalid_argument("minimum window must be at least 2");

  const std::size_t max_window = opts.max_window == 0 ? n / 2 : std::min(opts.max_window, n);
  std::vector<double> log_w, log_rs;
  for (std::size_t w = opts.min_window; w <= max_window; w *= 2) {
    const std::size_t blocks = n / w;
    double sum_rs = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const double* x = series.data() + b * w;
      double mean = 0.0;
      for (std::size_t i = 0; i < w; ++i) mean += x[i];
      mean /= static_cast<double>(w);
      double cum = 0.0, cmin = 0.0, cmax = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        const double d = x[i] - mean;
        cum += d;
        cmin = std::min(cmin, cum);
        cmax = std::max(cmax, cum);
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(w));
      if (sd <= 0.0) continue;
      sum_rs += (cmax - cmin) / sd;
      ++used;
    }
    if (used == 0 || sum_rs <= 0.0) continue;
    log_w.push_back(std::log(static_cast<double>(w)));
    log_rs.push_back(std::log(sum_rs / static_cast<double>(used)));
  }
  if (log_w.size() < 2) throw std::invalid_argument("R/S estimate needs two usable window sizes");

  const double k = static_cast<double>(log_w.size());
  const double mx = std::accumulate(log_w.begin(), log_w.end(), 0.0) / k;
  const double my = std::accumulate(log_rs.begin(), log_rs.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    sxy += (log_w[i] - mx) * (log_rs[i] - my);
    sxx += (log_w[i] - mx) * (log_w[i] - mx);
  }
  return sxy / sxx;
}

std::vector<std::int64_t> largest_remainder(const std::vector<double>& weights,
                                            std::int64_t total) {
  const std::size_t n = weights.size();
  std::vector<std::int64_t> out(n, 0);
  if (n == 0 || total == 0) return out;
  if (total < 0) throw std::invalid_argument("total must be non-negative");

  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be finite and non-negative");
    sum += w;
  }
  std::vector<double> share(n);
  for (std::size_t i = 0; i < n; ++i) {
    share[i] = sum > 0.0 ? weights[i] / sum * static_cast<double>(total)
                         : static_cast<double>(total) / static_cast<double>(n);
  }

  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int64_t>(std::floor(share[i]));
    assigned += out[i];
  }
  // Floating error can leave the floors a hair above the total.
  for (std::size_t i = n; assigned > total && i-- > 0;) {
    if (out[i] > 0) {
      --out[i];
      --assigned;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return share[a] - std::floor(share[a]) > share[b] - std::floor(share[b]);
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

SecondSeries upscale(const MinuteSeries& minutes, const UpscaleConfig& cfg) {
  if (minutes.counts.empty()) throw std::invalid_argument("minute series is empty");
  if (cfg.amplitude < 0.0) throw std::invalid_argument("amplitude must be non-negative");
  for (auto c : minutes.counts) {
    if (c < 0) throw std::invalid_argument("minute counts must be non-negative");
  }

  const std::size_t n = minutes.counts.size() * 60;
  const std::vector<double> noise = generate_fgn(n, cfg.hurst, cfg.seed);

  SecondSeries out;
  out.origin = SeriesOrigin::kUpscaled;
  out.rates.reserve(n);
  std::vector<double> weights(60);
  for (std::size_t m = 0; m < minutes.counts.size(); ++m) {
    const std::int64_t count = minutes.counts[m];
    if (count == 0) {
      out.rates.insert(out.rates.end(), 60, 0);
      continue;
    }
    const double base = static_cast<double>(count) / 60.0;
    const double scale = cfg.amplitude * std::sqrt(std::max(base, 1.0));
    for (std::size_t s = 0; s < 60; ++s) {
      weights[s] = std::max(0.0, base + scale * noise[m * 60 + s]);
    }
    const auto ints = largest_remainder(weights, count);
    out.rates.insert(out.rates.end(), ints.begin(), ints.end());
  }
  return out;
}

std::string_view to_string(PatternKind k) {
  switch (k) {
    case PatternKind::kSteady: return "steady";
    case PatternKind::kFluctuating: return "fluctuating";
    case PatternKind::kSpikes: return "spikes";
    case PatternKind::kJump: return "jump";
    case PatternKind::kConstant: return "constant";
    case PatternKind::kOnOff: return "on_off";
  }
  return "constant";
}

std::optional<PatternKind> pattern_kind_from_string(std::string_view name) {
  for (auto k : {PatternKind::kSteady, PatternKind::kFluctuating, PatternKind::kSpikes,
                 PatternKind::kJump, PatternKind::kConstant, PatternKind::kOnOff}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

/// total spread over n slots as evenly as integers allow.
std::vector<std::int64_t> spread_evenly(std::size_t n, std::int64_t total) {
  std::vector<std::int64_t> out(n);
  const auto nn = static_cast<std::int64_t>(n);
  for (std::int64_t i = 0; i < nn; ++i) {
    out[static_cast<std::size_t>(i)] = (i + 1) * total / nn - i * total / nn;
  }
  return out;
}

}  // namespace

SecondSeries synth_pattern(const PatternSpec& spec) {
  if (!(spec.average_rate > 0.0)) throw std::invalid_argument("average rate must be positive");
  if (spec.duration == 0) throw std::invalid_argument("duration must be positive");

  const std::size_t n = spec.duration;
  const double rate = spec.average_rate;
  const auto total = static_cast<std::int64_t>(std::llround(rate * static_cast<double>(n)));
  if (total <= 0) throw std::invalid_argument("rate too low: schedule rounds to zero invocations");

  SecondSeries out;
  out.origin = SeriesOrigin::kSynthetic;
  Rng rng(spec.seed);
  std::vector<double> w(n, 0.0);

  switch (spec.kind) {
    case PatternKind::kConstant:
      out.rates = spread_evenly(n, total);
      return out;

    case PatternKind::kOnOff: {
      if (spec.on_seconds == 0) throw std::invalid_argument("on_off needs at least one on-second");
      const std::size_t cycle = spec.on_seconds + spec.off_seconds;
      std::vector<std::size_t> on;
      for (std::size_t s = 0; s < n; ++s) {
        if (s % cycle < spec.on_seconds) on.push_back(s);
      }
      const double height = rate * static_cast<double>(cycle) / static_cast<double>(spec.on_seconds);
      const auto on_total =
          static_cast<std::int64_t>(std::llround(height * static_cast<double>(on.size())));
      const auto burst = spread_evenly(on.size(), on_total);
      out.rates.assign(n, 0);
      for (std::size_t i = 0; i < on.size(); ++i) out.rates[on[i]] = burst[i];
      return out;
    }

    case PatternKind::kSteady: {
      const auto g = generate_fgn(n, spec.hurst, rng.next());
      const double scale = spec.steady_amplitude * std::sqrt(std::max(rate, 1.0));
      for (std::size_t s = 0; s < n; ++s) w[s] = std::max(0.0, rate + scale * g[s]);
      break;
    }

    case PatternKind::kFluctuating: {
      const auto g = generate_fgn(n, spec.hurst, rng.next());
      for (std::size_t s = 0; s < n; ++s) {
        w[s] = spec.fluctuating_base * rate + spec.fluctuating_amplitude * rate * std::max(0.0, g[s]);
      }
      break;
    }

    case PatternKind::kSpikes: {
      std::fill(w.begin(), w.end(), spec.spikes_base * rate);
      const double expected = spec.spikes_per_20min * static_cast<double>(n) / 1200.0;
      const auto spikes = rng.poisson(expected);
      for (std::int64_t k = 0; k < spikes; ++k) {
        const auto width = static_cast<std::size_t>(rng.uniform_int(
            static_cast<std::int64_t>(spec.spike_min_width), static_cast<std::int64_t>(spec.spike_max_width)));
        const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        for (std::size_t s = at; s < std::min(n, at + width); ++s) w[s] = spec.spike_height * rate;
      }
      break;
    }

    case PatternKind::kJump: {
      std::fill(w.begin(), w.end(), spec.jump_base * rate);
      auto len = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(spec.jump_min_seconds),
                                                          static_cast<std::int64_t>(spec.jump_max_seconds)));
      len = std::min(len, n);
      const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - len)));
      for (std::size_t s = at; s < at + len; ++s) w[s] = spec.jump_level * rate;
      break;
    }
  }

  out.rates = largest_remainder(w, total);
  return out;
}

MinuteSeries read_minute_series(std::istream& in, std::optional<std::size_t> column) {
  MinuteSeries out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::string field = line;
    if (column) {
      const auto fields = csv::split(line);
      if (*column >= fields.size()) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": no column " +
                                 std::to_string(*column));
      }
      field = fields[*column];
    }
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(field, &used);
    } catch (const std::logic_error&) {
      // A non-numeric first line is a header when selecting a column.
      if (column && out.counts.empty()) continue;
      throw std::runtime_error("line " + std::to_string(lineno) + ": not an integer");
    }
    if (used != field.size() && field.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": trailing characters");
    }
    if (v < 0) throw std::runtime_error("line " + std::to_string(lineno) + ": negative count");
    out.counts.push_back(v);
  }
  return out;
}

std::string write_second_series(const SecondSeries& s) {
  std::ostringstream os;
  os << "second_index,rate\n";
  for (std::size_t i = 0; i < s.rates.size(); ++i) os << i << ',' << s.rates[i] << '\n';
  return os.str();
}

SecondSeries read_second_series(std::istream& in) {
  SecondSeries out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (lineno == 1 && line == "second_index,rate") continue;
    const auto fields = csv::split(line);
    const std::string& value = fields.size() >= 2 ? fields[1] : fields[0];
    try {
      const auto v = std::stoll(value);
      if (v < 0) throw std::invalid_argument("negative");
      out.rates.push_back(v);
    } catch (const std::logic_error&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": bad rate '" + value + "'");
    }
  }
  return out;
}

}  // namespace faastrace
