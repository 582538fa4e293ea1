#include "faastrace/aggregate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "faastrace/csv.h"
#include "json.hpp"

namespace faastrace {
namespace {

std::string fmt_double(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_fraction(double v) { return fmt_double("%.6f", v); }
std::string fmt_percentile(double p) { return fmt_double("%.6g", p); }

template <typename T>
std::array<double, kCategoryCount> fractions_of(const std::array<T, kCategoryCount>& values) {
  std::array<double, kCategoryCount> out{};
  T sum = 0;
  for (auto v : values) sum += v;
  if (sum == 0) return out;
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    out[i] = static_cast<double>(values[i]) / static_cast<double>(sum);
  }
  return out;
}

}  // namespace

std::string RecordFilter::describe() const {
  return std::string("valid,no-exception,cold=") + std::string(to_string(cold));
}

Micros nearest_rank(std::vector<Micros> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile outside [0, 1]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

BreakdownReport summarize(const std::vector<TraceRecord>& records, double percentile,
                          const RecordFilter& filter) {
  BreakdownReport r;
  r.percentile = percentile;
  r.filter = filter.describe();

  std::array<std::vector<Micros>, kCategoryCount> columns;
  std::vector<Micros> e2e;
  for (const auto& rec : records) {
    if (!filter.accepts(rec)) continue;
    for (std::size_t c = 0; c < kCategoryCount; ++c) columns[c].push_back(rec.aggregated[c]);
    e2e.push_back(rec.e2e);
  }
  if (e2e.empty()) throw EmptySetError(r.filter);

  r.samples = e2e.size();
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    r.values[c] = nearest_rank(std::move(columns[c]), percentile);
  }
  r.e2e = nearest_rank(std::move(e2e), percentile);
  r.fractions = fractions_of(r.values);
  return r;
}

namespace {

PenaltyReport difference(std::string description, const BreakdownReport& baseline,
                         const BreakdownReport& treatment) {
  PenaltyReport p;
  p.description = std::move(description);
  p.baseline_samples = baseline.samples;
  p.treatment_samples = treatment.samples;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    p.diff[c] = treatment.values[c] - baseline.values[c];
    p.total += p.diff[c];
  }
  if (p.total != 0) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      p.fractions[c] = static_cast<double>(p.diff[c]) / static_cast<double>(p.total);
    }
  }
  return p;
}

}  // namespace

PenaltyReport cold_penalty(const BreakdownReport& warm, const BreakdownReport& cold) {
  return difference("cold p50 - warm p50", warm, cold);
}

PenaltyReport tail_penalty(const std::vector<TraceRecord>& records) {
  const RecordFilter warm{ColdStatus::kWarm};
  auto median = summarize(records, 0.5, warm);
  auto tail = summarize(records, 0.99, warm);
  auto p = difference("warm p99 - warm p50", median, tail);
  if (median.samples < 100) {
    p.warnings.push_back("only " + std::to_string(median.samples) +
                         " samples; p99 is not meaningful below 100");
  }
  return p;
}

std::vector<TraceRecord> discard_warmup(const std::vector<TraceRecord>& records,
                                        double window_seconds) {
  if (records.empty() || window_seconds <= 0) return records;
  Micros earliest = records.front().wall_time;
  for (const auto& r : records) earliest = std::min(earliest, r.wall_time);
  const auto window = static_cast<Micros>(std::llround(window_seconds * 1e6));
  std::vector<TraceRecord> out;
  for (const auto& r : records) {
    if (r.wall_time - earliest >= window) out.push_back(r);
  }
  return out;
}

std::string aggregate_csv_header() {
  std::string h = "trace_id,wall_time_us,e2e_us,verdict,has_exception,cold";
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    h += ',';
    h += to_string(static_cast<Category>(c));
  }
  return h;
}

std::string aggregate_csv_row(const TraceRecord& r) {
  std::string row = csv::quote(r.trace_id);
  row += ',' + std::to_string(r.wall_time);
  row += ',' + std::to_string(r.e2e);
  row += ',';
  row += to_string(r.verdict);
  row += r.has_exception ? ",1," : ",0,";
  row += to_string(r.cold);
  for (auto v : r.aggregated) row += ',' + std::to_string(v);
  return row;
}

std::vector<TraceRecord> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("aggregate export is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != aggregate_csv_header()) throw std::runtime_error("unexpected aggregate header");

  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6 + kCategoryCount) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(6 + kCategoryCount) + " fields");
    }
    TraceRecord r;
    try {
      r.trace_id = f[0];
      r.wall_time = std::stoll(f[1]);
      r.e2e = std::stoll(f[2]);
      if (f[3] == "valid") r.verdict = Verdict::kValid;
      else if (f[3] == "invalid") r.verdict = Verdict::kInvalid;
      else if (f[3] == "incomplete") r.verdict = Verdict::kIncomplete;
      else throw std::invalid_argument("verdict");
      r.has_exception = f[4] == "1";
      if (f[5] == "warm") r.cold = ColdStatus::kWarm;
      else if (f[5] == "cold") r.cold = ColdStatus::kCold;
      else if (f[5] == "partial") r.cold = ColdStatus::kPartial;
      else throw std::invalid_argument("cold");
      for (std::size_t c = 0; c < kCategoryCount; ++c) r.aggregated[c] = std::stoll(f[6 + c]);
    } catch (const std::logic_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": bad field (" + e.what() + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string breakdown_report_csv(const std::vector<BreakdownReport>& reports) {
  std::ostringstream os;
  os << "statistic,percentile,samples,e2e_us";
  for (std::size_t c = 0; c < kCategoryCount; ++c) os << ',' << to_string(static_cast<Category>(c));
  os << '\n';
  for (const auto& r : reports) {
    os << "value_us," << fmt_percentile(r.percentile) << ',' << r.samples << ',' << r.e2e;
    for (auto v : r.values) os << ',' << v;
    os << '\n';
    os << "fraction," << fmt_percentile(r.percentile) << ',' << r.samples << ',' << r.e2e;
    for (auto v : r.fractions) os << ',' << fmt_fraction(v);
    os << '\n';
  }
  return os.str();
}

std::string penalty_report_csv(const PenaltyReport& p) {
  std::ostringstream os;
  os << "statistic,description,baseline_samples,treatment_samples,total_us";
  for (std::size_t c = 0; c < kCategoryCount; ++c) os << ',' << to_string(static_cast<Category>(c));
  os << '\n';
  const std::string head = csv::quote(p.description) + ',' + std::to_string(p.baseline_samples) +
                           ',' + std::to_string(p.treatment_samples) + ',' +
                           std::to_string(p.total);
  os << "diff_us," << head;
  for (auto v : p.diff) os << ',' << v;
  os << '\n';
  os << "fraction," << head;
  for (auto v : p.fractions) os << ',' << fmt_fraction(v);
  os << '\n';
  return os.str();
}

std::string reports_json(const std::vector<BreakdownReport>& warm, const PenaltyReport& cold,
                         const PenaltyReport& tail) {
  using ojson = nlohmann::ordered_json;
  auto categories = [](const auto& values, bool as_fraction) {
    ojson o = ojson::object();
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      const std::string key(to_string(static_cast<Category>(c)));
      if (as_fraction) {
        // Fixed-precision strings keep the document byte-stable.
        o[key] = fmt_fraction(static_cast<double>(values[c]));
      } else {
        o[key] = values[c];
      }
    }
    return o;
  };
  auto penalty = [&](const PenaltyReport& p) {
    ojson o;
    o["description"] = p.description;
    o["baseline_samples"] = p.baseline_samples;
    o["treatment_samples"] = p.treatment_samples;
    o["total_us"] = p.total;
    o["diff_us"] = categories(p.diff, false);
    o["fraction"] = categories(p.fractions, true);
    o["warnings"] = p.warnings;
    return o;
  };

  ojson doc;
  ojson w = ojson::array();
  for (const auto& r : warm) {
    ojson o;
    o["percentile"] = fmt_percentile(r.percentile);
    o["samples"] = r.samples;
    o["filter"] = r.filter;
    o["e2e_us"] = r.e2e;
    o["value_us"] = categories(r.values, false);
    o["fraction_of_category_sum"] = categories(r.fractions, true);
    w.push_back(std::move(o));
  }
  doc["warm"] = std::move(w);
  doc["cold_penalty"] = penalty(cold);
  doc["tail_penalty"] = penalty(tail);
  return doc.dump(2) + "\n";
}

}  // namespace faastrace
