#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faastrace/aggregate.h"
#include "faastrace/analysis.h"
#include "faastrace/csv.h"
#include "faastrace/io.h"
#include "faastrace/loadcheck.h"
#include "faastrace/synth.h"
#include "faastrace/workload.h"
#include "json.hpp"

namespace faastrace::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

/// Bad invocation or unusable input: exit 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_file(const fs::path& path, std::string_view content) {
  auto out = open_output(path);
  out << content;
  if (!out) throw InputError("cannot write " + path.string());
}

/// Text goes to a file when `path` is set, otherwise to `out`.
void emit(const std::string& path, std::string_view content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::vector<std::string> inputs;
  std::string format = "canonical";
  Micros margin = 1000;
  std::string category_map;
  std::string out_dir = ".";
  std::size_t chunk = 256;
};

/// Yields one trace document at a time. A file whose first non-blank line is
/// a complete JSON value is read as one document per line; otherwise the
/// whole file is a single document.
class DocumentReader {
 public:
  explicit DocumentReader(std::vector<std::string> paths) : paths_(std::move(paths)) {}

  bool next(std::string& doc, std::string& where) {
    while (true) {
      if (!in_) {
        if (file_ >= paths_.size()) return false;
        open(paths_[file_++]);
        if (whole_) {
          doc = std::move(pending_);
          pending_.clear();
          where = current_;
          in_.reset();
          if (doc.find_first_not_of(" \t\r\n") == std::string::npos) continue;
          return true;
        }
        if (!pending_.empty()) {
          doc = std::move(pending_);
          pending_.clear();
          where = current_ + ":" + std::to_string(line_);
          return true;
        }
      }
      std::string line;
      if (!std::getline(*in_, line)) {
        in_.reset();
        continue;
      }
      ++line_;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      doc = std::move(line);
      where = current_ + ":" + std::to_string(line_);
      return true;
    }
  }

 private:
  void open(const std::string& path) {
    current_ = path;
    line_ = 0;
    whole_ = false;
    in_.emplace(open_input(path));
    std::string line;
    while (std::getline(*in_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) break;
    }
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      pending_.clear();
      return;
    }
    if (nlohmann::json::accept(line)) {
      pending_ = std::move(line);
      return;
    }
    whole_ = true;
    std::ostringstream rest;
    rest << line << '\n' << in_->rdbuf();
    pending_ = rest.str();
  }

  std::vector<std::string> paths_;
  std::size_t file_ = 0;
  std::optional<std::ifstream> in_;
  std::string current_;
  std::size_t line_ = 0;
  bool whole_ = false;
  std::string pending_;
};

struct Outcome {
  std::optional<TraceAnalysis> analysis;
  std::string trace_id;
  std::string error;
  std::string where;
};

struct Tally {
  std::size_t documents = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
  std::size_t incomplete = 0;
  std::size_t rejected = 0;
  std::size_t with_exception = 0;
  std::size_t clamped_segments = 0;
  std::array<std::size_t, 3> cold{};
  ojson problems = ojson::array();
};

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  if (o.margin < 0) throw InputError("--margin-us must be non-negative");
  if (o.format != "canonical" && o.format != "xray") throw InputError("unknown format " + o.format);
  AnalysisConfig cfg;
  cfg.temporal.margin = o.margin;
  if (!o.category_map.empty()) {
    try {
      cfg.categories.apply_json(read_file(o.category_map));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  const bool xray = o.format == "xray";

  DocumentReader reader(o.inputs);
  const fs::path dir(o.out_dir);
  auto segments = open_output(dir / "segments.csv");
  auto aggregates = open_output(dir / "aggregates.csv");
  segments << "trace_id,index,start_us,end_us,duration_us,category,owner,case\n";
  aggregates << aggregate_csv_header() << '\n';

  Tally tally;
  std::vector<std::string> docs, wheres;
  std::vector<Outcome> results;

  auto flush = [&] {
    results.assign(docs.size(), {});
    const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Outcome& r = results[k];
      r.where = wheres[k];
      try {
        const ExecutionTrace trace = xray ? import_xray(docs[k]) : parse_canonical(docs[k]);
        r.trace_id = trace.trace_id();
        r.analysis = analyze_trace(trace, cfg);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
    // Serial emission keeps output order equal to input order.
    for (auto& r : results) {
      ++tally.documents;
      if (!r.analysis) {
        ++tally.rejected;
        tally.problems.push_back({{"source", r.where}, {"verdict", "rejected"}, {"error", r.error}});
        continue;
      }
      const TraceAnalysis& a = *r.analysis;
      std::size_t index = 0;
      for (const auto& s : a.breakdown.segments) {
        if (s.duration() == 0) continue;
        segments << csv::quote(r.trace_id) << ',' << index++ << ',' << s.start << ',' << s.end << ','
                 << s.duration() << ',' << to_string(s.category) << ',' << csv::quote(s.owner) << ','
                 << to_string(s.case_label) << '\n';
      }
      aggregates << aggregate_csv_row(a.record) << '\n';
      tally.clamped_segments += a.breakdown.warnings.size();
      ++tally.cold[static_cast<std::size_t>(a.cold.status)];
      if (a.validation.has_exception) ++tally.with_exception;
      switch (a.validation.verdict) {
        case Verdict::kValid: ++tally.valid; break;
        case Verdict::kInvalid: ++tally.invalid; break;
        case Verdict::kIncomplete: ++tally.incomplete; break;
      }
      if (a.validation.verdict != Verdict::kValid) {
        ojson findings = ojson::array();
        for (const auto* list : {&a.validation.structural_errors, &a.validation.temporal_anomalies}) {
          for (const auto& f : *list) {
            findings.push_back({{"code", f.code}, {"span_id", f.span_id}, {"detail", f.detail}});
          }
        }
        tally.problems.push_back({{"source", r.where},
                                  {"trace_id", r.trace_id},
                                  {"verdict", std::string(to_string(a.validation.verdict))},
                                  {"findings", std::move(findings)}});
      }
    }
    docs.clear();
    wheres.clear();
  };

  std::string doc, where;
  while (reader.next(doc, where)) {
    docs.push_back(std::move(doc));
    wheres.push_back(std::move(where));
    if (docs.size() >= o.chunk) flush();
  }
  flush();
  if (tally.documents == 0) throw InputError("no traces in input");

  ojson summary;
  summary["traces"] = tally.documents;
  summary["valid"] = tally.valid;
  summary["invalid"] = tally.invalid;
  summary["incomplete"] = tally.incomplete;
  summary["rejected"] = tally.rejected;
  summary["with_exception"] = tally.with_exception;
  summary["cold_status"] = {{"warm", tally.cold[0]}, {"cold", tally.cold[1]}, {"partial", tally.cold[2]}};
  summary["clamped_segments"] = tally.clamped_segments;
  summary["margin_us"] = o.margin;
  summary["not_valid"] = std::move(tally.problems);
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  out << "analyzed " << tally.documents << " traces: " << tally.valid << " valid, " << tally.invalid
      << " invalid, " << tally.incomplete << " incomplete, " << tally.rejected << " rejected\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::string aggregates;
  std::vector<double> percentiles;
  double warmup_s = 60;
  std::string out_dir = ".";
};

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<double> ps = o.percentiles.empty() ? std::vector<double>{50} : o.percentiles;
  for (double p : ps) {
    if (!(p > 0 && p <= 100)) throw InputError("--percentile must lie in (0, 100]");
  }
  if (o.warmup_s < 0) throw InputError("--warmup-s must be non-negative");

  auto in = open_input(o.aggregates);
  std::vector<TraceRecord> records;
  try {
    records = read_aggregate_csv(in);
  } catch (const std::runtime_error& e) {
    throw InputError(o.aggregates + ": " + e.what());
  }
  const auto kept = discard_warmup(records, o.warmup_s);

  const RecordFilter warm{ColdStatus::kWarm};
  const RecordFilter cold{ColdStatus::kCold};
  std::vector<BreakdownReport> warm_reports;
  for (double p : ps) warm_reports.push_back(summarize(kept, p / 100.0, warm));
  const auto cold_report = cold_penalty(summarize(kept, 0.5, warm), summarize(kept, 0.5, cold));
  const auto tail_report = tail_penalty(kept);

  const fs::path dir(o.out_dir);
  write_file(dir / "warm_breakdown.csv", breakdown_report_csv(warm_reports));
  write_file(dir / "cold_penalty.csv", penalty_report_csv(cold_report));
  write_file(dir / "tail_penalty.csv", penalty_report_csv(tail_report));
  write_file(dir / "report.json", reports_json(warm_reports, cold_report, tail_report));

  for (const auto* r : {&cold_report, &tail_report}) {
    for (const auto& w : r->warnings) err << "warning: " << w << '\n';
  }
  out << "report over " << kept.size() << " of " << records.size() << " records (warmup "
      << o.warmup_s << " s discarded)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- workload

struct UpscaleOptions {
  std::string input;
  std::optional<std::size_t> column;
  UpscaleConfig cfg;
  std::string out;
  bool check = false;
};

int cmd_upscale(const UpscaleOptions& o, std::ostream& out, std::ostream& err) {
  auto in = open_input(o.input);
  MinuteSeries minutes;
  try {
    minutes = read_minute_series(in, o.column);
  } catch (const std::exception& e) {
    throw InputError(o.input + ": " + e.what());
  }
  if (minutes.counts.empty()) throw InputError(o.input + ": no minute counts");
  const SecondSeries seconds = upscale(minutes, o.cfg);

  if (o.check) {
    for (std::size_t m = 0; m < minutes.counts.size(); ++m) {
      std::int64_t sum = 0;
      for (std::size_t s = 0; s < 60; ++s) sum += seconds.rates[m * 60 + s];
      if (sum != minutes.counts[m]) {
        err << "check failed: minute " << m << " sums to " << sum << ", expected "
            << minutes.counts[m] << '\n';
        return kExitInternal;
      }
    }
    err << "check passed: " << minutes.counts.size() << " minute totals preserved\n";
  }
  emit(o.out, write_second_series(seconds), out);
  return kExitOk;
}

int cmd_pattern(const std::string& kind, const PatternSpec& base, const std::string& path,
                std::ostream& out) {
  const auto k = pattern_kind_from_string(kind);
  if (!k) throw InputError("unknown pattern kind " + kind);
  PatternSpec spec = base;
  spec.kind = *k;
  emit(path, write_second_series(synth_pattern(spec)), out);
  return kExitOk;
}

struct LoadOptions {
  std::string planned, sent, executed;
  LoadThresholds thresholds;
  std::string out;
};

SecondSeries load_series(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_second_series(in);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

int cmd_validate_load(const LoadOptions& o, std::ostream& out) {
  if (o.thresholds.deviation < 0 || o.thresholds.normalized_distance < 0)
    throw InputError("thresholds must be non-negative");
  const auto v = validate_load(load_series(o.planned), load_series(o.sent), load_series(o.executed),
                               o.thresholds);
  emit(o.out, load_verdicts_json(v), out);
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  TraceSpec spec;
  std::size_t count = 1;
  Micros skew_us = 0;
  Micros interval_ms = 500;
  std::string out_dir = ".";
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.count == 0) throw InputError("--count must be positive");
  if (o.skew_us < 0) throw InputError("--skew-us must be non-negative");
  const fs::path dir(o.out_dir);
  auto traces = open_output(dir / "traces.jsonl");
  auto truths = open_output(dir / "truth.jsonl");
  for (std::size_t i = 0; i < o.count; ++i) {
    TraceSpec spec = o.spec;
    spec.seed = mix_seed(o.spec.seed, i);
    spec.trace_id = "synth-" + std::to_string(o.spec.seed) + "-" + std::to_string(i);
    spec.start_us = o.spec.start_us + static_cast<Micros>(i) * o.interval_ms * 1000;
    const SynthResult r = generate(spec);
    const ExecutionTrace& t = o.skew_us > 0 ? inject_skew(r.trace, o.skew_us, spec.seed ^ 0x5EEDULL) : r.trace;
    traces << serialize_canonical(t) << '\n';
    truths << ground_truth_json(t.trace_id(), r.truth) << '\n';
  }
  out << "generated " << o.count << " traces in " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical-path latency analysis for serverless request traces"};
  app.require_subcommand(1);

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Validate traces, extract critical paths and breakdowns");
  a->add_option("inputs", analyze.inputs, "Trace files (JSON lines or one document per file)")->required();
  a->add_option("--format", analyze.format, "canonical or xray")->check(CLI::IsMember({"canonical", "xray"}));
  a->add_option("--margin-us", analyze.margin, "Clock-skew tolerance in microseconds");
  a->add_option("--category-map", analyze.category_map, "JSON object overriding kind->category");
  a->add_option("--out-dir", analyze.out_dir, "Directory for segments.csv, aggregates.csv, summary.json");
  a->add_option("--chunk", analyze.chunk, "Traces held in memory at once")->check(CLI::PositiveNumber);

  ReportOptions report;
  auto* r = app.add_subcommand("report", "Warm breakdown, cold-start and tail penalties");
  r->add_option("aggregates", report.aggregates, "aggregates.csv from analyze")->required();
  r->add_option("--percentile", report.percentiles, "Percentile in (0, 100]; repeatable (default 50)");
  r->add_option("--warmup-s", report.warmup_s, "Seconds discarded after the first request");
  r->add_option("--out-dir", report.out_dir, "Directory for the report files");

  UpscaleOptions up;
  std::size_t column = 0;
  auto* u = app.add_subcommand("upscale", "Per-minute counts to per-second rates");
  u->add_option("input", up.input, "Minute counts, one per line")->required();
  auto* col = u->add_option("--column", column, "Zero-based CSV column holding the counts");
  u->add_option("--seed", up.cfg.seed);
  u->add_option("--hurst", up.cfg.hurst)->check(CLI::Range(0.01, 0.99));
  u->add_option("--amplitude", up.cfg.amplitude)->check(CLI::NonNegativeNumber);
  u->add_option("--out", up.out, "Output file (default stdout)");
  u->add_flag("--check", up.check, "Verify every minute total after upscaling");

  PatternSpec pattern;
  std::string pattern_kind, pattern_out;
  auto* p = app.add_subcommand("pattern", "Synthetic per-second invocation schedule");
  p->add_option("kind", pattern_kind, "steady, fluctuating, spikes, jump, constant, on_off")->required();
  p->add_option("--rate", pattern.average_rate, "Average requests per second")->required()->check(CLI::PositiveNumber);
  p->add_option("--duration", pattern.duration, "Seconds")->check(CLI::PositiveNumber);
  p->add_option("--seed", pattern.seed);
  p->add_option("--out", pattern_out, "Output file (default stdout)");

  LoadOptions load;
  auto* v = app.add_subcommand("validate-load", "Compare planned, sent and executed load");
  v->add_option("--planned", load.planned)->required();
  v->add_option("--sent", load.sent)->required();
  v->add_option("--executed", load.executed)->required();
  v->add_option("--radius", load.thresholds.radius, "FastDTW radius");
  v->add_option("--deviation-threshold", load.thresholds.deviation);
  v->add_option("--distance-threshold", load.thresholds.normalized_distance,
                "Maximum DTW distance per aligned step");
  v->add_option("--out", load.out, "Output file (default stdout)");

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Synthetic traces with ground truth");
  s->add_option("--seed", synth.spec.seed);
  s->add_option("--count", synth.count);
  s->add_option("--max-depth", synth.spec.max_depth);
  s->add_option("--max-children", synth.spec.max_children);
  s->add_option("--max-spans", synth.spec.max_spans);
  s->add_option("--async-probability", synth.spec.async_probability);
  s->add_option("--cold-probability", synth.spec.cold_probability);
  s->add_option("--cold-function-fraction", synth.spec.cold_function_fraction);
  s->add_flag("--undetectable-async", synth.spec.undetectable_async);
  s->add_option("--skew-us", synth.skew_us, "Uniform clock noise added to every timestamp");
  s->add_option("--start-us", synth.spec.start_us, "Start of the first request");
  s->add_option("--interval-ms", synth.interval_ms, "Spacing between request starts");
  s->add_option("--out-dir", synth.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (a->parsed()) return cmd_analyze(analyze, out);
    if (r->parsed()) return cmd_report(report, out, err);
    if (u->parsed()) {
      if (col->count() > 0) up.column = column;
      return cmd_upscale(up, out, err);
    }
    if (p->parsed()) return cmd_pattern(pattern_kind, pattern, pattern_out, out);
    if (v->parsed()) return cmd_validate_load(load, out);
    if (s->parsed()) return cmd_synth(synth, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const EmptySetError& e) {
    err << "error: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const TraceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace faastrace::cli
