#include "faastrace/synth.h"

#include <algorithm>
#include <stdexcept>

#include "faastrace/rng.h"
#include "json.hpp"

namespace faastrace {

std::array<double, kSpanKindCount> TraceSpec::default_service_mix() {
  std::array<double, kSpanKindCount> mix{};
  mix[static_cast<std::size_t>(SpanKind::kFunction)] = 0.35;
  mix[static_cast<std::size_t>(SpanKind::kExternalService)] = 0.35;
  mix[static_cast<std::size_t>(SpanKind::kOrchestrator)] = 0.10;
  mix[static_cast<std::size_t>(SpanKind::kQueue)] = 0.10;
  mix[static_cast<std::size_t>(SpanKind::kInstrumentation)] = 0.05;
  mix[static_cast<std::size_t>(SpanKind::kGeneric)] = 0.05;
  return mix;
}

namespace {

constexpr Micros kMinSpan = 2000;
constexpr Micros kMaxLeaf = 40000;
constexpr Micros kMaxCallGap = 5000;
constexpr Micros kMinTail = 2000;
constexpr Micros kMaxTail = 10000;
// Async children outlive their parent by at least this much, and the span
// ending last leads the runner-up by the same amount.
constexpr Micros kEndLead = 3000;

bool can_call(SpanKind k) {
  return k == SpanKind::kFunction || k == SpanKind::kOrchestrator || k == SpanKind::kClient ||
         k == SpanKind::kGeneric;
}

bool sync_role(InvocationRole r) {
  return r == InvocationRole::kSync || r == InvocationRole::kAsyncHidden;
}

std::string_view short_name(SpanKind k) {
  switch (k) {
    case SpanKind::kFunction: return "fn";
    case SpanKind::kOrchestrator: return "orch";
    case SpanKind::kExternalService: return "svc";
    case SpanKind::kQueue: return "queue";
    case SpanKind::kRuntimeInit: return "runtime-init";
    case SpanKind::kContainerInit: return "container-init";
    case SpanKind::kInstrumentation: return "instr";
    default: return to_string(k);
  }
}

class Generator {
 public:
  explicit Generator(const TraceSpec& spec) : spec_(spec), rng_(spec.seed) {
    double total = 0.0;
    for (double w : spec.service_mix) {
      if (w < 0.0) throw std::invalid_argument("service_mix weights must be non-negative");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("service_mix has no positive weight");
    if (spec.max_spans == 0) throw std::invalid_argument("max_spans must be positive");
    if (spec.max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (spec.max_children < 0) throw std::invalid_argument("max_children must be non-negative");
    for (double p : {spec.async_probability, spec.overlap_probability, spec.cold_probability,
                     spec.cold_function_fraction}) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
    if (spec.trigger_gap_min < kEndLead || spec.trigger_gap_max < spec.trigger_gap_min)
      throw std::invalid_argument("trigger gap range must satisfy 3000 <= min <= max");
    cold_request_ = rng_.bernoulli(spec.cold_probability);
  }

  SynthResult run() {
    const SpanKind root_kind = rng_.bernoulli(0.3) ? SpanKind::kOrchestrator : SpanKind::kFunction;
    grow(root_kind, kNoParent, spec_.start_us, 1, 0, InvocationRole::kRoot);
    settle_last();

    std::string trace_id = spec_.trace_id.empty() ? "synth-" + std::to_string(spec_.seed) : spec_.trace_id;
    GroundTruth truth;
    truth.roles = roles_;
    truth.has_undetectable =
        std::find(roles_.begin(), roles_.end(), InvocationRole::kAsyncHidden) != roles_.end();
    build_truth(truth);
    return {ExecutionTrace::build(std::move(trace_id), spans_), std::move(truth)};
  }

 private:
  std::size_t add(SpanKind kind, std::size_t parent, Micros start, InvocationRole role) {
    const std::size_t i = spans_.size();
    TraceSpan s;
    s.id = "s" + std::to_string(i);
    if (parent != kNoParent) s.parent_id = spans_[parent].id;
    s.name = std::string(short_name(kind)) + "-" + std::to_string(i);
    s.kind = kind;
    s.start = start;
    s.end = start;
    spans_.push_back(std::move(s));
    parent_.push_back(parent);
    children_.emplace_back();
    roles_.push_back(role);
    cold_.push_back(false);
    calls_end_.push_back(start);
    if (parent != kNoParent) children_[parent].push_back(i);
    return i;
  }

  // One span stays in reserve for settle_last.
  bool budget(std::size_t n = 1) const { return spans_.size() + n + 1 <= spec_.max_spans; }

  SpanKind draw_kind() {
    double total = 0.0;
    for (double w : spec_.service_mix) total += w;
    double u = rng_.uniform() * total;
    for (std::size_t k = 0; k < kSpanKindCount; ++k) {
      if (spec_.service_mix[k] <= 0.0) continue;
      if (u < spec_.service_mix[k]) return static_cast<SpanKind>(k);
      u -= spec_.service_mix[k];
    }
    for (std::size_t k = kSpanKindCount; k-- > 0;) {
      if (spec_.service_mix[k] > 0.0) return static_cast<SpanKind>(k);
    }
    return SpanKind::kGeneric;
  }

  Micros between(Micros lo, Micros hi) {
    return rng_.uniform_int(lo, hi);
  }

  std::size_t leaf(SpanKind kind, std::size_t parent, Micros start, Micros lo, Micros hi) {
    const std::size_t i = add(kind, parent, start, InvocationRole::kSync);
    spans_[i].end = start + between(lo, hi);
    return i;
  }

  /// Simulates one span's timeline and returns its index. `min_end` forces the
  /// span to outlive a deadline (used for asynchronous children).
  std::size_t grow(SpanKind kind, std::size_t parent, Micros start, int depth, Micros min_end,
                   InvocationRole role) {
    const std::size_t self = add(kind, parent, start, role);
    Micros t = start;

    if (kind == SpanKind::kFunction && cold_request_ && spec_.max_depth > 1 && budget(2) &&
        rng_.bernoulli(spec_.cold_function_fraction)) {
      cold_[self] = true;
      t += between(0, 1000);
      t = spans_[leaf(SpanKind::kContainerInit, self, t, 50000, 150000)].end;
      t += between(0, 1000);
      t = spans_[leaf(SpanKind::kRuntimeInit, self, t, 80000, 250000)].end;
    }

    bool trigger_async = false;
    if (can_call(kind) && depth < spec_.max_depth) {
      const auto calls = rng_.uniform_int(0, spec_.max_children);
      for (int c = 0; c < calls && budget(); ++c) {
        t += between(0, kMaxCallGap);
        if (spec_.undetectable_async && rng_.bernoulli(0.15)) {
          // Fire-and-forget call that happens to finish before the caller moves on.
          const std::size_t h = grow(SpanKind::kFunction, self, t, depth + 1, 0, InvocationRole::kAsyncHidden);
          t = spans_[h].end;
          continue;
        }
        const SpanKind ck = draw_kind();
        const std::size_t ch = can_call(ck) ? grow(ck, self, t, depth + 1, 0, InvocationRole::kSync)
                                            : leaf(ck, self, t, kMinSpan, kMaxLeaf);
        t = spans_[ch].end;
      }
      trigger_async = budget() && rng_.bernoulli(spec_.async_probability);
    }

    calls_end_[self] = t;
    Micros end = t == start ? start + between(kMinSpan, kMaxLeaf) : t + between(kMinTail, kMaxTail);
    end = std::max(end, min_end);
    spans_[self].end = end;

    if (trigger_async) {
      const SpanKind ak = rng_.bernoulli(0.8) ? SpanKind::kFunction : SpanKind::kOrchestrator;
      if (rng_.bernoulli(spec_.overlap_probability)) {
        grow(ak, self, between(t, end), depth + 1, end + kEndLead, InvocationRole::kAsyncOverlap);
      } else {
        const Micros a_start = end + between(spec_.trigger_gap_min, spec_.trigger_gap_max);
        grow(ak, self, a_start, depth + 1, a_start + kMinSpan, InvocationRole::kAsyncGap);
      }
    }
    return self;
  }

  std::size_t latest() const {
    std::size_t last = 0;
    for (std::size_t i = 1; i < spans_.size(); ++i) {
      if (spans_[i].end > spans_[last].end) last = i;
    }
    return last;
  }

  /// The latest-ending span must be a leaf that ends clearly after everything
  /// else; otherwise the path tail inside its subtree can finish early and make
  /// later siblings of its ancestors look sequential. A span with children gets
  /// one more asynchronous service call, which then ends the request.
  void settle_last() {
    std::size_t last = latest();
    if (!children_[last].empty()) {
      const Micros end = spans_[last].end;
      const std::size_t a = add(SpanKind::kExternalService, last, between(calls_end_[last], end),
                                InvocationRole::kAsyncOverlap);
      spans_[a].end = std::max(spans_[a].start + between(kMinSpan, kMaxLeaf), end + kEndLead);
      last = a;
    }
    Micros runner_up = spans_[0].start;
    for (std::size_t i = 0; i < spans_.size(); ++i) {
      if (i != last) runner_up = std::max(runner_up, spans_[i].end);
    }
    spans_[last].end = std::max(spans_[last].end, runner_up + kEndLead);
    last_ = last;
  }

  bool on_chain(std::size_t i) const {
    for (std::size_t a = last_; a != kNoParent; a = parent_[a]) {
      if (a == i) return true;
    }
    return false;
  }

  void collect_path(std::size_t root, std::vector<std::size_t>& out) const {
    // Explicit stack of (span, next child position).
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    out.push_back(root);
    while (!stack.empty()) {
      auto& [s, pos] = stack.back();
      if (pos >= children_[s].size()) {
        stack.pop_back();
        continue;
      }
      const std::size_t c = children_[s][pos++];
      if (on_chain(c)) {
        pos = children_[s].size();  // later siblings happen after the chain moves on
      } else if (!sync_role(roles_[c])) {
        continue;
      }
      out.push_back(c);
      stack.emplace_back(c, 0);
    }
  }

  SegmentCase entry_case(std::size_t child, bool via_ancestor) const {
    switch (roles_[child]) {
      case InvocationRole::kAsyncOverlap: return SegmentCase::kAsync1;
      case InvocationRole::kAsyncGap: return SegmentCase::kAsync2;
      default: return via_ancestor ? SegmentCase::kSync2 : SegmentCase::kSync1;
    }
  }

  void build_truth(GroundTruth& truth) const {
    std::vector<std::size_t> path;
    collect_path(0, path);
    for (auto i : path) truth.expected_path.push_back(spans_[i].id);

    const CategoryMap map;
    Micros e2e_end = spans_[0].start;
    for (auto i : path) e2e_end = std::max(e2e_end, spans_[i].end);
    Micros cursor = spans_[0].start;
    auto& segs = truth.expected_segments;
    auto emit = [&](Micros to, Category cat, std::string owner, SegmentCase c) {
      to = std::max(to, cursor);
      segs.push_back({cursor, to, cat, std::move(owner), c});
      cursor = to;
      ++truth.case_counts[static_cast<std::size_t>(c)];
    };
    auto own = [&](std::size_t s, Micros to, SpanContext ctx, SegmentCase c) {
      emit(to, map.lookup(spans_[s].kind, ctx), spans_[s].id, c);
    };
    auto enter = [&](std::size_t owner, std::size_t child, bool via_ancestor) {
      const SegmentCase c = entry_case(child, via_ancestor);
      if (c == SegmentCase::kAsync2) {
        own(owner, spans_[owner].end, SpanContext::kBody, c);
        emit(spans_[child].start, Category::kTrigger, std::string(kGapOwner), c);
      } else {
        own(owner, spans_[child].start, SpanContext::kBody, c);
      }
    };

    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t cur = path[k];
      const std::size_t next = path[k + 1];
      const std::size_t p = parent_[next];
      if (p == cur) {
        enter(cur, next, false);
        continue;
      }
      own(cur, spans_[cur].end, SpanContext::kBody, SegmentCase::kWithin);
      for (std::size_t a = parent_[cur]; a != p; a = parent_[a]) {
        if (spans_[a].end > cursor) own(a, spans_[a].end, SpanContext::kTrailing, SegmentCase::kTrailing);
      }
      enter(p, next, true);
    }
    const std::size_t last = path.back();
    own(last, spans_[last].end, SpanContext::kBody, SegmentCase::kWithin);
    for (std::size_t a = parent_[last]; a != kNoParent; a = parent_[a]) {
      if (spans_[a].end > cursor)
        own(a, std::min(spans_[a].end, e2e_end), SpanContext::kTrailing, SegmentCase::kTrailing);
    }

    std::size_t functions = 0, cold = 0;
    for (auto i : path) {
      if (spans_[i].kind != SpanKind::kFunction) continue;
      ++functions;
      if (cold_[i]) ++cold;
    }
    truth.expected_cold = cold == 0 ? ColdStatus::kWarm
                          : cold == functions ? ColdStatus::kCold
                                              : ColdStatus::kPartial;
  }

  const TraceSpec& spec_;
  Rng rng_;
  bool cold_request_ = false;
  std::vector<TraceSpan> spans_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<InvocationRole> roles_;
  std::vector<bool> cold_;
  std::vector<Micros> calls_end_;
  std::size_t last_ = 0;
};

}  // namespace

SynthResult generate(const TraceSpec& spec) { return Generator(spec).run(); }

ExecutionTrace inject_skew(const ExecutionTrace& trace, Micros magnitude, std::uint64_t seed) {
  if (magnitude < 0) throw std::invalid_argument("skew magnitude must be non-negative");
  Rng rng(seed);
  auto noise = [&] {
    return rng.uniform_int(-magnitude, magnitude);
  };
  std::vector<TraceSpan> spans = trace.spans();
  for (auto& s : spans) {
    s.start += noise();
    s.end += noise();
    s.end = std::max(s.end, s.start);
  }
  return ExecutionTrace::build(trace.trace_id(), std::move(spans), trace.ingest_findings());
}

std::string ground_truth_json(const std::string& trace_id, const GroundTruth& truth) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  doc["trace_id"] = trace_id;
  doc["expected_path"] = truth.expected_path;
  doc["expected_cold"] = std::string(to_string(truth.expected_cold));
  doc["has_undetectable"] = truth.has_undetectable;
  ojson segs = ojson::array();
  for (const auto& s : truth.expected_segments) {
    segs.push_back({{"start_us", s.start},
                    {"end_us", s.end},
                    {"category", std::string(to_string(s.category))},
                    {"owner", s.owner},
                    {"case", std::string(to_string(s.case_label))}});
  }
  doc["expected_segments"] = std::move(segs);
  return doc.dump();
}

}  // namespace faastrace
