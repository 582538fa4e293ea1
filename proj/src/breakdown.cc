#include "faastrace/breakdown.h"

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace faastrace {
namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "computation",
    "external_service",
    "orchestration",
    "trigger",
    "queuing",
    "container_initialization",
    "runtime_initialization",
    "finalization_overhead",
    "instrumentation_overhead",
};

std::size_t idx(SpanKind k) { return static_cast<std::size_t>(k); }
std::size_t idx(SpanContext c) { return static_cast<std::size_t>(c); }

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> category_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::string_view to_string(SegmentCase c) {
  switch (c) {
    case SegmentCase::kWithin: return "Within";
    case SegmentCase::kSync1: return "Sync1";
    case SegmentCase::kSync2: return "Sync2";
    case SegmentCase::kAsync1: return "Async1";
    case SegmentCase::kAsync2: return "Async2";
    case SegmentCase::kTrailing: return "Trailing";
  }
  return "Within";
}

CategoryMap::CategoryMap() {
  auto both = [&](SpanKind k, Category c) { table_[idx(k)] = {c, c}; };
  both(SpanKind::kClient, Category::kOrchestration);
  both(SpanKind::kFunction, Category::kComputation);
  both(SpanKind::kRuntimeInit, Category::kRuntimeInitialization);
  both(SpanKind::kContainerInit, Category::kContainerInitialization);
  both(SpanKind::kExternalService, Category::kExternalService);
  both(SpanKind::kOrchestrator, Category::kOrchestration);
  both(SpanKind::kQueue, Category::kQueuing);
  both(SpanKind::kFinalization, Category::kFinalizationOverhead);
  both(SpanKind::kInstrumentation, Category::kInstrumentationOverhead);
  both(SpanKind::kGeneric, Category::kComputation);
  table_[idx(SpanKind::kFunction)][idx(SpanContext::kTrailing)] = Category::kFinalizationOverhead;
}

void CategoryMap::set(SpanKind kind, SpanContext ctx, Category c) {
  table_[idx(kind)][idx(ctx)] = c;
}

Category CategoryMap::lookup(SpanKind kind, SpanContext ctx) const {
  if (kind == SpanKind::kQueue) return Category::kQueuing;
  return table_[idx(kind)][idx(ctx)];
}

void CategoryMap::apply_json(std::string_view json_object) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_object.begin(), json_object.end());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("category map: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("category map: expected an object");

  auto parse_entry = [](const std::string& key, const nlohmann::json& value) {
    if (!value.is_string()) throw std::invalid_argument("category map: '" + key + "' is not a string");
    auto cat = category_from_string(value.get<std::string>());
    if (!cat) throw std::invalid_argument("category map: unknown category " + value.dump());
    std::string kind_name = key;
    SpanContext ctx = SpanContext::kBody;
    if (auto dot = key.find('.'); dot != std::string::npos) {
      if (key.substr(dot + 1) != "trailing")
        throw std::invalid_argument("category map: unknown context in '" + key + "'");
      kind_name = key.substr(0, dot);
      ctx = SpanContext::kTrailing;
    }
    auto kind = span_kind_from_string(kind_name);
    if (!kind) throw std::invalid_argument("category map: unknown span kind '" + kind_name + "'");
    return std::tuple{*kind, ctx, *cat};
  };

  // Body entries first so explicit ".trailing" entries win.
  for (const auto& [key, value] : doc.items()) {
    if (key.find('.') != std::string::npos) continue;
    auto [kind, ctx, cat] = parse_entry(key, value);
    table_[idx(kind)] = {cat, cat};
  }
  for (const auto& [key, value] : doc.items()) {
    if (key.find('.') == std::string::npos) continue;
    auto [kind, ctx, cat] = parse_entry(key, value);
    set(kind, ctx, cat);
  }
}

namespace {

class SegmentWriter {
 public:
  SegmentWriter(const ExecutionTrace& trace, const CategoryMap& map, LatencyBreakdown& out)
      : trace_(trace), map_(map), out_(out), cursor_(out.e2e_start) {}

  Micros cursor() const { return cursor_; }

  void span_to(Micros to, std::size_t owner, SpanContext ctx, SegmentCase c) {
    const TraceSpan& s = trace_.span(owner);
    emit(to, map_.lookup(s.kind, ctx), s.id, c);
  }

  void gap_to(Micros to) {
    emit(to, Category::kTrigger, std::string(kGapOwner), SegmentCase::kAsync2);
  }

 private:
  void emit(Micros to, Category cat, std::string owner, SegmentCase c) {
    if (to < cursor_) {
      out_.warnings.push_back({"clamped_segment", owner, std::to_string(cursor_ - to)});
      to = cursor_;
    }
    out_.segments.push_back({cursor_, to, cat, std::move(owner), c});
    cursor_ = to;
  }

  const ExecutionTrace& trace_;
  const CategoryMap& map_;
  LatencyBreakdown& out_;
  Micros cursor_;
};

}  // namespace

LatencyBreakdown extract_breakdown(const ExecutionTrace& trace, const CriticalPath& path,
                                   const TemporalConfig& cfg, const CategoryMap& map) {
  const auto& p = path.spans;
  if (p.empty() || p.front() != trace.root()) {
    throw TraceError("path/trace mismatch: path does not start at the root");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] >= trace.size()) throw TraceError("path/trace mismatch: span index out of range");
    if (k == 0) continue;
    const std::size_t parent = trace.parent(p[k]);
    if (parent == kNoParent || !trace.is_ancestor_or_self(parent, p[k - 1])) {
      throw TraceError("path/trace mismatch: not a pre-order walk", trace.span(p[k]).id);
    }
  }

  LatencyBreakdown out;
  out.e2e_start = path.e2e_start;
  out.e2e_end = path.e2e_end;
  SegmentWriter w(trace, map, out);

  // Time from the owner's cursor position up to the start of its child.
  auto enter_child = [&](std::size_t owner, std::size_t child, bool via_ancestor) {
    const TraceSpan& o = trace.span(owner);
    const TraceSpan& c = trace.span(child);
    if (!is_async(o, c, cfg)) {
      w.span_to(c.start, owner, SpanContext::kBody,
                via_ancestor ? SegmentCase::kSync2 : SegmentCase::kSync1);
    } else if (c.start <= o.end + cfg.margin) {
      w.span_to(c.start, owner, SpanContext::kBody, SegmentCase::kAsync1);
    } else {
      w.span_to(o.end, owner, SpanContext::kBody, SegmentCase::kAsync2);
      w.gap_to(c.start);
    }
  };

  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const std::size_t current = p[k];
    const std::size_t next = p[k + 1];
    const std::size_t parent = trace.parent(next);
    if (parent == current) {
      enter_child(current, next, false);
      continue;
    }
    w.span_to(trace.span(current).end, current, SpanContext::kBody, SegmentCase::kWithin);
    for (std::size_t a = trace.parent(current); a != parent; a = trace.parent(a)) {
      if (trace.span(a).end > w.cursor()) {
        w.span_to(trace.span(a).end, a, SpanContext::kTrailing, SegmentCase::kTrailing);
      }
    }
    enter_child(parent, next, true);
  }

  const std::size_t last = p.back();
  w.span_to(trace.span(last).end, last, SpanContext::kBody, SegmentCase::kWithin);
  for (std::size_t a = trace.parent(last); a != kNoParent; a = trace.parent(a)) {
    if (trace.span(a).end > w.cursor()) {
      w.span_to(std::min(trace.span(a).end, out.e2e_end), a, SpanContext::kTrailing,
                SegmentCase::kTrailing);
    }
  }
  if (w.cursor() < out.e2e_end) {
    w.span_to(out.e2e_end, trace.root(), SpanContext::kTrailing, SegmentCase::kTrailing);
  }
  return out;
}

AggregatedBreakdown aggregate(const LatencyBreakdown& b) {
  AggregatedBreakdown a{};
  for (const auto& s : b.segments) a[static_cast<std::size_t>(s.category)] += s.duration();
  return a;
}

}  // namespace faastrace
