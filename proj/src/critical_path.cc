#include "faastrace/critical_path.h"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace faastrace {

bool happens_before(const TraceSpan& current, const TraceSpan& next, const TemporalConfig& cfg) {
  return current.end < next.start + cfg.margin;
}

bool is_async(const TraceSpan& current, const TraceSpan& next, const TemporalConfig& cfg) {
  return next.end > current.end + cfg.margin;
}

std::size_t last_ending_span(const ExecutionTrace& trace) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& a = trace.span(i);
    const auto& b = trace.span(best);
    if (std::tie(a.end, a.start, a.id) > std::tie(b.end, b.start, b.id)) best = i;
  }
  return best;
}

AncestorStack build_stack(const ExecutionTrace& trace) {
  std::vector<std::size_t> items;
  for (std::size_t i = last_ending_span(trace); i != kNoParent; i = trace.parent(i)) {
    items.push_back(i);
  }
  return AncestorStack(std::move(items));
}

std::vector<std::string> CriticalPath::ids(const ExecutionTrace& trace) const {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (auto i : spans) out.push_back(trace.span(i).id);
  return out;
}

namespace {

struct Frame {
  std::size_t span;
  std::vector<std::size_t> sorted;  // children by (end, start, id)
  std::size_t next = 0;             // next non-last child to consider
  bool final_done = false;
};

}  // namespace

CriticalPath extract(const ExecutionTrace& trace, const TemporalConfig& cfg) {
  if (cfg.margin < 0) throw std::invalid_argument("margin must be non-negative");
  if (trace.size() == 0) throw TraceError("empty trace");

  AncestorStack stack = build_stack(trace);
  CriticalPath path;
  const auto& spans = trace.spans();

  auto by_end_then_start = [&](std::size_t a, std::size_t b) {
    const auto& x = spans[a];
    const auto& y = spans[b];
    return std::tie(x.end, x.start, x.id) < std::tie(y.end, y.start, y.id);
  };

  std::vector<Frame> frames;
  auto enter = [&](std::size_t span) {
    path.spans.push_back(span);
    if (!stack.empty() && stack.top() == span) stack.pop();
    Frame f{span, trace.children(span)};
    std::sort(f.sorted.begin(), f.sorted.end(), by_end_then_start);
    frames.push_back(std::move(f));
  };

  enter(trace.root());
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.sorted.empty()) {
      frames.pop_back();
      continue;
    }
    const TraceSpan& current = spans[f.span];
    const std::size_t last = f.sorted.back();

    bool descended = false;
    while (f.next + 1 < f.sorted.size()) {
      const std::size_t child = f.sorted[f.next++];
      if (happens_before(spans[child], spans[last], cfg) &&
          !is_async(current, spans[path.spans.back()], cfg)) {
        enter(child);  // invalidates f
        descended = true;
        break;
      }
    }
    if (descended) continue;

    if (!f.final_done) {
      f.final_done = true;
      const bool last_async = is_async(current, spans[last], cfg);
      const bool tail_async = is_async(current, spans[path.spans.back()], cfg);
      if ((last_async && !stack.empty() && stack.top() == last) || (!last_async && !tail_async)) {
        enter(last);
        continue;
      }
    }
    frames.pop_back();
  }

  path.e2e_start = spans[trace.root()].start;
  path.e2e_end = path.e2e_start;
  for (auto i : path.spans) path.e2e_end = std::max(path.e2e_end, spans[i].end);
  return path;
}

}  // namespace faastrace
