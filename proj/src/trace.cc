#include "faastrace/trace.h"

#include <array>
#include <utility>

namespace faastrace {
namespace {

constexpr std::array<std::string_view, kSpanKindCount> kKindNames = {
    "client",   "function", "runtime_init",  "container_init",  "external_service",
    "orchestrator", "queue", "finalization", "instrumentation", "generic",
};

}  // namespace

std::string_view to_string(SpanKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<SpanKind> span_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<SpanKind>(i);
  }
  return std::nullopt;
}

ExecutionTrace ExecutionTrace::build(std::string trace_id, std::vector<TraceSpan> spans,
                                     std::vector<Finding> ingest_findings) {
  if (spans.empty()) throw TraceError("trace has no spans");

  ExecutionTrace t;
  t.trace_id_ = std::move(trace_id);
  t.spans_ = std::move(spans);
  t.ingest_findings_ = std::move(ingest_findings);

  const std::size_t n = t.spans_.size();
  t.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = t.spans_[i];
    if (s.id.empty()) throw TraceError("empty span id");
    if (!t.index_.emplace(s.id, i).second) throw TraceError("duplicate span id", s.id);
  }

  t.parent_.assign(n, kNoParent);
  t.children_.assign(n, {});
  bool have_root = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = t.spans_[i];
    if (!s.parent_id) {
      if (have_root) throw TraceError("multiple roots", s.id);
      have_root = true;
      t.root_ = i;
      continue;
    }
    auto it = t.index_.find(*s.parent_id);
    if (it == t.index_.end()) throw TraceError("unresolved parent", s.id);
    if (it->second == i) throw TraceError("span is its own parent", s.id);
    t.parent_[i] = it->second;
    t.children_[it->second].push_back(i);
  }
  if (!have_root) throw TraceError("no root span");

  // Iterative DFS from the root; anything unreached sits on a cycle.
  t.enter_.assign(n, 0);
  t.exit_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (node, next child)
  std::uint32_t clock = 0;
  stack.emplace_back(t.root_, 0);
  seen[t.root_] = true;
  t.enter_[t.root_] = clock++;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < t.children_[node].size()) {
      const std::size_t c = t.children_[node][next++];
      seen[c] = true;
      t.enter_[c] = clock++;
      stack.emplace_back(c, 0);
    } else {
      t.exit_[node] = clock++;
      stack.pop_back();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw TraceError("parent cycle", t.spans_[i].id);
  }
  return t;
}

std::optional<std::size_t> ExecutionTrace::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool ExecutionTrace::is_ancestor_or_self(std::size_t ancestor, std::size_t node) const {
  return enter_[ancestor] <= enter_[node] && exit_[node] <= exit_[ancestor];
}

}  // namespace faastrace
