#include "faastrace/io.h"

#include <cmath>

#include "json.hpp"

namespace faastrace {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::exception& e) {
    throw TraceError(std::string("malformed document: ") + e.what());
  }
}

std::string string_field(const json& obj, const char* key, const std::string& span_id) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw TraceError(std::string("field '") + key + "' is not a string", span_id);
  return it->get<std::string>();
}

Micros int_field(const json& obj, const char* key, const std::string& span_id) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer())
    throw TraceError(std::string("missing integer field '") + key + "'", span_id);
  return it->get<Micros>();
}

Micros seconds_to_micros(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

ExecutionTrace parse_canonical(std::string_view document) {
  const json doc = parse_json(document);
  if (!doc.is_object()) throw TraceError("malformed document: expected an object");
  auto spans_it = doc.find("spans");
  if (spans_it == doc.end() || !spans_it->is_array())
    throw TraceError("malformed document: missing 'spans' array");

  std::vector<TraceSpan> spans;
  std::vector<Finding> findings;
  spans.reserve(spans_it->size());
  for (const auto& js : *spans_it) {
    if (!js.is_object()) throw TraceError("malformed document: span is not an object");
    TraceSpan s;
    s.id = string_field(js, "id", {});
    if (s.id.empty()) throw TraceError("empty span id");
    if (auto p = js.find("parent_id"); p != js.end() && !p->is_null()) {
      if (!p->is_string()) throw TraceError("field 'parent_id' is not a string", s.id);
      s.parent_id = p->get<std::string>();
    }
    s.name = string_field(js, "name", s.id);
    const std::string kind = string_field(js, "kind", s.id);
    if (auto k = span_kind_from_string(kind)) {
      s.kind = *k;
    } else {
      s.kind = SpanKind::kGeneric;
      findings.push_back({"unknown_kind", s.id, kind});
    }
    s.start = int_field(js, "start_us", s.id);
    s.end = int_field(js, "end_us", s.id);
    s.error = js.value("error", false);
    s.in_progress = js.value("in_progress", false);
    if (s.in_progress) findings.push_back({"in_progress", s.id, "span has no end time"});
    if (auto a = js.find("attributes"); a != js.end() && a->is_object()) {
      for (const auto& [k, v] : a->items()) {
        s.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    spans.push_back(std::move(s));
  }
  return ExecutionTrace::build(string_field(doc, "trace_id", {}), std::move(spans),
                               std::move(findings));
}

std::string serialize_canonical(const ExecutionTrace& trace) {
  ordered_json doc;
  doc["trace_id"] = trace.trace_id();
  ordered_json spans = ordered_json::array();
  for (const auto& s : trace.spans()) {
    ordered_json js;
    js["id"] = s.id;
    if (s.parent_id) js["parent_id"] = *s.parent_id;
    js["name"] = s.name;
    js["kind"] = std::string(to_string(s.kind));
    js["start_us"] = s.start;
    js["end_us"] = s.end;
    js["error"] = s.error;
    if (s.in_progress) js["in_progress"] = true;
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : s.attributes) attrs[k] = v;
    js["attributes"] = std::move(attrs);
    spans.push_back(std::move(js));
  }
  doc["spans"] = std::move(spans);
  return doc.dump();
}

KindMapping KindMapping::defaults() {
  return KindMapping({
      {XRayField::kName, "Initialization", SpanKind::kRuntimeInit},
      {XRayField::kName, "Invocation", SpanKind::kFunction},
      {XRayField::kName, "Overhead", SpanKind::kFinalization},
      {XRayField::kOrigin, "AWS::Lambda::Function", SpanKind::kFunction},
      {XRayField::kOrigin, "AWS::Lambda", SpanKind::kOrchestrator},
      {XRayField::kOrigin, "AWS::ApiGateway::Stage", SpanKind::kOrchestrator},
      {XRayField::kOrigin, "AWS::StepFunctions::StateMachine", SpanKind::kOrchestrator},
      {XRayField::kOrigin, "AWS::SQS::Queue", SpanKind::kQueue},
      {XRayField::kNamespace, "aws", SpanKind::kExternalService},
      {XRayField::kNamespace, "remote", SpanKind::kExternalService},
  });
}

void KindMapping::prepend(std::vector<KindRule> rules) {
  rules.insert(rules.end(), rules_.begin(), rules_.end());
  rules_ = std::move(rules);
}

SpanKind KindMapping::classify(std::string_view name, std::string_view origin,
                               std::string_view ns) const {
  for (const auto& r : rules_) {
    std::string_view field;
    switch (r.field) {
      case XRayField::kName: field = name; break;
      case XRayField::kOrigin: field = origin; break;
      case XRayField::kNamespace: field = ns; break;
    }
    if (!field.empty() && field == r.value) return r.kind;
  }
  return SpanKind::kGeneric;
}

namespace {

struct XRayFlattener {
  const KindMapping& mapping;
  std::vector<TraceSpan> spans;
  std::vector<Finding> findings;
  std::string trace_id;

  void add(const json& seg, const std::optional<std::string>& enclosing) {
    if (!seg.is_object()) throw TraceError("malformed document: segment is not an object");
    TraceSpan s;
    s.id = string_field(seg, "id", {});
    if (s.id.empty()) throw TraceError("empty span id");
    if (enclosing) {
      s.parent_id = enclosing;
    } else if (auto p = seg.find("parent_id"); p != seg.end() && p->is_string()) {
      s.parent_id = p->get<std::string>();
    }
    if (trace_id.empty()) trace_id = string_field(seg, "trace_id", s.id);
    s.name = string_field(seg, "name", s.id);
    const std::string origin = string_field(seg, "origin", s.id);
    const std::string ns = string_field(seg, "namespace", s.id);
    s.kind = mapping.classify(s.name, origin, ns);
    if (!origin.empty()) s.attributes["origin"] = origin;
    if (!ns.empty()) s.attributes["namespace"] = ns;

    auto st = seg.find("start_time");
    if (st == seg.end() || !st->is_number()) throw TraceError("missing start_time", s.id);
    s.start = seconds_to_micros(st->get<double>());
    auto en = seg.find("end_time");
    if (en == seg.end() || !en->is_number() || seg.value("in_progress", false)) {
      s.end = s.start;
      s.in_progress = true;
      findings.push_back({"in_progress", s.id, "record has no end_time"});
    } else {
      s.end = seconds_to_micros(en->get<double>());
    }
    s.error = seg.value("error", false) || seg.value("fault", false) ||
              seg.value("throttle", false);

    const std::string id = s.id;
    spans.push_back(std::move(s));
    if (auto subs = seg.find("subsegments"); subs != seg.end() && subs->is_array()) {
      for (const auto& sub : *subs) add(sub, id);
    }
  }
};

}  // namespace

ExecutionTrace import_xray(std::string_view document, const KindMapping& mapping) {
  const json doc = parse_json(document);
  XRayFlattener flat{mapping, {}, {}, {}};

  auto add_all = [&](const json& arr) {
    for (const auto& seg : arr) {
      if (seg.is_object() && seg.contains("Document") && seg["Document"].is_string()) {
        flat.add(parse_json(seg["Document"].get<std::string>()), std::nullopt);
      } else {
        flat.add(seg, std::nullopt);
      }
    }
  };

  if (doc.is_array()) {
    add_all(doc);
  } else if (doc.is_object() && doc.contains("Segments") && doc["Segments"].is_array()) {
    if (doc.contains("Id") && doc["Id"].is_string()) flat.trace_id = doc["Id"].get<std::string>();
    add_all(doc["Segments"]);
  } else if (doc.is_object() && doc.contains("segments") && doc["segments"].is_array()) {
    add_all(doc["segments"]);
  } else {
    throw TraceError("malformed document: expected a segment array");
  }
  return ExecutionTrace::build(std::move(flat.trace_id), std::move(flat.spans),
                               std::move(flat.findings));
}

}  // namespace faastrace
