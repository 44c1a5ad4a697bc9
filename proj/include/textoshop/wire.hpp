#pragma once

// JSON forms shared by the HTTP API, the document files and the CLI.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "textoshop/changeset.hpp"
#include "textoshop/errors.hpp"
#include "textoshop/layer_model.hpp"
#include "textoshop/tone_space.hpp"
#include "textoshop/transform_engine.hpp"

namespace textoshop::wire {

using nlohmann::json;

namespace detail {

template <class T>
T field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name)) throw InvalidRequestError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw InvalidRequestError(std::string("field '") + name + "' has the wrong type");
    }
}

template <class T>
std::optional<T> optional_field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return field<T>(j, name);
}

// Non-negative integer that fits std::size_t.
inline std::size_t offset_field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name)) throw InvalidRequestError(std::string("missing field '") + name + "'");
    const auto& v = j.at(name);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw InvalidRequestError(std::string("field '") + name + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace detail

// ---- changesets and timelines

inline json to_json(const ChangeSet& cs)
{
    json arr = json::array();
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            arr.push_back({{"retain", r->count}});
        } else if (auto d = std::get_if<Delete>(&op)) {
            arr.push_back({{"delete", d->text}});
        } else {
            arr.push_back({{"insert", std::get<Insert>(op).text}});
        }
    }
    return arr;
}

inline ChangeSet changeset_from_json(const json& j)
{
    if (!j.is_array()) throw InvalidRequestError("changeset must be an array");
    std::vector<ChangeOp> ops;
    for (const auto& op : j) {
        if (op.contains("retain")) {
            ops.emplace_back(Retain{detail::offset_field(op, "retain")});
        } else if (op.contains("delete")) {
            ops.emplace_back(Delete{detail::field<std::string>(op, "delete")});
        } else if (op.contains("insert")) {
            ops.emplace_back(Insert{detail::field<std::string>(op, "insert")});
        } else {
            throw InvalidRequestError("unknown changeset op");
        }
    }
    return ChangeSet::from_ops(ops);
}

inline json to_json(const AnimationTimeline& tl)
{
    json events = json::array();
    for (const auto& e : tl.events) {
        events.push_back({{"kind", e.kind == AnimationKind::remove ? "delete" : "insert"},
                          {"start", e.span.start},
                          {"end", e.span.end},
                          {"start_ms", e.start_ms},
                          {"end_ms", e.end_ms}});
    }
    return {{"events", events}, {"total_ms", tl.total_ms}};
}

// ---- tone

inline json to_json(const ToneVector& t)
{
    return {{"formality", t.formality}, {"sentiment", t.sentiment}, {"complexity", t.complexity}};
}

inline ToneVector tone_from_json(const json& j)
{
    ToneVector t{detail::field<int>(j, "formality"), detail::field<int>(j, "sentiment"), detail::field<int>(j, "complexity")};
    if (!t.valid()) throw InvalidRequestError("tone components must lie in [0, 10]");
    return t;
}

// ---- layer stacks

inline json to_json(const StableId& id) { return {{"layer", id.layer}, {"counter", id.counter}}; }

inline StableId stable_id_from_json(const json& j)
{
    return {detail::field<std::uint64_t>(j, "layer"), detail::field<std::uint64_t>(j, "counter")};
}

inline json to_json(const AnchorBoundary& b)
{
    if (std::holds_alternative<BeginBoundary>(b)) return "BEGIN";
    if (std::holds_alternative<EndBoundary>(b)) return "END";
    const auto& ib = std::get<IdBoundary>(b);
    return {{"layer", ib.id.layer}, {"counter", ib.id.counter}, {"side", ib.side == Side::before ? "before" : "after"}};
}

inline AnchorBoundary boundary_from_json(const json& j)
{
    if (j.is_string()) {
        if (j == "BEGIN") return BeginBoundary{};
        if (j == "END") return EndBoundary{};
        throw InvalidRequestError("unknown boundary sentinel");
    }
    const auto side = detail::field<std::string>(j, "side");
    if (side != "before" && side != "after") throw InvalidRequestError("boundary side must be 'before' or 'after'");
    return IdBoundary{stable_id_from_json(j), side == "before" ? Side::before : Side::after};
}

inline json to_json(const AnchoredEdit& e)
{
    json cells = json::array();
    for (const auto& c : e.replacement) cells.push_back({{"ch", c.ch}, {"id", to_json(c.id)}});
    return {{"start", to_json(e.anchor_start)}, {"end", to_json(e.anchor_end)}, {"replacement", cells}};
}

inline AnchoredEdit edit_from_json(const json& j)
{
    AnchoredEdit e{boundary_from_json(j.at("start")), boundary_from_json(j.at("end")), {}};
    for (const auto& c : j.at("replacement")) {
        e.replacement.push_back({detail::field<std::string>(c, "ch"), stable_id_from_json(c.at("id"))});
    }
    return e;
}

inline json to_json(const Layer& l)
{
    json edits = json::array();
    for (const auto& e : l.edits) edits.push_back(to_json(e));
    return {{"ordinal", l.ordinal}, {"name", l.name}, {"visible", l.visible}, {"id_counter", l.id_counter}, {"edits", edits}};
}

inline Layer layer_from_json(const json& j)
{
    Layer l;
    l.ordinal = detail::field<std::uint64_t>(j, "ordinal");
    l.name = detail::field<std::string>(j, "name");
    l.visible = detail::field<bool>(j, "visible");
    l.id_counter = detail::field<std::uint64_t>(j, "id_counter");
    for (const auto& e : j.at("edits")) l.edits.push_back(edit_from_json(e));
    return l;
}

/// Writes the stack fields into `out` (layers, active_layer, next_ordinal).
inline void write_stack(const LayerStack& s, json& out)
{
    json layers = json::array();
    for (const auto& l : s.layers) layers.push_back(to_json(l));
    out["layers"] = layers;
    out["active_layer"] = s.layers.at(s.active).ordinal;
    out["next_ordinal"] = s.next_ordinal;
}

inline LayerStack read_stack(const json& j)
{
    LayerStack s;
    for (const auto& l : j.at("layers")) s.layers.push_back(layer_from_json(l));
    if (s.layers.empty()) throw InvalidRequestError("document has no layers");
    s.active = require_layer(s, detail::field<std::uint64_t>(j, "active_layer"));
    s.next_ordinal = detail::field<std::uint64_t>(j, "next_ordinal");
    return s;
}

// ---- transform requests

inline std::optional<BooleanOpKind> parse_boolean_op(std::string_view name)
{
    if (name == "unite") return BooleanOpKind::unite;
    if (name == "intersect") return BooleanOpKind::intersect;
    if (name == "subtract") return BooleanOpKind::subtract;
    if (name == "exclude") return BooleanOpKind::exclude;
    if (name == "insert_raw" || name == "insert") return BooleanOpKind::insert_raw;
    return std::nullopt;
}

/// Builds a request from an op name, a selection and a params object.
/// `fallback_tone` fills apply_tone when params carry no tone.
inline TransformRequest parse_transform(std::string_view op, SelectionRange sel, const json& params,
                                        const ToneVector& fallback_tone = {})
{
    if (!params.is_null() && !params.is_object()) throw InvalidRequestError("params must be an object");
    TransformRequest r;
    r.selection = sel;
    if (auto b = parse_boolean_op(op)) {
        r.tool = ToolKind::boolean_merge;
        r.boolean_op = *b;
        r.fragment = detail::field<std::string>(params, "fragment");
        return r;
    }
    static constexpr std::pair<std::string_view, ToolKind> kTools[] = {
        {"erase", ToolKind::erase},     {"repair", ToolKind::repair},         {"smudge", ToolKind::smudge},
        {"set_number", ToolKind::set_number}, {"set_tense", ToolKind::set_tense}, {"apply_tone", ToolKind::apply_tone},
        {"prompt", ToolKind::prompt},   {"resize", ToolKind::resize},         {"rotate", ToolKind::rotate},
        {"split", ToolKind::split},     {"combine", ToolKind::combine},
    };
    bool known = false;
    for (const auto& [name, kind] : kTools) {
        if (name == op) {
            r.tool = kind;
            known = true;
        }
    }
    if (!known) throw InvalidRequestError("unknown op '" + std::string(op) + "'");
    switch (r.tool) {
    case ToolKind::set_number: {
        const auto n = detail::field<std::string>(params, "number");
        if (n == "plural") {
            r.number = Number::plural;
        } else if (n == "singular") {
            r.number = Number::singular;
        } else {
            throw InvalidRequestError("number must be 'singular' or 'plural'");
        }
        break;
    }
    case ToolKind::set_tense: {
        const auto t = detail::field<std::string>(params, "tense");
        if (t == "past") {
            r.tense = Tense::past;
        } else if (t == "present") {
            r.tense = Tense::present;
        } else if (t == "future") {
            r.tense = Tense::future;
        } else {
            throw InvalidRequestError("tense must be 'past', 'present' or 'future'");
        }
        break;
    }
    case ToolKind::apply_tone:
        r.tone = params.is_object() && params.contains("tone") ? tone_from_json(params.at("tone")) : fallback_tone;
        break;
    case ToolKind::prompt: r.prompt = detail::field<std::string>(params, "prompt"); break;
    case ToolKind::resize: {
        const auto& v = params.is_object() && params.contains("target_words") ? params.at("target_words") : json();
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw InvalidRequestError("target_words must be a positive integer");
        }
        r.target_words = v.get<std::size_t>();
        break;
    }
    case ToolKind::rotate: {
        const auto& v = params.is_object() && params.contains("angle") ? params.at("angle") : json();
        if (!v.is_number()) throw InvalidRequestError("angle must be a number");
        r.angle_deg = v.get<double>();
        break;
    }
    default: break;
    }
    return r;
}

inline json to_json(const Provenance& p)
{
    json j = {{"tool", p.tool}, {"backend", p.backend}, {"request_digest", p.request_digest}};
    if (p.achieved_words) j["achieved_words"] = *p.achieved_words;
    if (p.warning) j["warning"] = *p.warning;
    return j;
}

inline json to_json(const SelectionRange& s) { return {{"start", s.start}, {"end", s.end}}; }

}  // namespace textoshop::wire
