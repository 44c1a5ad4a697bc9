#pragma once

// Document lifecycle: records, canonical files, per-document locking,
// transactional mutation, undo, fragments, layers and change events.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "textoshop/changeset.hpp"
#include "textoshop/errors.hpp"
#include "textoshop/language_backend.hpp"
#include "textoshop/layer_model.hpp"
#include "textoshop/tone_space.hpp"
#include "textoshop/transform_engine.hpp"
#include "textoshop/wire.hpp"

namespace textoshop {

inline constexpr int kDocumentVersion = 1;

struct Fragment {
    std::uint64_t id = 0;
    std::string text;
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    bool operator==(const Fragment&) const = default;
};

struct OpLogEntry {
    ChangeSet changeset;
    std::uint64_t layer = 0;  // ordinal the change was recorded on
    std::string tool;
    std::string request_digest;
    std::int64_t timestamp_ms = 0;
    bool operator==(const OpLogEntry&) const = default;
};

struct DocumentRecord {
    std::string id;
    LayerStack stack;
    std::vector<Fragment> fragments;
    ToneVector current_tone;
    std::vector<OpLogEntry> op_log;
    std::int64_t created_ms = 0;
    std::int64_t modified_ms = 0;
    std::uint64_t revision = 0;
    std::uint64_t next_fragment_id = 1;
    bool operator==(const DocumentRecord&) const = default;
};

// ---- canonical file form

inline nlohmann::json to_json(const Fragment& f)
{
    return {{"id", f.id}, {"text", f.text}, {"x", f.x}, {"y", f.y}, {"width", f.width}};
}

inline Fragment fragment_from_json(const nlohmann::json& j)
{
    return {wire::detail::field<std::uint64_t>(j, "id"), wire::detail::field<std::string>(j, "text"),
            wire::detail::field<double>(j, "x"), wire::detail::field<double>(j, "y"),
            wire::detail::field<double>(j, "width")};
}

inline nlohmann::json to_json(const DocumentRecord& d)
{
    nlohmann::json j;
    j["version"] = kDocumentVersion;
    j["id"] = d.id;
    wire::write_stack(d.stack, j);
    j["current_tone"] = wire::to_json(d.current_tone);
    nlohmann::json frags = nlohmann::json::array();
    for (const auto& f : d.fragments) frags.push_back(to_json(f));
    j["fragments"] = frags;
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : d.op_log) {
        log.push_back({{"changeset", wire::to_json(e.changeset)},
                       {"layer", e.layer},
                       {"tool", e.tool},
                       {"request_digest", e.request_digest},
                       {"timestamp_ms", e.timestamp_ms}});
    }
    j["op_log"] = log;
    j["created_ms"] = d.created_ms;
    j["modified_ms"] = d.modified_ms;
    j["revision"] = d.revision;
    j["next_fragment_id"] = d.next_fragment_id;
    return j;
}

inline DocumentRecord document_from_json(const nlohmann::json& j)
{
    using wire::detail::field;
    if (!j.is_object() || !j.contains("version")) throw InvalidRequestError("document file has no version");
    if (field<int>(j, "version") != kDocumentVersion) throw InvalidRequestError("unsupported document version");
    try {
        DocumentRecord d;
        d.id = field<std::string>(j, "id");
        d.stack = wire::read_stack(j);
        d.current_tone = wire::tone_from_json(j.at("current_tone"));
        for (const auto& f : j.at("fragments")) d.fragments.push_back(fragment_from_json(f));
        for (const auto& e : j.at("op_log")) {
            d.op_log.push_back({wire::changeset_from_json(e.at("changeset")), field<std::uint64_t>(e, "layer"),
                                field<std::string>(e, "tool"), field<std::string>(e, "request_digest"),
                                field<std::int64_t>(e, "timestamp_ms")});
        }
        d.created_ms = field<std::int64_t>(j, "created_ms");
        d.modified_ms = field<std::int64_t>(j, "modified_ms");
        d.revision = field<std::uint64_t>(j, "revision");
        d.next_fragment_id = field<std::uint64_t>(j, "next_fragment_id");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRequestError(std::string("malformed document file: ") + e.what());
    }
}

/// Sorted keys, two-space indent, trailing newline.
inline std::string serialize(const DocumentRecord& d) { return to_json(d).dump(2) + "\n"; }

inline DocumentRecord parse_document(std::string_view text)
{
    try {
        return document_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidRequestError(std::string("document file is not JSON: ") + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Temp file in the same directory, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& p, const std::string& content)
{
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

// ---- change events

struct ChangeEvent {
    std::string data;  // JSON {changeset, timeline, revision}
};

/// Unbounded per-subscriber queue.
class Subscription {
public:
    void push(ChangeEvent e)
    {
        {
            std::lock_guard lock(mu_);
            if (closed_) return;
            queue_.push_back(std::move(e));
        }
        cv_.notify_all();
    }

    /// Next event, or nothing on timeout or once closed and drained.
    std::optional<ChangeEvent> wait(std::chrono::milliseconds timeout)
    {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) return std::nullopt;
        ChangeEvent e = std::move(queue_.front());
        queue_.pop_front();
        return e;
    }

    void close()
    {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    bool closed() const
    {
        std::lock_guard lock(mu_);
        return closed_;
    }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<ChangeEvent> queue_;
    bool closed_ = false;
};

// ---- service

struct TransformResult {
    TransformOutcome outcome;
    AnimationTimeline timeline;
    std::string text;
    std::uint64_t revision = 0;
};

struct LayerPatch {
    std::optional<std::string> name;
    std::optional<bool> visible;
    std::optional<std::size_t> index;
    std::optional<bool> active;
};

struct FragmentPatch {
    std::optional<std::string> text;
    std::optional<double> x;
    std::optional<double> y;
    std::optional<double> width;
};

inline std::int64_t now_ms()
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

class EditorService {
public:
    using Clock = std::function<std::int64_t()>;

    EditorService(std::filesystem::path data_dir, std::shared_ptr<LanguageBackend> backend, int resize_variants = 8,
                  Clock clock = now_ms)
        : dir_(std::move(data_dir)), engine_(std::move(backend), resize_variants), clock_(std::move(clock))
    {
        std::filesystem::create_directories(dir_);
    }

    ~EditorService() { close_all_subscriptions(); }

    const std::filesystem::path& data_dir() const noexcept { return dir_; }
    TransformEngine& engine() noexcept { return engine_; }

    std::filesystem::path path_for(const std::string& id) const { return dir_ / (id + ".json"); }

    std::string create_document(std::string_view text)
    {
        DocumentRecord d;
        d.id = new_id();
        d.stack = make_stack(text);
        d.created_ms = d.modified_ms = clock_();
        write_file_atomic(path_for(d.id), serialize(d));
        auto slot = std::make_shared<Slot>();
        slot->doc = std::move(d);
        const std::string id = slot->doc.id;
        std::lock_guard lock(mu_);
        slots_[id] = std::move(slot);
        return id;
    }

    DocumentRecord get(const std::string& id)
    {
        auto slot = find(id);
        std::lock_guard lock(slot->mu);
        return slot->doc;
    }

    static std::string text_of(const DocumentRecord& d) { return composition_text(compose(d.stack)); }

    TransformResult apply_transform(const std::string& id, const TransformRequest& req)
    {
        TransformResult result;
        mutate(id, [&](DocumentRecord& d) {
            result.outcome = engine_.run(d.stack, req);
            if (req.tool == ToolKind::apply_tone) d.current_tone = req.tone;
            log(d, result.outcome.changeset, d.stack.active_layer().ordinal, result.outcome.provenance);
            return result.outcome.changeset;
        }, result);
        return result;
    }

    /// Estimates the selection's tone and makes it the current tone.
    std::pair<ToneVector, std::uint64_t> estimate_tone(const std::string& id, SelectionRange sel)
    {
        ToneVector tone;
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            tone = engine_.estimate_tone(text_of(d), sel);
            d.current_tone = tone;
            return ChangeSet{};
        }, r);
        return {tone, r.revision};
    }

    /// Applies the inverse of the newest logged change on its layer and
    /// drops it from the log.
    TransformResult undo(const std::string& id)
    {
        TransformResult result;
        mutate(id, [&](DocumentRecord& d) {
            if (d.op_log.empty()) throw ConflictError("nothing to undo");
            const OpLogEntry entry = d.op_log.back();
            const auto idx = d.stack.index_of(entry.layer);
            if (!idx) throw ConflictError("the layer of the last change no longer exists");
            if (!d.stack.layers[*idx].visible) throw ConflictError("the layer of the last change is hidden");
            const ChangeSet inv = invert(entry.changeset);
            const std::string current = text_of(d);
            try {
                textoshop::apply(current, inv);
            } catch (const ValidationError&) {
                throw ConflictError("the document changed since the last logged edit");
            }
            const std::size_t active = d.stack.active;
            d.stack.active = *idx;
            try {
                record_changeset(d.stack, inv);
            } catch (const ValidationError& e) {
                throw ConflictError(std::string("cannot undo: ") + e.what());
            }
            d.stack.active = active;
            d.op_log.pop_back();
            result.outcome.changeset = inv;
            result.outcome.provenance.tool = "undo";
            return inv;
        }, result);
        return result;
    }

    /// Cuts the selection out of the page (recorded on the active layer) and
    /// returns it as a floating fragment.
    Fragment fragment_from_selection(const std::string& id, SelectionRange sel, double x, double y,
                                     std::optional<double> width = std::nullopt)
    {
        Fragment frag;
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            if (!d.stack.active_layer().visible) throw HiddenLayerError("the active layer is hidden");
            const auto gs = split_graphemes(text_of(d));
            if (sel.start >= sel.end || sel.end > gs.size()) throw InvalidRequestError("fragment needs a non-empty selection inside the text");
            frag.id = d.next_fragment_id++;
            frag.text = join_graphemes(gs, sel.start, sel.end);
            frag.x = x;
            frag.y = y;
            frag.width = width.value_or(0.0);
            const ChangeSet cs = detail::splice(gs, sel.start, sel.end, "");
            record_changeset(d.stack, cs);
            d.fragments.push_back(frag);
            log(d, cs, d.stack.active_layer().ordinal, {"fragment", "none", "", std::nullopt, std::nullopt});
            return cs;
        }, r);
        return frag;
    }

    Fragment update_fragment(const std::string& id, std::uint64_t fragment_id, const FragmentPatch& patch)
    {
        Fragment out;
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            Fragment& f = find_fragment(d, fragment_id);
            if (patch.text) {
                if (patch.text->empty()) throw InvalidRequestError("fragment text must not be empty");
                f.text = *patch.text;
            }
            if (patch.x) f.x = *patch.x;
            if (patch.y) f.y = *patch.y;
            if (patch.width) f.width = *patch.width;
            out = f;
            return ChangeSet{};
        }, r);
        return out;
    }

    /// Merges a fragment into the page; the fragment is consumed on success.
    TransformResult drop_fragment(const std::string& id, std::uint64_t fragment_id, BooleanOpKind op, SelectionRange target)
    {
        TransformResult result;
        mutate(id, [&](DocumentRecord& d) {
            const Fragment f = find_fragment(d, fragment_id);
            TransformRequest req;
            req.tool = ToolKind::boolean_merge;
            req.boolean_op = op;
            req.selection = target;
            req.fragment = f.text;
            result.outcome = engine_.run(d.stack, req);
            std::erase_if(d.fragments, [&](const Fragment& x) { return x.id == fragment_id; });
            log(d, result.outcome.changeset, d.stack.active_layer().ordinal, result.outcome.provenance);
            return result.outcome.changeset;
        }, result);
        return result;
    }

    Layer create_layer(const std::string& id, std::string name)
    {
        Layer out;
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            if (name.empty()) name = "Layer " + std::to_string(d.stack.next_ordinal);
            out = add_layer(d.stack, std::move(name));
            return ChangeSet{};
        }, r);
        return out;
    }

    /// Order of application: name, visibility, index, active.
    void patch_layer(const std::string& id, std::uint64_t ordinal, const LayerPatch& patch)
    {
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            const std::size_t idx = require_layer(d.stack, ordinal);
            if (patch.name) rename_layer(d.stack, ordinal, *patch.name);
            if (patch.visible) set_visibility(d.stack, ordinal, *patch.visible);
            if (patch.index) reorder_layer(d.stack, idx, *patch.index);
            if (patch.active.value_or(false)) set_active(d.stack, ordinal);
            return ChangeSet{};
        }, r);
    }

    void delete_layer(const std::string& id, std::uint64_t ordinal)
    {
        TransformResult r;
        mutate(id, [&](DocumentRecord& d) {
            remove_layer(d.stack, ordinal);
            return ChangeSet{};
        }, r);
    }

    std::shared_ptr<Subscription> subscribe(const std::string& id)
    {
        auto slot = find(id);
        auto sub = std::make_shared<Subscription>();
        std::lock_guard lock(slot->mu);
        slot->subscribers.push_back(sub);
        return sub;
    }

    void close_all_subscriptions()
    {
        std::lock_guard lock(mu_);
        for (auto& [id, slot] : slots_) {
            std::lock_guard l(slot->mu);
            for (auto& w : slot->subscribers) {
                if (auto s = w.lock()) s->close();
            }
            slot->subscribers.clear();
        }
    }

private:
    struct Slot {
        std::mutex mu;
        DocumentRecord doc;
        std::vector<std::weak_ptr<Subscription>> subscribers;
    };

    static bool valid_id(const std::string& id)
    {
        return !id.empty() && id.size() <= 64 &&
               std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
    }

    std::string new_id()
    {
        std::lock_guard lock(mu_);
        static constexpr char kHex[] = "0123456789abcdef";
        for (;;) {
            std::string id;
            for (int i = 0; i < 2; ++i) {
                std::uint64_t v = rng_();
                for (int k = 0; k < 16; ++k, v >>= 4) id += kHex[v & 0xF];
            }
            if (!slots_.count(id) && !std::filesystem::exists(path_for(id))) return id;
        }
    }

    std::shared_ptr<Slot> find(const std::string& id)
    {
        if (!valid_id(id)) throw NotFoundError("no document " + id);
        std::lock_guard lock(mu_);
        if (auto it = slots_.find(id); it != slots_.end()) return it->second;
        const auto p = path_for(id);
        if (!std::filesystem::exists(p)) throw NotFoundError("no document " + id);
        auto slot = std::make_shared<Slot>();
        slot->doc = parse_document(read_file(p));
        slots_[id] = slot;
        return slot;
    }

    static Fragment& find_fragment(DocumentRecord& d, std::uint64_t fid)
    {
        for (auto& f : d.fragments) {
            if (f.id == fid) return f;
        }
        throw NotFoundError("no fragment " + std::to_string(fid));
    }

    void log(DocumentRecord& d, const ChangeSet& cs, std::uint64_t layer, const Provenance& p)
    {
        if (cs.is_identity()) return;
        d.op_log.push_back({cs, layer, p.tool, p.request_digest, clock_()});
    }

    // Runs `fn` on a copy; commits, persists and emits exactly one event
    // only if it returns normally. `fn` returns the changeset to announce;
    // when it is empty the visible difference is announced instead.
    template <class Fn>
    void mutate(const std::string& id, Fn&& fn, TransformResult& result)
    {
        auto slot = find(id);
        std::lock_guard lock(slot->mu);
        DocumentRecord draft = slot->doc;
        const std::string before = text_of(draft);
        ChangeSet announced = fn(draft);
        const std::string after = text_of(draft);
        if (announced.empty() || announced.source_length() != grapheme_length(before)) announced = textoshop::diff(before, after);
        draft.revision += 1;
        draft.modified_ms = clock_();
        write_file_atomic(path_for(id), serialize(draft));
        slot->doc = std::move(draft);

        result.timeline = textoshop::timeline(announced);
        result.text = after;
        result.revision = slot->doc.revision;
        const nlohmann::json payload = {
            {"changeset", wire::to_json(announced)},
            {"timeline", wire::to_json(result.timeline)},
            {"revision", result.revision},
        };
        ChangeEvent ev{payload.dump()};
        std::erase_if(slot->subscribers, [](const std::weak_ptr<Subscription>& w) { return w.expired(); });
        for (auto& w : slot->subscribers) {
            if (auto s = w.lock()) s->push(ev);
        }
    }

    std::filesystem::path dir_;
    TransformEngine engine_;
    Clock clock_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
    std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace textoshop
