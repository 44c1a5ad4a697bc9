#pragma once

// Tool semantics: scope computation, backend dispatch, reintegration and
// recording onto the active layer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textoshop/changeset.hpp"
#include "textoshop/errors.hpp"
#include "textoshop/language_backend.hpp"
#include "textoshop/layer_model.hpp"
#include "textoshop/text_core.hpp"
#include "textoshop/tone_space.hpp"

namespace textoshop {

struct SelectionRange {
    std::size_t start = 0;
    std::size_t end = 0;

    bool empty() const noexcept { return start == end; }
    bool operator==(const SelectionRange&) const = default;
};

enum class ToolKind {
    erase,
    repair,
    smudge,
    set_number,
    set_tense,
    apply_tone,
    prompt,
    resize,
    rotate,
    split,
    combine,
    boolean_merge,
};

enum class BooleanOpKind { unite, intersect, subtract, exclude, insert_raw };

inline std::string_view to_string(ToolKind k)
{
    switch (k) {
    case ToolKind::erase: return "erase";
    case ToolKind::repair: return "repair";
    case ToolKind::smudge: return "smudge";
    case ToolKind::set_number: return "set_number";
    case ToolKind::set_tense: return "set_tense";
    case ToolKind::apply_tone: return "apply_tone";
    case ToolKind::prompt: return "prompt";
    case ToolKind::resize: return "resize";
    case ToolKind::rotate: return "rotate";
    case ToolKind::split: return "split";
    case ToolKind::combine: return "combine";
    case ToolKind::boolean_merge: return "boolean_merge";
    }
    return "unknown";
}

inline std::string_view to_string(BooleanOpKind k)
{
    switch (k) {
    case BooleanOpKind::unite: return "unite";
    case BooleanOpKind::intersect: return "intersect";
    case BooleanOpKind::subtract: return "subtract";
    case BooleanOpKind::exclude: return "exclude";
    case BooleanOpKind::insert_raw: return "insert_raw";
    }
    return "unknown";
}

/// One tool invocation. Only the parameters the tool reads need be set.
struct TransformRequest {
    ToolKind tool = ToolKind::smudge;
    SelectionRange selection;
    Number number = Number::plural;
    Tense tense = Tense::present;
    ToneVector tone;
    std::string prompt;
    std::size_t target_words = 0;
    double angle_deg = 0.0;
    BooleanOpKind boolean_op = BooleanOpKind::insert_raw;
    std::string fragment;
};

struct Provenance {
    std::string tool;
    std::string backend;
    std::string request_digest;
    std::optional<std::size_t> achieved_words;  // resize only
    std::optional<std::string> warning;
    bool operator==(const Provenance&) const = default;
};

struct TransformOutcome {
    ChangeSet changeset;
    SelectionRange new_selection;
    Provenance provenance;
};

struct VariantCandidate {
    std::string text;
    std::size_t word_count = 0;
};

/// Row i lists the candidates of sentence i; candidate 0 is the original.
using VariantTable = std::vector<std::vector<VariantCandidate>>;

namespace detail {

struct Pick {
    std::size_t changes = std::numeric_limits<std::size_t>::max();
    std::size_t choice = 0;
    bool reachable() const noexcept { return changes != std::numeric_limits<std::size_t>::max(); }
};

}  // namespace detail

/// Per-sentence candidate indices minimizing |sum of word counts - target|.
/// Ties go to fewer sentences changed from candidate 0, then to the
/// lexicographically smallest index vector.
inline std::vector<std::size_t> select_variants(const VariantTable& table, std::size_t target_words)
{
    const std::size_t n = table.size();
    if (n == 0) return {};
    std::size_t max_total = 0;
    for (const auto& row : table) {
        if (row.empty()) throw InvalidRequestError("every sentence needs at least its original candidate");
        std::size_t m = 0;
        for (const auto& c : row) m = std::max(m, c.word_count);
        max_total += m;
    }
    // best[i][s]: cheapest way for sentences i.. to total s words, keyed on
    // (changes, first index); later indices follow best[i+1].
    std::vector<std::vector<detail::Pick>> best(n + 1, std::vector<detail::Pick>(max_total + 1));
    best[n][0] = {0, 0};
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t s = 0; s <= max_total; ++s) {
            detail::Pick& cell = best[i][s];
            for (std::size_t j = 0; j < table[i].size(); ++j) {
                const std::size_t c = table[i][j].word_count;
                if (c > s || !best[i + 1][s - c].reachable()) continue;
                const std::size_t changes = best[i + 1][s - c].changes + (j != 0 ? 1 : 0);
                if (changes < cell.changes) cell = {changes, j};
            }
        }
    }
    auto trace = [&](std::size_t s) {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = best[i][s].choice;
            v.push_back(j);
            s -= table[i][j].word_count;
        }
        return v;
    };
    for (std::size_t k = 0;; ++k) {
        std::optional<std::pair<std::size_t, std::vector<std::size_t>>> pick;
        for (const bool above : {false, true}) {
            if (!above && k > target_words) continue;
            const std::size_t s = above ? target_words + k : target_words - k;
            if (s > max_total || !best[0][s].reachable()) continue;
            std::pair<std::size_t, std::vector<std::size_t>> cand{best[0][s].changes, trace(s)};
            if (!pick || cand < *pick) pick = std::move(cand);
        }
        if (pick) return pick->second;
    }
}

/// Resize request deltas for one sentence: base + (k - floor((n-1)/2)) for
/// k in [0, n); for n = 8 that is base + {-3..+4}.
inline std::vector<int> resize_deltas(int base, int variants)
{
    std::vector<int> out;
    for (int k = 0; k < variants; ++k) out.push_back(base + k - (variants - 1) / 2);
    return out;
}

/// Per-sentence share of a total word delta, rounded half away from zero.
inline std::vector<int> distribute_delta(long long total_delta, const std::vector<std::size_t>& lengths)
{
    std::size_t sum = 0;
    for (auto l : lengths) sum += l;
    std::vector<int> out;
    for (auto l : lengths) {
        out.push_back(sum == 0 ? 0 : static_cast<int>(std::round(static_cast<double>(total_delta) * static_cast<double>(l) / static_cast<double>(sum))));
    }
    return out;
}

/// Minimal run of whole sentences covering `sel`, widened to include `sel`
/// itself. A selection touching no sentence is its own scope.
inline SelectionRange sentence_scope(const std::vector<std::string>& gs, SelectionRange sel)
{
    SelectionRange scope = sel;
    bool found = false;
    for (const auto& s : segment_sentences(gs)) {
        const bool hit = sel.empty() ? (s.start <= sel.start && sel.start <= s.end) : (s.start < sel.end && sel.start < s.end);
        if (!hit) continue;
        if (!found) scope.start = std::min(sel.start, s.start);
        scope.end = std::max(sel.end, s.end);
        found = true;
    }
    return scope;
}

namespace detail {

// Changeset replacing [lo, hi) with `replacement`; everything outside is
// retained verbatim.
inline ChangeSet splice(const std::vector<std::string>& gs, std::size_t lo, std::size_t hi, std::string_view replacement)
{
    ChangeSet cs;
    cs.retain(lo);
    const ChangeSet inner = diff(join_graphemes(gs, lo, hi), replacement);
    for (const auto& op : inner.ops()) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, Retain>) {
                    cs.retain(o.count);
                } else if constexpr (std::is_same_v<T, Delete>) {
                    cs.remove(o.text);
                } else {
                    cs.insert(o.text);
                }
            },
            op);
    }
    cs.retain(gs.size() - hi);
    return cs;
}

inline bool is_scope_tool(ToolKind k)
{
    return k == ToolKind::erase || k == ToolKind::repair || k == ToolKind::set_number || k == ToolKind::set_tense ||
           k == ToolKind::apply_tone;
}

inline RequestKind request_kind_for(const TransformRequest& r)
{
    switch (r.tool) {
    case ToolKind::erase: return RequestKind::erase;
    case ToolKind::repair: return RequestKind::repair;
    case ToolKind::smudge: return RequestKind::smudge;
    case ToolKind::set_number: return RequestKind::set_number;
    case ToolKind::set_tense: return RequestKind::set_tense;
    case ToolKind::apply_tone: return RequestKind::apply_tone;
    case ToolKind::prompt: return RequestKind::prompt;
    case ToolKind::resize: return RequestKind::resize;
    case ToolKind::rotate: return RequestKind::rotate;
    case ToolKind::split: return RequestKind::split;
    case ToolKind::combine: return RequestKind::combine;
    case ToolKind::boolean_merge:
        switch (r.boolean_op) {
        case BooleanOpKind::unite: return RequestKind::unite;
        case BooleanOpKind::intersect: return RequestKind::intersect;
        case BooleanOpKind::subtract: return RequestKind::subtract;
        default: return RequestKind::exclude;
        }
    }
    return RequestKind::smudge;
}

inline std::string_view number_name(Number n) { return n == Number::plural ? "plural" : "singular"; }

inline std::string_view tense_name(Tense t)
{
    return t == Tense::past ? "past" : t == Tense::future ? "future" : "present";
}

}  // namespace detail

class TransformEngine {
public:
    explicit TransformEngine(std::shared_ptr<LanguageBackend> backend, int resize_variants = 8)
        : backend_(std::move(backend)), variants_(resize_variants)
    {
        if (!backend_) throw InvalidRequestError("engine needs a backend");
        if (variants_ < 1) throw InvalidRequestError("resize variant count must be positive");
    }

    LanguageBackend& backend() noexcept { return *backend_; }
    int resize_variant_count() const noexcept { return variants_; }

    /// Computes the outcome of `req` on `text` without touching any stack.
    TransformOutcome plan(std::string_view text, const TransformRequest& req)
    {
        const auto gs = split_graphemes(text);
        const SelectionRange sel = req.selection;
        if (sel.start > sel.end || sel.end > gs.size()) {
            throw InvalidRequestError("selection [" + std::to_string(sel.start) + ", " + std::to_string(sel.end) +
                                      ") outside text of length " + std::to_string(gs.size()));
        }
        const bool insert_raw = req.tool == ToolKind::boolean_merge && req.boolean_op == BooleanOpKind::insert_raw;
        if (insert_raw) return insert_fragment(gs, req);
        if (sel.empty() || is_whitespace_only(join_graphemes(gs, sel.start, sel.end))) {
            throw InvalidRequestError(std::string(to_string(req.tool)) + " needs a non-empty selection");
        }
        if (req.tool == ToolKind::resize) return resize(gs, req);
        if (detail::is_scope_tool(req.tool)) return scope_tool(gs, req);
        return selection_tool(gs, req);
    }

    /// Plans against the current composition and records the result on the
    /// active layer.
    TransformOutcome run(LayerStack& stack, const TransformRequest& req)
    {
        if (!stack.active_layer().visible) throw HiddenLayerError("the active layer is hidden");
        TransformOutcome out = plan(composition_text(compose(stack)), req);
        if (!out.changeset.is_identity()) record_changeset(stack, out.changeset);
        return out;
    }

    ToneVector estimate_tone(std::string_view text, SelectionRange sel)
    {
        const auto gs = split_graphemes(text);
        if (sel.start > sel.end || sel.end > gs.size()) throw InvalidRequestError("selection outside the text");
        const std::string s = join_graphemes(gs, sel.start, sel.end);
        if (is_whitespace_only(s)) throw InvalidRequestError("estimate_tone needs a non-empty selection");
        return estimate_tone_of(s);
    }

    ToneVector estimate_tone_of(const std::string& s)
    {
        BackendRequest r{RequestKind::estimate_tone, {{"selection", s}}, {}};
        return tone_from_json(backend_->complete(r).texts.front());
    }

private:
    Provenance provenance(const TransformRequest& req, const nlohmann::json& requests) const
    {
        Provenance p;
        p.tool = std::string(req.tool == ToolKind::boolean_merge ? to_string(req.boolean_op) : to_string(req.tool));
        p.backend = backend_->name();
        p.request_digest = sha256_hex(requests.dump());
        return p;
    }

    std::string call(const BackendRequest& r, nlohmann::json& log)
    {
        log.push_back(request_to_json(r));
        return backend_->complete(r).texts.front();
    }

    TransformOutcome insert_fragment(const std::vector<std::string>& gs, const TransformRequest& req)
    {
        if (!req.selection.empty()) throw InvalidRequestError("insert needs a caret, not a span");
        if (req.fragment.empty()) throw InvalidRequestError("insert needs fragment text");
        TransformOutcome out;
        const std::size_t at = req.selection.start;
        out.changeset = detail::splice(gs, at, at, req.fragment);
        out.new_selection = {at, at + grapheme_length(req.fragment)};
        out.provenance = provenance(req, nlohmann::json::array({{{"kind", "insert_raw"}, {"fragment", req.fragment}}}));
        out.provenance.backend = "none";
        return out;
    }

    TransformOutcome scope_tool(const std::vector<std::string>& gs, const TransformRequest& req)
    {
        const SelectionRange sel = req.selection;
        const SelectionRange scope = sentence_scope(gs, sel);
        const std::string scope_text = join_graphemes(gs, scope.start, scope.end);
        TransformOutcome out;
        nlohmann::json log = nlohmann::json::array();

        if (req.tool == ToolKind::erase && sel.start <= scope.start && sel.end >= scope.end) {
            // Whole sentences: drop them and one separating whitespace cluster.
            SelectionRange cut = scope;
            while (is_whitespace_cluster(gs[cut.start])) ++cut.start;
            while (is_whitespace_cluster(gs[cut.end - 1])) --cut.end;
            if (cut.end < gs.size() && is_whitespace_cluster(gs[cut.end])) {
                ++cut.end;
            } else if (cut.start > 0 && is_whitespace_cluster(gs[cut.start - 1])) {
                --cut.start;
            }
            out.changeset = detail::splice(gs, cut.start, cut.end, "");
            out.new_selection = {cut.start, cut.start};
            out.provenance = provenance(req, log);
            out.provenance.backend = "none";
            return out;
        }

        BackendRequest r{detail::request_kind_for(req),
                         {{"sentence", scope_text}, {"selection", join_graphemes(gs, sel.start, sel.end)}},
                         {{"selection_offset", static_cast<std::int64_t>(sel.start - scope.start)}}};
        switch (req.tool) {
        case ToolKind::set_number: r.constraints["number"] = std::string(detail::number_name(req.number)); break;
        case ToolKind::set_tense: r.constraints["tense"] = std::string(detail::tense_name(req.tense)); break;
        case ToolKind::apply_tone:
            if (!req.tone.valid()) throw InvalidRequestError("tone components must lie in [0, 10]");
            r.constraints["formality"] = std::int64_t{req.tone.formality};
            r.constraints["sentiment"] = std::int64_t{req.tone.sentiment};
            r.constraints["complexity"] = std::int64_t{req.tone.complexity};
            break;
        default: break;
        }
        const std::string result = call(r, log);
        // Repair owns capitalization and terminal punctuation, so only the
        // surrounding whitespace is restored.
        const std::string replacement =
            req.tool == ToolKind::repair ? reintegrate_whitespace(scope_text, result) : reintegrate(scope_text, result);
        out.changeset = detail::splice(gs, scope.start, scope.end, replacement);
        if (req.tool == ToolKind::erase) {
            const std::size_t caret = map_position(out.changeset, sel.start, Bias::left);
            out.new_selection = {caret, caret};
        } else {
            out.new_selection = {scope.start, scope.start + grapheme_length(replacement)};
        }
        out.provenance = provenance(req, log);
        return out;
    }

    TransformOutcome selection_tool(const std::vector<std::string>& gs, const TransformRequest& req)
    {
        const SelectionRange sel = req.selection;
        const std::string text = join_graphemes(gs, sel.start, sel.end);
        BackendRequest r{detail::request_kind_for(req), {}, {}};
        switch (req.tool) {
        case ToolKind::smudge:
        case ToolKind::combine: r.slots["selection"] = text; break;
        case ToolKind::split:
            if (text.find(", ") == std::string::npos && segment_sentences(text).size() <= 1) {
                throw NoSplitPointError("selection has no comma and only one sentence");
            }
            r.slots["selection"] = text;
            break;
        case ToolKind::prompt:
            if (is_whitespace_only(req.prompt)) throw InvalidRequestError("prompt is empty");
            r.slots["selection"] = text;
            r.slots["prompt"] = req.prompt;
            break;
        case ToolKind::rotate:
            if (!(req.angle_deg >= 0.0 && req.angle_deg <= 180.0)) throw InvalidRequestError("angle must lie in [0, 180]");
            if (word_count(text) < 2) throw InvalidRequestError("rotate needs at least two words");
            r.slots["selection"] = text;
            r.constraints["intensity"] = req.angle_deg / 180.0;
            break;
        case ToolKind::boolean_merge:
            if (req.fragment.empty() || is_whitespace_only(req.fragment)) throw InvalidRequestError("fragment text is empty");
            r.slots["fragment"] = req.fragment;
            r.slots["target"] = text;
            break;
        default: throw InvalidRequestError("unsupported tool");
        }
        nlohmann::json log = nlohmann::json::array();
        const std::string replacement = reintegrate(text, call(r, log));
        TransformOutcome out;
        out.changeset = detail::splice(gs, sel.start, sel.end, replacement);
        out.new_selection = {sel.start, sel.start + grapheme_length(replacement)};
        out.provenance = provenance(req, log);
        return out;
    }

    TransformOutcome resize(const std::vector<std::string>& gs, const TransformRequest& req)
    {
        if (req.target_words < 1) throw InvalidRequestError("target_words must be at least 1");
        const SelectionRange sel = req.selection;
        const std::vector<std::string> sgs(gs.begin() + static_cast<std::ptrdiff_t>(sel.start),
                                           gs.begin() + static_cast<std::ptrdiff_t>(sel.end));
        const auto sentences = segment_sentences(sgs);
        std::vector<std::string> originals;
        std::vector<std::size_t> lengths;
        for (const auto& s : sentences) {
            originals.push_back(join_graphemes(sgs, s.start, s.end));
            lengths.push_back(word_count(originals.back()));
        }
        std::size_t total = 0;
        for (auto l : lengths) total += l;
        const auto bases = distribute_delta(static_cast<long long>(req.target_words) - static_cast<long long>(total), lengths);

        nlohmann::json log = nlohmann::json::array();
        VariantTable table;
        bool partial = false;
        for (std::size_t i = 0; i < originals.size(); ++i) {
            const auto deltas = resize_deltas(bases[i], variants_);
            log.push_back({{"kind", "resize"}, {"sentence", originals[i]}, {"deltas", deltas}});
            const ResizeResult rr = backend_->resize_variants(originals[i], deltas);
            partial = partial || rr.partial;
            std::vector<VariantCandidate> row{{originals[i], lengths[i]}};
            for (const auto& t : rr.texts) {
                if (!t) continue;
                std::string fitted = reintegrate(originals[i], *t);
                if (fitted.empty()) continue;
                const std::size_t wc = word_count(fitted);
                row.push_back({std::move(fitted), wc});
            }
            table.push_back(std::move(row));
        }
        const auto choice = select_variants(table, req.target_words);
        std::size_t achieved = 0;
        std::string rebuilt;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            rebuilt += join_graphemes(sgs, pos, sentences[i].start);
            rebuilt += table[i][choice[i]].text;
            achieved += table[i][choice[i]].word_count;
            pos = sentences[i].end;
        }
        rebuilt += join_graphemes(sgs, pos, sgs.size());
        const std::size_t miss = achieved > req.target_words ? achieved - req.target_words : req.target_words - achieved;
        if (miss > sentences.size()) {
            throw UnreachableTargetError("closest achievable length is " + std::to_string(achieved) + " words, target " +
                                         std::to_string(req.target_words));
        }
        TransformOutcome out;
        out.changeset = detail::splice(gs, sel.start, sel.end, rebuilt);
        out.new_selection = {sel.start, sel.start + grapheme_length(rebuilt)};
        out.provenance = provenance(req, log);
        out.provenance.achieved_words = achieved;
        if (partial) out.provenance.warning = "some resize variants failed";
        return out;
    }

    std::shared_ptr<LanguageBackend> backend_;
    int variants_;
};

}  // namespace textoshop
