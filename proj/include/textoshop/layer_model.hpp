#pragma once

// Layered documents. Every character carries a stable identifier; layers
// hold edits anchored to those identifiers and are folded bottom-to-top.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "textoshop/changeset.hpp"
#include "textoshop/errors.hpp"
#include "textoshop/text_core.hpp"

namespace textoshop {

struct StableId {
    std::uint64_t layer = 0;    // creation ordinal of the minting layer
    std::uint64_t counter = 0;  // monotonic within that layer

    auto operator<=>(const StableId&) const = default;
};

struct StableIdHash {
    std::size_t operator()(const StableId& id) const noexcept
    {
        const std::uint64_t h = id.layer * 0x9E3779B97F4A7C15ull ^ (id.counter + 0x632BE59BD9B4E019ull);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

enum class Side { before, after };

struct BeginBoundary {
    bool operator==(const BeginBoundary&) const = default;
};

struct EndBoundary {
    bool operator==(const EndBoundary&) const = default;
};

struct IdBoundary {
    StableId id;
    Side side = Side::before;
    bool operator==(const IdBoundary&) const = default;
};

using AnchorBoundary = std::variant<BeginBoundary, EndBoundary, IdBoundary>;

/// One grapheme cluster tagged with its identifier.
struct Cell {
    std::string ch;
    StableId id;
    bool operator==(const Cell&) const = default;
};

struct AnchoredEdit {
    AnchorBoundary anchor_start;
    AnchorBoundary anchor_end;
    std::vector<Cell> replacement;
    bool operator==(const AnchoredEdit&) const = default;
};

struct Layer {
    std::uint64_t ordinal = 0;
    std::string name;
    bool visible = true;
    std::vector<AnchoredEdit> edits;
    std::uint64_t id_counter = 0;
    bool operator==(const Layer&) const = default;

    StableId mint() { return {ordinal, ++id_counter}; }
};

/// Index 0 is the bottom of the stack.
struct LayerStack {
    std::vector<Layer> layers;
    std::size_t active = 0;
    std::uint64_t next_ordinal = 0;
    bool operator==(const LayerStack&) const = default;

    Layer& active_layer() { return layers.at(active); }
    const Layer& active_layer() const { return layers.at(active); }

    std::optional<std::size_t> index_of(std::uint64_t ordinal) const
    {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].ordinal == ordinal) return i;
        }
        return std::nullopt;
    }
};

struct Composition {
    std::vector<Cell> cells;

    std::size_t size() const noexcept { return cells.size(); }
    bool operator==(const Composition&) const = default;
};

inline PlainText composition_text(const Composition& c)
{
    std::string out;
    for (const auto& cell : c.cells) out += cell.ch;
    return out;
}

namespace detail {

using CellRefs = std::vector<const Cell*>;

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Where an edit of a batched layer landed: [b_start, b_end) of the layer's
// input, [a_start, a_end) of its output.
struct Footprint {
    std::size_t edit = 0;
    std::size_t b_start = 0;
    std::size_t b_end = 0;
    std::size_t a_start = 0;
    std::size_t a_end = 0;
};

struct LayerPass {
    CellRefs out;
    bool batched = true;
    std::vector<Footprint> footprints;  // sorted by position; batched only
};

inline const StableId* boundary_id(const AnchorBoundary& b)
{
    if (auto ib = std::get_if<IdBoundary>(&b)) return &ib->id;
    return nullptr;
}

// Index map restricted to the ids a layer's edits reference.
class AnchorIndex {
public:
    AnchorIndex(const CellRefs& cells, const std::vector<AnchoredEdit>& edits)
    {
        for (const auto& e : edits) {
            if (auto id = boundary_id(e.anchor_start)) pos_.emplace(*id, npos);
            if (auto id = boundary_id(e.anchor_end)) pos_.emplace(*id, npos);
        }
        if (pos_.empty()) return;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            auto it = pos_.find(cells[i]->id);
            if (it != pos_.end()) it->second = i;
        }
    }

    // Gap position of a boundary, or npos when its id is absent.
    std::size_t resolve(const AnchorBoundary& b, std::size_t size) const
    {
        if (std::holds_alternative<BeginBoundary>(b)) return 0;
        if (std::holds_alternative<EndBoundary>(b)) return size;
        const auto& ib = std::get<IdBoundary>(b);
        auto it = pos_.find(ib.id);
        if (it == pos_.end() || it->second == npos) return npos;
        return ib.side == Side::before ? it->second : it->second + 1;
    }

private:
    std::unordered_map<StableId, std::size_t, StableIdHash> pos_;
};

inline std::size_t find_linear(const CellRefs& cells, const AnchorBoundary& b)
{
    if (std::holds_alternative<BeginBoundary>(b)) return 0;
    if (std::holds_alternative<EndBoundary>(b)) return cells.size();
    const auto& ib = std::get<IdBoundary>(b);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i]->id == ib.id) return ib.side == Side::before ? i : i + 1;
    }
    return npos;
}

inline void apply_sequential(CellRefs& cur, const Layer& layer)
{
    for (const auto& e : layer.edits) {
        const std::size_t s = find_linear(cur, e.anchor_start);
        const std::size_t t = find_linear(cur, e.anchor_end);
        if (s == npos || t == npos || t < s) continue;
        CellRefs repl;
        repl.reserve(e.replacement.size());
        for (const auto& c : e.replacement) repl.push_back(&c);
        cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(s), cur.begin() + static_cast<std::ptrdiff_t>(t));
        cur.insert(cur.begin() + static_cast<std::ptrdiff_t>(s), repl.begin(), repl.end());
    }
}

/// Applies one layer to the composition beneath it. Edits are applied in
/// list order; when their resolved spans are independent of each other the
/// layer is applied in one pass and footprints are reported.
inline LayerPass apply_layer(const CellRefs& in, const Layer& layer)
{
    LayerPass pass;
    if (layer.edits.empty()) {
        pass.out = in;
        return pass;
    }
    const AnchorIndex index(in, layer.edits);
    struct Resolved {
        std::size_t edit, s, t;
    };
    std::vector<Resolved> ok;
    bool independent = true;
    for (std::size_t k = 0; k < layer.edits.size(); ++k) {
        const auto& e = layer.edits[k];
        const std::size_t s = index.resolve(e.anchor_start, in.size());
        const std::size_t t = index.resolve(e.anchor_end, in.size());
        if (s == npos || t == npos) {
            // An id minted by this layer may appear once earlier edits run.
            for (auto id : {boundary_id(e.anchor_start), boundary_id(e.anchor_end)}) {
                if (id && id->layer == layer.ordinal) independent = false;
            }
            continue;
        }
        if (t < s) {
            // A sentinel end can catch up once earlier edits delete text.
            if (!boundary_id(e.anchor_start) || !boundary_id(e.anchor_end)) independent = false;
            continue;
        }
        ok.push_back({k, s, t});
    }
    std::sort(ok.begin(), ok.end(), [](const Resolved& a, const Resolved& b) {
        return a.s != b.s ? a.s < b.s : a.t != b.t ? a.t < b.t : a.edit < b.edit;
    });
    for (std::size_t i = 1; i < ok.size() && independent; ++i) {
        const auto& prev = ok[i - 1];
        const auto& next = ok[i];
        const bool disjoint = prev.t < next.s;
        const bool abutting = prev.t == next.s && prev.s < prev.t && next.s < next.t;
        independent = disjoint || abutting;
    }
    if (!independent) {
        pass.batched = false;
        pass.out = in;
        apply_sequential(pass.out, layer);
        return pass;
    }
    std::size_t total = in.size();
    for (const auto& r : ok) total = total - (r.t - r.s) + layer.edits[r.edit].replacement.size();
    pass.out.reserve(total);
    std::size_t cursor = 0;
    for (const auto& r : ok) {
        pass.out.insert(pass.out.end(), in.begin() + static_cast<std::ptrdiff_t>(cursor),
                        in.begin() + static_cast<std::ptrdiff_t>(r.s));
        const std::size_t a_start = pass.out.size();
        for (const auto& c : layer.edits[r.edit].replacement) pass.out.push_back(&c);
        pass.footprints.push_back({r.edit, r.s, r.t, a_start, pass.out.size()});
        cursor = r.t;
    }
    pass.out.insert(pass.out.end(), in.begin() + static_cast<std::ptrdiff_t>(cursor), in.end());
    return pass;
}

inline CellRefs compose_refs(const LayerStack& stack, std::size_t layer_end)
{
    CellRefs cur;
    for (std::size_t i = 0; i < layer_end && i < stack.layers.size(); ++i) {
        const auto& layer = stack.layers[i];
        if (!layer.visible || layer.edits.empty()) continue;
        cur = apply_layer(cur, layer).out;
    }
    return cur;
}

inline Composition materialize(const CellRefs& refs)
{
    Composition c;
    c.cells.reserve(refs.size());
    for (const Cell* p : refs) c.cells.push_back(*p);
    return c;
}

// B-side gap range that an output gap of a batched layer corresponds to.
struct GapRange {
    std::size_t lo, hi;
};

inline GapRange map_gap_to_input(const std::vector<Footprint>& fps, std::size_t gap)
{
    std::ptrdiff_t shift = 0;
    for (const auto& f : fps) {
        if (gap < f.a_start) break;
        if (gap <= f.a_end) {
            if (gap == f.a_start && gap == f.a_end) return {f.b_start, f.b_end};
            if (gap == f.a_start) return {f.b_start, f.b_start};
            return {f.b_end, f.b_end};
        }
        shift += static_cast<std::ptrdiff_t>(f.b_end - f.b_start) - static_cast<std::ptrdiff_t>(f.a_end - f.a_start);
    }
    const auto g = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(gap) + shift);
    return {g, g};
}

enum class RecordMode { strict, merge };

inline std::optional<AnchoredEdit> record(LayerStack& stack, const Composition& composition, std::size_t start,
                                          std::size_t end, std::string_view replacement, RecordMode mode)
{
    if (start > end || end > composition.size()) {
        throw InvalidRequestError("edit span [" + std::to_string(start) + ", " + std::to_string(end) +
                                  ") outside composition of length " + std::to_string(composition.size()));
    }
    Layer& layer = stack.active_layer();
    if (!layer.visible) throw HiddenLayerError("active layer '" + layer.name + "' is hidden");

    const CellRefs below = compose_refs(stack, stack.active);
    const LayerPass pass = apply_layer(below, layer);
    if (!pass.batched) throw OverlapError("edits of the active layer overlap each other");
    const CellRefs& through = pass.out;

    // Locate the span in the composition up to and including the active layer.
    std::unordered_map<StableId, std::size_t, StableIdHash> wanted;
    auto want = [&](std::size_t i) { wanted.emplace(composition.cells[i].id, npos); };
    const std::size_t n = composition.size();
    if (start < end) {
        want(start);
        want(end - 1);
    } else {
        if (start < n) want(start);
        if (start > 0) want(start - 1);
    }
    for (std::size_t i = 0; i < through.size(); ++i) {
        auto it = wanted.find(through[i]->id);
        if (it != wanted.end()) it->second = i;
    }
    auto pos_of = [&](std::size_t i) { return wanted.at(composition.cells[i].id); };
    std::size_t a = 0;
    std::size_t b = 0;
    if (start < end) {
        a = pos_of(start);
        const std::size_t last = pos_of(end - 1);
        if (a == npos || last == npos || last < a) {
            throw AnchorError("selection touches text owned by a layer above the active layer");
        }
        b = last + 1;
    } else if (n == 0) {
        a = b = through.size();
    } else if (start < n && pos_of(start) != npos) {
        a = b = pos_of(start);
    } else if (start > 0 && pos_of(start - 1) != npos) {
        a = b = pos_of(start - 1) + 1;
    } else if (start == 0 || start == n) {
        a = b = start == 0 ? 0 : through.size();
    } else {
        throw AnchorError("caret sits inside text owned by a layer above the active layer");
    }

    // Closed-interval conflicts with the layer's existing edits.
    std::size_t lo = a;
    std::size_t hi = b;
    std::vector<bool> absorbed(pass.footprints.size(), false);
    bool grew = true;
    bool any = false;
    while (grew) {
        grew = false;
        for (std::size_t k = 0; k < pass.footprints.size(); ++k) {
            const auto& f = pass.footprints[k];
            if (absorbed[k] || f.a_start > hi || lo > f.a_end) continue;
            if (mode == RecordMode::strict) throw OverlapError("edit overlaps an existing edit of the active layer");
            absorbed[k] = true;
            any = grew = true;
            lo = std::min(lo, f.a_start);
            hi = std::max(hi, f.a_end);
        }
    }

    const std::size_t b_lo = map_gap_to_input(pass.footprints, lo).lo;
    const std::size_t b_hi = map_gap_to_input(pass.footprints, hi).hi;

    std::vector<Cell> cells;
    for (std::size_t i = lo; i < a; ++i) cells.push_back(*through[i]);
    std::vector<Cell> fresh;
    for (auto& g : split_graphemes(replacement)) fresh.push_back({std::move(g), {}});
    std::vector<Cell> tail;
    for (std::size_t i = b; i < hi; ++i) tail.push_back(*through[i]);

    AnchoredEdit edit;
    if (b_lo < b_hi) {
        edit.anchor_start = IdBoundary{below[b_lo]->id, Side::before};
        edit.anchor_end = IdBoundary{below[b_hi - 1]->id, Side::after};
    } else if (b_lo == 0) {
        edit.anchor_start = edit.anchor_end = BeginBoundary{};
    } else if (b_lo == below.size()) {
        edit.anchor_start = edit.anchor_end = EndBoundary{};
    } else {
        edit.anchor_start = edit.anchor_end = IdBoundary{below[b_lo]->id, Side::before};
    }

    if (any) {
        std::vector<AnchoredEdit> kept;
        for (std::size_t k = 0; k < layer.edits.size(); ++k) {
            const bool drop = std::any_of(pass.footprints.begin(), pass.footprints.end(), [&](const Footprint& f) {
                return f.edit == k && absorbed[static_cast<std::size_t>(&f - pass.footprints.data())];
            });
            if (!drop) kept.push_back(layer.edits[k]);
        }
        // Reinstating the original text of the span needs no edit at all.
        std::string merged_text;
        for (const auto& c : cells) merged_text += c.ch;
        merged_text += replacement;
        for (const auto& c : tail) merged_text += c.ch;
        std::string below_text;
        for (std::size_t i = b_lo; i < b_hi; ++i) below_text += below[i]->ch;
        layer.edits = std::move(kept);
        if (merged_text == below_text) return std::nullopt;
    } else if (mode == RecordMode::merge && b_lo == b_hi && fresh.empty()) {
        return std::nullopt;
    }

    for (auto& c : fresh) c.id = layer.mint();
    edit.replacement = std::move(cells);
    edit.replacement.insert(edit.replacement.end(), fresh.begin(), fresh.end());
    edit.replacement.insert(edit.replacement.end(), tail.begin(), tail.end());
    layer.edits.push_back(edit);
    return edit;
}

}  // namespace detail

/// Folds visible layers bottom-to-top. Edits whose anchors do not resolve
/// are skipped for this pass and left untouched.
inline Composition compose(const LayerStack& stack)
{
    return detail::materialize(detail::compose_refs(stack, stack.layers.size()));
}

/// Records a span replacement on the active layer, anchored to the
/// identifiers of the composition beneath it. Throws OverlapError when the
/// span overlaps or touches an existing edit of that layer.
inline AnchoredEdit record_edit(LayerStack& stack, const Composition& composition, std::size_t start,
                                std::size_t end, std::string_view replacement)
{
    auto edit = detail::record(stack, composition, start, end, replacement, detail::RecordMode::strict);
    return *edit;
}

/// Like record_edit, but folds overlapping edits of the active layer into a
/// single edit. Returns nothing when the merged edit would be a no-op.
inline std::optional<AnchoredEdit> record_edit_merging(LayerStack& stack, const Composition& composition,
                                                       std::size_t start, std::size_t end,
                                                       std::string_view replacement)
{
    return detail::record(stack, composition, start, end, replacement, detail::RecordMode::merge);
}

/// Records every change of `cs` (a script over the current composition
/// text) on the active layer, one hunk at a time from the right.
inline void record_changeset(LayerStack& stack, const ChangeSet& cs)
{
    struct Hunk {
        std::size_t start, end;
        std::string text;
    };
    std::vector<Hunk> hunks;
    std::size_t src = 0;
    bool open = false;
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            src += r->count;
            open = false;
            continue;
        }
        if (!open) {
            hunks.push_back({src, src, {}});
            open = true;
        }
        if (auto d = std::get_if<Delete>(&op)) {
            src += grapheme_length(d->text);
            hunks.back().end = src;
        } else {
            hunks.back().text += std::get<Insert>(op).text;
        }
    }
    Composition current = compose(stack);
    if (cs.source_length() != current.size()) {
        throw LengthMismatchError("changeset does not match the current composition");
    }
    for (auto it = hunks.rbegin(); it != hunks.rend(); ++it) {
        record_edit_merging(stack, current, it->start, it->end, it->text);
        if (std::next(it) != hunks.rend()) current = compose(stack);
    }
}

/// A stack whose base layer holds `text` as one insertion at BEGIN.
inline LayerStack make_stack(std::string_view text, std::string base_name = "Base")
{
    LayerStack stack;
    Layer base;
    base.ordinal = stack.next_ordinal++;
    base.name = std::move(base_name);
    if (!text.empty()) {
        AnchoredEdit e{BeginBoundary{}, BeginBoundary{}, {}};
        for (auto& g : split_graphemes(text)) e.replacement.push_back({std::move(g), base.mint()});
        base.edits.push_back(std::move(e));
    }
    stack.layers.push_back(std::move(base));
    return stack;
}

/// Pushes an empty visible layer on top and makes it active.
inline Layer& add_layer(LayerStack& stack, std::string name)
{
    Layer layer;
    layer.ordinal = stack.next_ordinal++;
    layer.name = std::move(name);
    stack.layers.push_back(std::move(layer));
    stack.active = stack.layers.size() - 1;
    return stack.layers.back();
}

inline std::size_t require_layer(const LayerStack& stack, std::uint64_t ordinal)
{
    auto idx = stack.index_of(ordinal);
    if (!idx) throw UnknownLayerError("no layer with ordinal " + std::to_string(ordinal));
    return *idx;
}

inline void set_visibility(LayerStack& stack, std::uint64_t ordinal, bool visible)
{
    stack.layers[require_layer(stack, ordinal)].visible = visible;
}

inline void rename_layer(LayerStack& stack, std::uint64_t ordinal, std::string name)
{
    stack.layers[require_layer(stack, ordinal)].name = std::move(name);
}

inline void set_active(LayerStack& stack, std::uint64_t ordinal) { stack.active = require_layer(stack, ordinal); }

/// Moves a layer; the active layer stays the same layer.
inline void reorder_layer(LayerStack& stack, std::size_t from_index, std::size_t to_index)
{
    const std::size_t n = stack.layers.size();
    if (from_index >= n || to_index >= n) {
        throw IndexError("layer index out of range (" + std::to_string(n) + " layers)");
    }
    if (from_index == to_index) return;
    const std::uint64_t active_ordinal = stack.layers[stack.active].ordinal;
    Layer moved = std::move(stack.layers[from_index]);
    stack.layers.erase(stack.layers.begin() + static_cast<std::ptrdiff_t>(from_index));
    stack.layers.insert(stack.layers.begin() + static_cast<std::ptrdiff_t>(to_index), std::move(moved));
    stack.active = *stack.index_of(active_ordinal);
}

inline void remove_layer(LayerStack& stack, std::uint64_t ordinal)
{
    const std::size_t idx = require_layer(stack, ordinal);
    if (stack.layers.size() == 1) throw ConflictError("cannot delete the last layer");
    const std::uint64_t active_ordinal = stack.layers[stack.active].ordinal;
    stack.layers.erase(stack.layers.begin() + static_cast<std::ptrdiff_t>(idx));
    auto still = stack.index_of(active_ordinal);
    stack.active = still ? *still : stack.layers.size() - 1;
}

}  // namespace textoshop
