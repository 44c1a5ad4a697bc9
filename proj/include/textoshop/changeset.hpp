#pragma once

// Retain/delete/insert edit scripts over grapheme clusters.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "textoshop/errors.hpp"
#include "textoshop/text_core.hpp"

namespace textoshop {

struct Retain {
    std::size_t count = 0;
    bool operator==(const Retain&) const = default;
};

struct Delete {
    std::string text;
    bool operator==(const Delete&) const = default;
};

struct Insert {
    std::string text;
    bool operator==(const Insert&) const = default;
};

using ChangeOp = std::variant<Retain, Delete, Insert>;

/// A normalized edit script: no empty ops, no two adjacent ops of the same
/// kind, and inside every run of changes the Delete precedes the Insert.
class ChangeSet {
public:
    ChangeSet() = default;

    /// Builds a normalized changeset from arbitrary ops.
    static ChangeSet from_ops(const std::vector<ChangeOp>& ops)
    {
        ChangeSet cs;
        for (const auto& op : ops) {
            std::visit([&](const auto& o) { cs.push(o); }, op);
        }
        return cs;
    }

    void retain(std::size_t n) { push(Retain{n}); }
    void remove(std::string text) { push(Delete{std::move(text)}); }
    void insert(std::string text) { push(Insert{std::move(text)}); }

    const std::vector<ChangeOp>& ops() const noexcept { return ops_; }
    bool empty() const noexcept { return ops_.empty(); }

    /// True when the changeset changes nothing.
    bool is_identity() const noexcept
    {
        return std::all_of(ops_.begin(), ops_.end(), [](const ChangeOp& op) { return std::holds_alternative<Retain>(op); });
    }

    std::size_t source_length() const
    {
        std::size_t n = 0;
        for (const auto& op : ops_) {
            if (auto r = std::get_if<Retain>(&op)) n += r->count;
            if (auto d = std::get_if<Delete>(&op)) n += grapheme_length(d->text);
        }
        return n;
    }

    std::size_t target_length() const
    {
        std::size_t n = 0;
        for (const auto& op : ops_) {
            if (auto r = std::get_if<Retain>(&op)) n += r->count;
            if (auto i = std::get_if<Insert>(&op)) n += grapheme_length(i->text);
        }
        return n;
    }

    bool operator==(const ChangeSet&) const = default;

private:
    void push(Retain r)
    {
        if (r.count == 0) return;
        if (!ops_.empty()) {
            if (auto last = std::get_if<Retain>(&ops_.back())) {
                last->count += r.count;
                return;
            }
        }
        ops_.emplace_back(r);
    }

    void push(Delete d)
    {
        if (d.text.empty()) return;
        if (!ops_.empty()) {
            if (auto last = std::get_if<Delete>(&ops_.back())) {
                last->text += d.text;
                return;
            }
            // Keep Delete before Insert within a run of changes.
            if (auto ins = std::get_if<Insert>(&ops_.back())) {
                Insert held = std::move(*ins);
                ops_.pop_back();
                push(std::move(d));
                ops_.emplace_back(std::move(held));
                return;
            }
        }
        ops_.emplace_back(std::move(d));
    }

    void push(Insert i)
    {
        if (i.text.empty()) return;
        if (!ops_.empty()) {
            if (auto last = std::get_if<Insert>(&ops_.back())) {
                last->text += i.text;
                return;
            }
        }
        ops_.emplace_back(std::move(i));
    }

    std::vector<ChangeOp> ops_;
};

namespace detail {

// Interior LCS is only attempted when both sides together stay under this
// many grapheme cells; larger interiors become one delete/insert pair.
inline constexpr std::size_t kDiffInteriorCap = 5000;

inline void lcs_script(const std::vector<std::string>& a, std::size_t a0, std::size_t a1,
                       const std::vector<std::string>& b, std::size_t b0, std::size_t b1, ChangeSet& out)
{
    const std::size_t n = a1 - a0;
    const std::size_t m = b1 - b0;
    if (n == 0 || m == 0 || n + m > kDiffInteriorCap) {
        out.remove(join_graphemes(a, a0, a1));
        out.insert(join_graphemes(b, b0, b1));
        return;
    }
    // suffix LCS lengths: table[i][j] = LCS(a[a0+i..], b[b0+j..]).
    const std::size_t w = m + 1;
    std::vector<std::uint16_t> table((n + 1) * w, 0);
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[a0 + i] == b[b0 + j]) {
                table[i * w + j] = static_cast<std::uint16_t>(table[(i + 1) * w + j + 1] + 1);
            } else {
                table[i * w + j] = std::max(table[(i + 1) * w + j], table[i * w + j + 1]);
            }
        }
    }
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && a[a0 + i] == b[b0 + j]) {
            out.retain(1);
            ++i;
            ++j;
        } else if (j == m || (i < n && table[(i + 1) * w + j] >= table[i * w + j + 1])) {
            out.remove(a[a0 + i]);
            ++i;
        } else {
            out.insert(b[b0 + j]);
            ++j;
        }
    }
}

}  // namespace detail

/// Edit script turning `old_text` into `new_text`. Common prefix and suffix
/// are always retained; the interior uses a longest-common-subsequence
/// alignment on grapheme clusters.
inline ChangeSet diff(std::string_view old_text, std::string_view new_text)
{
    const auto a = split_graphemes(old_text);
    const auto b = split_graphemes(new_text);
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
        ++suffix;
    }
    ChangeSet cs;
    cs.retain(prefix);
    detail::lcs_script(a, prefix, a.size() - suffix, b, prefix, b.size() - suffix, cs);
    cs.retain(suffix);
    return cs;
}

inline PlainText apply(std::string_view old_text, const ChangeSet& cs)
{
    const auto gs = split_graphemes(old_text);
    if (cs.source_length() != gs.size()) {
        throw LengthMismatchError("changeset expects " + std::to_string(cs.source_length()) + " clusters, text has " +
                                  std::to_string(gs.size()));
    }
    std::string out;
    std::size_t pos = 0;
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            out += join_graphemes(gs, pos, pos + r->count);
            pos += r->count;
        } else if (auto d = std::get_if<Delete>(&op)) {
            const std::size_t len = grapheme_length(d->text);
            if (join_graphemes(gs, pos, pos + len) != d->text) {
                throw ContentMismatchError("deleted text does not match source at offset " + std::to_string(pos));
            }
            pos += len;
        } else {
            out += std::get<Insert>(op).text;
        }
    }
    return out;
}

/// Inverse script: apply(apply(x, cs), invert(cs)) == x.
inline ChangeSet invert(const ChangeSet& cs)
{
    ChangeSet inv;
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            inv.retain(r->count);
        } else if (auto d = std::get_if<Delete>(&op)) {
            inv.insert(d->text);
        } else {
            inv.remove(std::get<Insert>(op).text);
        }
    }
    return inv;
}

enum class Bias { left, right };

/// Maps a source offset to the target. Insertions exactly at `p` push it
/// right only with right bias; positions inside a deletion collapse to its
/// start.
inline std::size_t map_position(const ChangeSet& cs, std::size_t p, Bias bias)
{
    std::size_t src = 0;
    std::size_t dst = 0;
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            if (p < src + r->count) return dst + (p - src);
            src += r->count;
            dst += r->count;
        } else if (auto d = std::get_if<Delete>(&op)) {
            const std::size_t len = grapheme_length(d->text);
            if (p < src + len) return dst;
            src += len;
        } else {
            const std::size_t len = grapheme_length(std::get<Insert>(op).text);
            if (p == src && bias == Bias::left) return dst;
            dst += len;
        }
    }
    return dst + (p - src);
}

struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    bool operator==(const Span&) const = default;
};

enum class AnimationKind { remove, insert };

struct AnimationEvent {
    /// Source offsets for deletions, target offsets for insertions.
    Span span;
    AnimationKind kind = AnimationKind::remove;
    int start_ms = 0;
    int end_ms = 0;
    bool operator==(const AnimationEvent&) const = default;
};

struct AnimationTimeline {
    std::vector<AnimationEvent> events;
    int total_ms = 0;
    bool operator==(const AnimationTimeline&) const = default;
};

inline constexpr int kDeletePhaseMs = 500;
inline constexpr int kInsertPhaseMs = 500;

/// Two-phase change highlight: all deletions fade out together, then all
/// insertions fade in together.
inline AnimationTimeline timeline(const ChangeSet& cs)
{
    AnimationTimeline tl;
    std::vector<AnimationEvent> inserts;
    std::size_t src = 0;
    std::size_t dst = 0;
    for (const auto& op : cs.ops()) {
        if (auto r = std::get_if<Retain>(&op)) {
            src += r->count;
            dst += r->count;
        } else if (auto d = std::get_if<Delete>(&op)) {
            const std::size_t len = grapheme_length(d->text);
            tl.events.push_back({{src, src + len}, AnimationKind::remove, 0, kDeletePhaseMs});
            src += len;
        } else {
            const std::size_t len = grapheme_length(std::get<Insert>(op).text);
            inserts.push_back({{dst, dst + len}, AnimationKind::insert, kDeletePhaseMs, kDeletePhaseMs + kInsertPhaseMs});
            dst += len;
        }
    }
    tl.events.insert(tl.events.end(), inserts.begin(), inserts.end());
    tl.total_ms = tl.events.empty() ? 0 : kDeletePhaseMs + kInsertPhaseMs;
    return tl;
}

}  // namespace textoshop
