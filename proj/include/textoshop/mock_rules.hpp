#pragma once

// Deterministic stand-ins for every language transform. They exercise the
// engine's plumbing; they make no claim about linguistic quality.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textoshop/errors.hpp"
#include "textoshop/text_core.hpp"
#include "textoshop/tone_space.hpp"

namespace textoshop {

enum class Number { singular, plural };
enum class Tense { past, present, future };

}  // namespace textoshop

namespace textoshop::mock {

namespace detail {

inline bool is_gap_punct(std::string_view g) { return g == "." || g == "," || g == ";" || g == ":" || g == "!" || g == "?"; }

inline std::string lowercase(std::string_view s)
{
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t len = 0;
        utf8::append(out, unicode::to_lower(utf8::decode(s, pos, len)));
        pos += len;
    }
    return out;
}

// Rebuilds text from tokens, placing `ws` words into the original word slots.
inline std::string refill(const std::string& leading, const std::vector<Token>& slots, const std::vector<std::string>& ws)
{
    std::string out = leading;
    for (std::size_t i = 0; i < slots.size(); ++i) out += ws[i] + slots[i].trailing;
    return out;
}

inline std::size_t alnum_count(std::string_view word)
{
    std::size_t n = 0;
    for (const auto& g : split_graphemes(word)) {
        if (unicode::is_alnum(utf8::first_code_point(g))) ++n;
    }
    return n;
}

// Word core without trailing punctuation.
inline std::pair<std::string, std::string> split_trailing_punct(std::string_view word)
{
    auto gs = split_graphemes(word);
    std::size_t end = gs.size();
    while (end > 0 && !unicode::is_alnum(utf8::first_code_point(gs[end - 1]))) --end;
    return {join_graphemes(gs, 0, end), join_graphemes(gs, end, gs.size())};
}

inline int round_half_away(double v) { return static_cast<int>(std::round(v)); }

}  // namespace detail

/// Removes [offset, offset+len) from `sentence`, closing up doubled
/// whitespace and whitespace left before punctuation at the seam.
inline std::string erase(std::string_view sentence, std::size_t offset, std::size_t len)
{
    auto gs = split_graphemes(sentence);
    std::vector<std::string> before(gs.begin(), gs.begin() + static_cast<std::ptrdiff_t>(offset));
    std::vector<std::string> after(gs.begin() + static_cast<std::ptrdiff_t>(offset + len), gs.end());
    if (before.empty() || is_whitespace_cluster(before.back())) {
        while (!after.empty() && is_whitespace_cluster(after.front())) after.erase(after.begin());
    }
    if (after.empty() || detail::is_gap_punct(after.front())) {
        while (!before.empty() && is_whitespace_cluster(before.back())) before.pop_back();
    }
    return join_graphemes(before) + join_graphemes(after);
}

/// Collapses whitespace, capitalizes the first letter and ensures a
/// terminal punctuation mark. Idempotent.
inline std::string repair(std::string_view text)
{
    std::string collapsed = join_words(words(text));
    if (collapsed.empty()) return collapsed;
    auto gs = split_graphemes(collapsed);
    for (auto& g : gs) {
        const char32_t cp = utf8::first_code_point(g);
        if (unicode::is_letter(cp)) {
            std::size_t l = 0;
            utf8::decode(g, 0, l);
            std::string up;
            utf8::append(up, unicode::to_upper(cp));
            g = up + g.substr(l);
            break;
        }
    }
    const auto& last = gs.back();
    if (!(is_sentence_terminator(last) || last == "\xE2\x80\xA6")) gs.emplace_back(".");
    return join_graphemes(gs);
}

/// Rotates the words right by one, keeping the whitespace layout.
inline std::string smudge(std::string_view selection)
{
    std::string lead;
    auto toks = tokenize(selection, &lead);
    if (toks.size() < 2) return std::string(selection);
    std::vector<std::string> ws;
    ws.push_back(toks.back().word);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) ws.push_back(toks[i].word);
    return detail::refill(lead, toks, ws);
}

/// Left cyclic word shift by round(intensity * n) mod n.
inline std::string rotate(std::string_view selection, double intensity)
{
    std::string lead;
    auto toks = tokenize(selection, &lead);
    const std::size_t n = toks.size();
    if (n == 0) return std::string(selection);
    const auto shift = static_cast<std::size_t>(detail::round_half_away(intensity * static_cast<double>(n))) % n;
    std::vector<std::string> ws(n);
    for (std::size_t i = 0; i < n; ++i) ws[i] = toks[(i + shift) % n].word;
    return detail::refill(lead, toks, ws);
}

/// Appends (plural) or strips (singular) a trailing "s" on every word.
inline std::string set_number(std::string_view selection, Number number)
{
    std::string lead;
    auto toks = tokenize(selection, &lead);
    std::vector<std::string> ws;
    for (const auto& t : toks) {
        auto [core, punct] = detail::split_trailing_punct(t.word);
        if (number == Number::plural) {
            if (!core.empty()) core += "s";
        } else if (!core.empty() && (core.back() == 's' || core.back() == 'S')) {
            core.pop_back();
        }
        ws.push_back(core + punct);
    }
    return detail::refill(lead, toks, ws);
}

inline constexpr std::array<std::string_view, 2> kTenseMarkers = {"will ", "did "};

/// Operates on the whole sentence so a marker placed just before the
/// selection by an earlier call can be found again. Markers match
/// case-insensitively.
inline std::string set_tense(std::string_view sentence, std::size_t offset, std::size_t len, Tense tense)
{
    auto gs = split_graphemes(sentence);
    std::string before = join_graphemes(gs, 0, offset);
    std::string sel = join_graphemes(gs, offset, offset + len);
    const std::string after = join_graphemes(gs, offset + len, gs.size());
    std::string lead;
    tokenize(sel, &lead);
    if (lead.empty()) {
        const std::string sel_l = detail::lowercase(sel);
        const std::string before_l = detail::lowercase(before);
        for (auto m : kTenseMarkers) {
            if (sel_l.starts_with(m)) {
                sel.erase(0, m.size());
                break;
            }
            if (before_l.ends_with(m)) {
                before.erase(before.size() - m.size());
                break;
            }
        }
    }
    if (tense != Tense::present) sel.insert(lead.size(), tense == Tense::future ? kTenseMarkers[0] : kTenseMarkers[1]);
    return before + sel + after;
}

inline const std::vector<std::string>& positive_lexicon()
{
    static const std::vector<std::string> words = {
        "good", "great", "happy", "love", "loves", "nice", "wonderful", "excellent", "joy", "best",
        "fun", "glad", "beautiful", "enjoy", "enjoys", "like", "likes", "delighted", "pleasant", "calm",
    };
    return words;
}

inline const std::vector<std::string>& negative_lexicon()
{
    static const std::vector<std::string> words = {
        "bad", "sad", "tired", "exhausted", "hate", "hates", "terrible", "awful", "angry", "worst",
        "poor", "wet", "raining", "boring", "ugly", "afraid", "lonely", "sick", "wiped", "weary",
    };
    return words;
}

/// formality = mean alphanumeric word length, sentiment = 5 + positive hits
/// - negative hits, complexity = mean words per sentence / 3; all rounded
/// half away from zero and clamped to [0, 10].
inline ToneVector estimate_tone(std::string_view text)
{
    const auto ws = words(text);
    if (ws.empty()) throw InvalidRequestError("cannot estimate the tone of empty text");
    std::size_t letters = 0;
    int sentiment = 5;
    auto contains = [](const std::vector<std::string>& lex, const std::string& w) {
        return std::find(lex.begin(), lex.end(), w) != lex.end();
    };
    for (const auto& w : ws) {
        letters += detail::alnum_count(w);
        const std::string key = detail::lowercase(detail::split_trailing_punct(w).first);
        if (contains(positive_lexicon(), key)) ++sentiment;
        if (contains(negative_lexicon(), key)) --sentiment;
    }
    const double mean_len = static_cast<double>(letters) / static_cast<double>(ws.size());
    const auto sentences = segment_sentences(text);
    const double mean_sentence = static_cast<double>(ws.size()) / static_cast<double>(std::max<std::size_t>(1, sentences.size()));
    ToneVector t;
    t.formality = std::min(10, detail::round_half_away(mean_len));
    t.sentiment = std::clamp(sentiment, 0, 10);
    t.complexity = std::min(10, detail::round_half_away(mean_sentence / 3.0));
    return t;
}

/// Moves the text toward `tone` relative to its own estimate: higher
/// formality capitalizes the first letter, lower formality lowercases every
/// letter; higher sentiment ends with "!", lower sentiment ends with ".".
/// Complexity is not expressed.
inline std::string apply_tone(std::string_view selection, const ToneVector& tone)
{
    const ToneVector est = estimate_tone(selection);
    std::string lead;
    auto toks = tokenize(selection, &lead);
    std::vector<std::string> ws;
    for (const auto& t : toks) ws.push_back(t.word);
    if (tone.formality > est.formality) {
        for (auto& w : ws) {
            auto gs = split_graphemes(w);
            auto it = std::find_if(gs.begin(), gs.end(), [](const std::string& g) { return unicode::is_letter(utf8::first_code_point(g)); });
            if (it == gs.end()) continue;
            *it = ::textoshop::detail::recase_cluster(*it, true);
            w = join_graphemes(gs);
            break;
        }
    } else if (tone.formality < est.formality) {
        for (auto& w : ws) w = detail::lowercase(w);
    }
    if (tone.sentiment != est.sentiment && !ws.empty()) {
        auto gs = split_graphemes(ws.back());
        while (!gs.empty() && (is_sentence_terminator(gs.back()) || gs.back() == "\xE2\x80\xA6")) gs.pop_back();
        gs.emplace_back(tone.sentiment > est.sentiment ? "!" : ".");
        ws.back() = join_graphemes(gs);
    }
    return detail::refill(lead, toks, ws);
}

inline std::string prompt(std::string_view selection, std::string_view prompt_text)
{
    const auto ws = words(prompt_text);
    if (ws.empty()) throw InvalidRequestError("prompt is empty");
    return "[" + ws.front() + "] " + std::string(selection);
}

/// delta < 0 drops trailing words (keeping at least one), delta > 0 repeats
/// the final word.
inline std::string resize(std::string_view sentence, int delta)
{
    std::string lead;
    auto toks = tokenize(sentence, &lead);
    if (toks.empty()) return std::string(sentence);
    std::string out;
    if (delta <= 0) {
        const std::size_t keep = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(toks.size()) + delta);
        for (std::size_t i = 0; i < keep; ++i) {
            out += toks[i].word;
            if (i + 1 < keep) out += toks[i].trailing;
        }
        return out;
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
        out += toks[i].word;
        if (i + 1 < toks.size()) out += toks[i].trailing;
    }
    for (int k = 0; k < delta; ++k) out += " " + toks.back().word;
    return out;
}

/// Replaces the ", " nearest the midpoint with ". " and capitalizes what
/// follows. Returns nothing when there is no comma to split at.
inline std::optional<std::string> split(std::string_view selection)
{
    auto gs = split_graphemes(selection);
    const double mid = static_cast<double>(gs.size()) / 2.0;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i + 1 < gs.size(); ++i) {
        if (gs[i] == "," && gs[i + 1] == " ") {
            if (!best || std::abs(static_cast<double>(i) - mid) < std::abs(static_cast<double>(*best) - mid)) best = i;
        }
    }
    if (!best) return std::nullopt;
    gs[*best] = ".";
    for (std::size_t i = *best + 2; i < gs.size(); ++i) {
        if (unicode::is_letter(utf8::first_code_point(gs[i]))) {
            gs[i] = ::textoshop::detail::recase_cluster(gs[i], true);
            break;
        }
        if (!is_whitespace_cluster(gs[i])) break;
    }
    return join_graphemes(gs);
}

/// Replaces every ". " with ", " and lowercases the letter after it.
inline std::string combine(std::string_view selection)
{
    auto gs = split_graphemes(selection);
    for (std::size_t i = 0; i + 1 < gs.size(); ++i) {
        if (gs[i] == "." && gs[i + 1] == " ") {
            gs[i] = ",";
            if (i + 2 < gs.size() && unicode::is_letter(utf8::first_code_point(gs[i + 2]))) {
                gs[i + 2] = ::textoshop::detail::recase_cluster(gs[i + 2], false);
            }
        }
    }
    return join_graphemes(gs);
}

enum class BooleanOp { unite, intersect, subtract, exclude };

namespace detail {

// Words of `a` not cancelled by an equal (case-insensitive) word of `b`.
inline std::vector<std::string> multiset_minus(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<std::string> pool;
    for (const auto& w : b) pool.push_back(lowercase(w));
    std::vector<std::string> out;
    for (const auto& w : a) {
        auto it = std::find(pool.begin(), pool.end(), lowercase(w));
        if (it != pool.end()) {
            pool.erase(it);
        } else {
            out.push_back(w);
        }
    }
    return out;
}

inline std::vector<std::string> multiset_and(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<std::string> pool;
    for (const auto& w : b) pool.push_back(lowercase(w));
    std::vector<std::string> out;
    for (const auto& w : a) {
        auto it = std::find(pool.begin(), pool.end(), lowercase(w));
        if (it != pool.end()) {
            pool.erase(it);
            out.push_back(w);
        }
    }
    return out;
}

}  // namespace detail

/// Word-multiset semantics with `dragged` as A and `target` as B:
/// unite = A ++ (B - A), intersect = A & B, subtract = B - A,
/// exclude = (A - B) ++ (B - A).
inline std::string boolean(std::string_view dragged, std::string_view target, BooleanOp op)
{
    const auto a = words(dragged);
    const auto b = words(target);
    std::vector<std::string> out;
    switch (op) {
    case BooleanOp::unite:
        out = a;
        for (auto& w : detail::multiset_minus(b, a)) out.push_back(std::move(w));
        break;
    case BooleanOp::intersect:
        out = detail::multiset_and(a, b);
        break;
    case BooleanOp::subtract:
        out = detail::multiset_minus(b, a);
        break;
    case BooleanOp::exclude:
        out = detail::multiset_minus(a, b);
        for (auto& w : detail::multiset_minus(b, a)) out.push_back(std::move(w));
        break;
    }
    return join_words(out);
}

}  // namespace textoshop::mock
