#pragma once

// Grapheme-aware text primitives. All public offsets are grapheme-cluster
// offsets into UTF-8 text.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textoshop {

using PlainText = std::string;

namespace utf8 {

/// Decodes one code point starting at `pos`. Invalid sequences decode to
/// U+FFFD with a length of one byte so the input bytes are never lost.
inline char32_t decode(std::string_view s, std::size_t pos, std::size_t& len)
{
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t i) {
        return pos + i < s.size() && (static_cast<unsigned char>(s[pos + i]) & 0xC0u) == 0x80u;
    };
    auto byte = [&](std::size_t i) { return static_cast<char32_t>(static_cast<unsigned char>(s[pos + i]) & 0x3Fu); };
    if (b0 < 0x80) {
        len = 1;
        return b0;
    }
    if ((b0 & 0xE0u) == 0xC0u && b0 >= 0xC2 && cont(1)) {
        len = 2;
        return (static_cast<char32_t>(b0 & 0x1Fu) << 6) | byte(1);
    }
    if ((b0 & 0xF0u) == 0xE0u && cont(1) && cont(2)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x0Fu) << 12) | (byte(1) << 6) | byte(2);
        if (cp >= 0x800 && (cp < 0xD800 || cp > 0xDFFF)) {
            len = 3;
            return cp;
        }
    }
    if ((b0 & 0xF8u) == 0xF0u && cont(1) && cont(2) && cont(3)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x07u) << 18) | (byte(1) << 12) | (byte(2) << 6) | byte(3);
        if (cp >= 0x10000 && cp <= 0x10FFFF) {
            len = 4;
            return cp;
        }
    }
    len = 1;
    return 0xFFFD;
}

inline void append(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline char32_t first_code_point(std::string_view s)
{
    if (s.empty()) {
        return 0;
    }
    std::size_t len = 0;
    return decode(s, 0, len);
}

}  // namespace utf8

namespace unicode {

inline bool is_whitespace(char32_t cp)
{
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Code points that attach to the preceding cluster.
inline bool is_extend(char32_t cp)
{
    return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x0483 && cp <= 0x0489) ||
           (cp >= 0x0591 && cp <= 0x05BD) || (cp >= 0x0610 && cp <= 0x061A) ||
           (cp >= 0x064B && cp <= 0x065F) || (cp >= 0x0900 && cp <= 0x0903) ||
           (cp >= 0x093A && cp <= 0x094F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
           (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
           (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0xFE20 && cp <= 0xFE2F) ||
           (cp >= 0x1F3FB && cp <= 0x1F3FF) || (cp >= 0xE0020 && cp <= 0xE007F) ||
           (cp >= 0xE0100 && cp <= 0xE01EF) || cp == 0x200C || cp == 0x200D;
}

inline bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }

// Latin Extended-A pairs upper/lower on alternating code points; these two
// runs start on an odd code point.
inline bool odd_upper_run(char32_t cp) { return (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E); }

inline bool caseless_latin_ext(char32_t cp) { return cp == 0x138 || cp == 0x149 || cp == 0x17F; }

// Case mapping covers Latin-1, Latin Extended-A, Greek and Cyrillic.
inline bool is_upper(char32_t cp)
{
    if (cp >= 'A' && cp <= 'Z') return true;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
    if (cp >= 0x100 && cp <= 0x17F) return !caseless_latin_ext(cp) && cp % 2 == (odd_upper_run(cp) ? 1u : 0u);
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return true;
    if (cp >= 0x400 && cp <= 0x42F) return true;
    return false;
}

inline bool is_lower(char32_t cp)
{
    if (cp >= 'a' && cp <= 'z') return true;
    if (cp >= 0xDF && cp <= 0xFF && cp != 0xF7) return true;
    if (cp >= 0x100 && cp <= 0x17F) return !is_upper(cp);
    if (cp >= 0x3B1 && cp <= 0x3C9) return true;
    if (cp >= 0x430 && cp <= 0x45F) return true;
    return false;
}

inline bool is_letter(char32_t cp)
{
    return is_upper(cp) || is_lower(cp) || cp == 0xAA || cp == 0xBA || (cp >= 0x3400 && cp <= 0x9FFF);
}

inline bool is_alnum(char32_t cp) { return is_letter(cp) || (cp >= '0' && cp <= '9'); }

inline char32_t to_upper(char32_t cp)
{
    if (!is_lower(cp)) return cp;
    if (cp <= 'z') return cp - 32;
    if (cp == 0xDF) return cp;
    if (cp == 0xFF) return 0x178;
    if (cp <= 0xFE) return cp - 32;
    if (caseless_latin_ext(cp)) return cp;
    if (cp == 0x131) return 'I';
    if (cp <= 0x17F) return cp - 1;
    if (cp >= 0x3B1 && cp <= 0x3C9) return cp == 0x3C2 ? 0x3A3 : cp - 32;
    if (cp >= 0x430 && cp <= 0x44F) return cp - 32;
    if (cp >= 0x450 && cp <= 0x45F) return cp - 80;
    return cp;
}

inline char32_t to_lower(char32_t cp)
{
    if (!is_upper(cp)) return cp;
    if (cp <= 'Z') return cp + 32;
    if (cp <= 0xDE) return cp + 32;
    if (cp == 0x178) return 0xFF;
    if (cp == 0x130) return 'i';
    if (cp <= 0x17F) return cp + 1;
    if (cp >= 0x391 && cp <= 0x3A9) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    return cp;
}

}  // namespace unicode

/// Splits UTF-8 text into extended grapheme clusters (CR LF, combining
/// marks, ZWJ sequences, emoji modifiers and regional-indicator pairs).
inline std::vector<std::string> split_graphemes(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    char32_t prev = 0;
    bool prev_zwj = false;
    int ri_run = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const char32_t cp = utf8::decode(text, pos, len);
        bool join = false;
        if (!out.empty()) {
            if (prev == '\r' && cp == '\n') {
                join = true;
            } else if (prev == '\r' || prev == '\n') {
                join = false;
            } else if (unicode::is_extend(cp) || prev_zwj) {
                join = true;
            } else if (unicode::is_regional_indicator(cp) && ri_run % 2 == 1) {
                join = true;
            }
        }
        if (join) {
            out.back().append(text.substr(pos, len));
        } else {
            out.emplace_back(text.substr(pos, len));
        }
        ri_run = unicode::is_regional_indicator(cp) ? ri_run + 1 : 0;
        prev_zwj = cp == 0x200D;
        prev = cp;
        pos += len;
    }
    return out;
}

inline std::size_t grapheme_length(std::string_view text) { return split_graphemes(text).size(); }

inline std::string join_graphemes(const std::vector<std::string>& gs, std::size_t begin, std::size_t end)
{
    std::string out;
    for (std::size_t i = begin; i < end && i < gs.size(); ++i) {
        out += gs[i];
    }
    return out;
}

inline std::string join_graphemes(const std::vector<std::string>& gs) { return join_graphemes(gs, 0, gs.size()); }

/// Grapheme-offset substring [begin, end).
inline std::string grapheme_substr(std::string_view text, std::size_t begin, std::size_t end)
{
    return join_graphemes(split_graphemes(text), begin, end);
}

inline bool is_whitespace_cluster(std::string_view g) { return !g.empty() && unicode::is_whitespace(utf8::first_code_point(g)); }

inline bool is_whitespace_only(std::string_view text)
{
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        if (!unicode::is_whitespace(utf8::decode(text, pos, len))) return false;
        pos += len;
    }
    return true;
}

struct SentenceSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const SentenceSpan&) const = default;
};

/// Abbreviations that never end a sentence.
inline constexpr std::array<std::string_view, 9> kAbbreviations = {
    "Mr.", "Mrs.", "Dr.", "e.g.", "i.e.", "etc.", "vs.", "Prof.", "St.",
};

inline bool is_sentence_terminator(std::string_view g) { return g == "." || g == "!" || g == "?"; }

/// Rule-based segmentation: a sentence ends after `.`, `!` or `?` when the
/// next cluster is whitespace followed by an uppercase letter, or when only
/// whitespace remains. Listed abbreviations never end a sentence.
inline std::vector<SentenceSpan> segment_sentences(const std::vector<std::string>& gs)
{
    std::vector<SentenceSpan> spans;
    const std::size_t n = gs.size();
    std::size_t i = 0;
    auto skip_ws = [&](std::size_t k) {
        while (k < n && is_whitespace_cluster(gs[k])) ++k;
        return k;
    };
    i = skip_ws(0);
    std::size_t start = i;
    while (i < n) {
        if (is_sentence_terminator(gs[i])) {
            const std::size_t after = i + 1;
            bool split = false;
            if (after == n) {
                split = true;
            } else if (is_whitespace_cluster(gs[after])) {
                const std::size_t next = skip_ws(after);
                split = next == n || unicode::is_upper(utf8::first_code_point(gs[next]));
            }
            if (split) {
                std::size_t word_start = i;
                while (word_start > start && !is_whitespace_cluster(gs[word_start - 1])) --word_start;
                const std::string word = join_graphemes(gs, word_start, after);
                split = std::find(kAbbreviations.begin(), kAbbreviations.end(), word) == kAbbreviations.end();
            }
            if (split) {
                spans.push_back({start, after});
                i = skip_ws(after);
                start = i;
                continue;
            }
        }
        ++i;
    }
    if (start < n) {
        std::size_t end = n;
        while (end > start && is_whitespace_cluster(gs[end - 1])) --end;
        if (end > start) spans.push_back({start, end});
    }
    return spans;
}

inline std::vector<SentenceSpan> segment_sentences(std::string_view text) { return segment_sentences(split_graphemes(text)); }

/// Number of maximal runs of non-whitespace characters.
inline std::size_t word_count(std::string_view text)
{
    std::size_t count = 0;
    bool in_word = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const bool ws = unicode::is_whitespace(utf8::decode(text, pos, len));
        if (!ws && !in_word) ++count;
        in_word = !ws;
        pos += len;
    }
    return count;
}

/// A word with the whitespace that follows it.
struct Token {
    std::string word;
    std::string trailing;
};

/// Splits into leading whitespace and (word, trailing whitespace) tokens.
inline std::vector<Token> tokenize(std::string_view text, std::string* leading = nullptr)
{
    std::vector<Token> tokens;
    std::string lead;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const bool ws = unicode::is_whitespace(utf8::decode(text, pos, len));
        const auto piece = text.substr(pos, len);
        if (ws) {
            (tokens.empty() ? lead : tokens.back().trailing).append(piece);
        } else if (tokens.empty() || !tokens.back().trailing.empty()) {
            tokens.push_back({std::string(piece), {}});
        } else {
            tokens.back().word.append(piece);
        }
        pos += len;
    }
    if (leading) *leading = std::move(lead);
    return tokens;
}

inline std::vector<std::string> words(std::string_view text)
{
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) out.push_back(std::move(t.word));
    return out;
}

inline std::string join_words(const std::vector<std::string>& ws, std::string_view sep = " ")
{
    std::string out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (i) out += sep;
        out += ws[i];
    }
    return out;
}

struct FormatSignature {
    std::string leading_ws;
    std::string trailing_ws;
    bool starts_uppercase = false;
    /// One of '.', '!', '?', U+2026; "..." is reported as U+2026.
    std::optional<char32_t> terminal_punct;

    bool operator==(const FormatSignature&) const = default;
};

namespace detail {

inline bool is_terminal_punct_cluster(std::string_view g) { return is_sentence_terminator(g) || g == "\xE2\x80\xA6"; }

struct Trimmed {
    std::string leading;
    std::vector<std::string> core;
    std::string trailing;
};

inline Trimmed trim_graphemes(std::string_view text)
{
    auto gs = split_graphemes(text);
    std::size_t b = 0;
    std::size_t e = gs.size();
    while (b < e && is_whitespace_cluster(gs[b])) ++b;
    while (e > b && is_whitespace_cluster(gs[e - 1])) --e;
    Trimmed t;
    t.leading = join_graphemes(gs, 0, b);
    t.trailing = join_graphemes(gs, e, gs.size());
    t.core.assign(std::make_move_iterator(gs.begin() + static_cast<std::ptrdiff_t>(b)),
                  std::make_move_iterator(gs.begin() + static_cast<std::ptrdiff_t>(e)));
    return t;
}

// Index of the first cluster that starts with a letter, if any.
inline std::optional<std::size_t> first_letter(const std::vector<std::string>& gs)
{
    for (std::size_t i = 0; i < gs.size(); ++i) {
        if (unicode::is_letter(utf8::first_code_point(gs[i]))) return i;
    }
    return std::nullopt;
}

inline std::string recase_cluster(std::string_view g, bool upper)
{
    std::size_t len = 0;
    const char32_t cp = utf8::decode(g, 0, len);
    std::string out;
    utf8::append(out, upper ? unicode::to_upper(cp) : unicode::to_lower(cp));
    out.append(g.substr(len));
    return out;
}

}  // namespace detail

inline std::string trim(std::string_view text) { return join_graphemes(detail::trim_graphemes(text).core); }

inline FormatSignature format_signature(std::string_view selection)
{
    auto t = detail::trim_graphemes(selection);
    FormatSignature sig;
    sig.leading_ws = std::move(t.leading);
    sig.trailing_ws = std::move(t.trailing);
    if (auto i = detail::first_letter(t.core)) {
        sig.starts_uppercase = unicode::is_upper(utf8::first_code_point(t.core[*i]));
    }
    if (!t.core.empty() && detail::is_terminal_punct_cluster(t.core.back())) {
        const auto& last = t.core.back();
        const bool ellipsis = last == "\xE2\x80\xA6" ||
                              (last == "." && t.core.size() >= 3 && t.core[t.core.size() - 2] == "." &&
                               t.core[t.core.size() - 3] == ".");
        sig.terminal_punct = ellipsis ? U'…' : utf8::first_code_point(last);
    }
    return sig;
}

/// Adjusts `replacement` to the formatting of `original`: whitespace
/// re-applied, first-letter case matched, and terminal punctuation added or
/// stripped. A blank replacement yields an empty string.
inline PlainText reintegrate(std::string_view original, std::string_view replacement)
{
    const FormatSignature sig = format_signature(original);
    auto core = detail::trim_graphemes(replacement).core;
    if (core.empty()) return {};

    if (auto i = detail::first_letter(core)) {
        core[*i] = detail::recase_cluster(core[*i], sig.starts_uppercase);
    }
    const bool has_punct = detail::is_terminal_punct_cluster(core.back());
    if (sig.terminal_punct && !has_punct) {
        std::string p;
        utf8::append(p, *sig.terminal_punct);
        core.push_back(std::move(p));
    } else if (!sig.terminal_punct && has_punct) {
        while (!core.empty() && detail::is_terminal_punct_cluster(core.back())) core.pop_back();
        while (!core.empty() && is_whitespace_cluster(core.back())) core.pop_back();
        if (core.empty()) return {};
    }
    return sig.leading_ws + join_graphemes(core) + sig.trailing_ws;
}

/// Reapplies only the leading/trailing whitespace of `original`.
inline PlainText reintegrate_whitespace(std::string_view original, std::string_view replacement)
{
    const FormatSignature sig = format_signature(original);
    const std::string core = trim(replacement);
    if (core.empty()) return {};
    return sig.leading_ws + core + sig.trailing_ws;
}

}  // namespace textoshop
