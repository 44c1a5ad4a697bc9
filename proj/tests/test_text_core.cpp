#include <gtest/gtest.h>

#include "textoshop/text_core.hpp"

using namespace textoshop;

TEST(Graphemes, CombiningMarksStayWithBase)
{
    const std::string s = "e\xCC\x81t\xC3\xA9";  // e + U+0301, t, é
    EXPECT_EQ(grapheme_length(s), 3u);
    const auto gs = split_graphemes(s);
    EXPECT_EQ(gs[0], "e\xCC\x81");
}

TEST(Graphemes, EmojiZwjSequenceIsOneCluster)
{
    const std::string family = "\xF0\x9F\x91\xA8\xE2\x80\x8D\xF0\x9F\x91\xA9\xE2\x80\x8D\xF0\x9F\x91\xA7";
    EXPECT_EQ(grapheme_length(family), 1u);
    EXPECT_EQ(grapheme_length("a" + family + "b"), 3u);
}

TEST(Graphemes, FlagsPairUp)
{
    const std::string flags = "\xF0\x9F\x87\xAB\xF0\x9F\x87\xB7\xF0\x9F\x87\xA9\xF0\x9F\x87\xAA";  // FR DE
    EXPECT_EQ(grapheme_length(flags), 2u);
}

TEST(Graphemes, CrLfIsOneCluster)
{
    EXPECT_EQ(grapheme_length("a\r\nb"), 3u);
}

TEST(Graphemes, SubstrUsesClusterOffsets)
{
    EXPECT_EQ(grapheme_substr("h\xC3\xA9llo", 1, 3), "\xC3\xA9l");
}

TEST(Sentences, SplitsOnTerminatorBeforeUppercase)
{
    const std::string t = "Alice was tired. She sat down! Did she? yes.";
    const auto spans = segment_sentences(t);
    ASSERT_EQ(spans.size(), 3u);
    EXPECT_EQ(grapheme_substr(t, spans[0].start, spans[0].end), "Alice was tired.");
    EXPECT_EQ(grapheme_substr(t, spans[1].start, spans[1].end), "She sat down!");
    EXPECT_EQ(grapheme_substr(t, spans[2].start, spans[2].end), "Did she? yes.");
}

TEST(Sentences, AbbreviationsDoNotEndSentences)
{
    const std::string t = "Mr. Smith met Dr. Jones. They talked.";
    const auto spans = segment_sentences(t);
    ASSERT_EQ(spans.size(), 2u);
    EXPECT_EQ(grapheme_substr(t, spans[0].start, spans[0].end), "Mr. Smith met Dr. Jones.");
}

TEST(Sentences, TrailingFragmentWithoutTerminator)
{
    const auto spans = segment_sentences("  One. two three  ");
    ASSERT_EQ(spans.size(), 1u);  // "two" is lowercase, so no split
    EXPECT_EQ(spans[0].start, 2u);
    EXPECT_EQ(spans[0].end, 16u);
}

TEST(Sentences, EmptyAndBlank)
{
    EXPECT_TRUE(segment_sentences("").empty());
    EXPECT_TRUE(segment_sentences("   ").empty());
}

TEST(Words, CountMaximalNonWhitespaceRuns)
{
    EXPECT_EQ(word_count(""), 0u);
    EXPECT_EQ(word_count("  a  b\tc\n"), 3u);
    EXPECT_EQ(word_count("don't stop"), 2u);
}

TEST(FormatSignature, CapturesWhitespaceCaseAndPunct)
{
    const auto sig = format_signature("  Hello there.\n");
    EXPECT_EQ(sig.leading_ws, "  ");
    EXPECT_EQ(sig.trailing_ws, "\n");
    EXPECT_TRUE(sig.starts_uppercase);
    ASSERT_TRUE(sig.terminal_punct);
    EXPECT_EQ(*sig.terminal_punct, U'.');
    EXPECT_EQ(format_signature("wait...").terminal_punct, std::optional<char32_t>(U'…'));
    EXPECT_FALSE(format_signature("no stop").terminal_punct);
}

TEST(Reintegrate, RestoresSignature)
{
    EXPECT_EQ(reintegrate(" Alice was tired. ", "alice is sleepy"), " Alice is sleepy. ");
    EXPECT_EQ(reintegrate("was tired", "Is Sleepy!"), "is Sleepy");
    EXPECT_EQ(reintegrate("Really?", "truly"), "Truly?");
    EXPECT_EQ(reintegrate("Really?", "truly!"), "Truly!");  // keeps the backend's own mark
    EXPECT_EQ(reintegrate("x", "   "), "");
}

TEST(Reintegrate, SignatureOfResultMatchesOriginal)
{
    const std::vector<std::pair<std::string, std::string>> cases = {
        {" The cat. ", "a dog"}, {"the cat", "A Dog."}, {"\tHi!", "hello"}, {"x y", "Z W?"},
    };
    for (const auto& [orig, repl] : cases) {
        const auto a = format_signature(orig);
        const auto b = format_signature(reintegrate(orig, repl));
        EXPECT_EQ(a.leading_ws, b.leading_ws) << orig;
        EXPECT_EQ(a.trailing_ws, b.trailing_ws) << orig;
        EXPECT_EQ(a.starts_uppercase, b.starts_uppercase) << orig;
        EXPECT_EQ(a.terminal_punct.has_value(), b.terminal_punct.has_value()) << orig;
    }
}

TEST(Reintegrate, WhitespaceOnlyVariant)
{
    EXPECT_EQ(reintegrate_whitespace("  a b  ", "Fixed text."), "  Fixed text.  ");
}

TEST(Unicode, LatinExtendedCase)
{
    EXPECT_EQ(unicode::to_upper(U'ž'), U'Ž');
    EXPECT_EQ(unicode::to_lower(U'Ÿ'), U'ÿ');
    EXPECT_EQ(unicode::to_upper(U'ÿ'), U'Ÿ');
    EXPECT_EQ(unicode::to_lower(U'Ĺ'), U'ĺ');
    EXPECT_TRUE(unicode::is_upper(U'Ω'));
}

TEST(Unicode, CaseMappingRoundTrips)
{
    for (char32_t cp = 'A'; cp <= 0x45F; ++cp) {
        if (!unicode::is_upper(cp) || cp == 0x130) continue;
        const char32_t lo = unicode::to_lower(cp);
        EXPECT_TRUE(unicode::is_lower(lo)) << std::hex << static_cast<unsigned>(cp);
        EXPECT_EQ(unicode::to_upper(lo), cp) << std::hex << static_cast<unsigned>(cp);
    }
}
