#include <gtest/gtest.h>

#include "layer_gen.hpp"
#include "oracles.hpp"
#include "textoshop/layer_model.hpp"

using namespace textoshop;

namespace {

std::string text_of(const LayerStack& s) { return composition_text(compose(s)); }

void edit(LayerStack& s, std::size_t a, std::size_t b, std::string_view repl)
{
    record_edit_merging(s, compose(s), a, b, repl);
}

}  // namespace

TEST(Layers, BaseLayerHoldsInitialText)
{
    const auto s = make_stack("Hello world");
    ASSERT_EQ(s.layers.size(), 1u);
    ASSERT_EQ(s.layers[0].edits.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<BeginBoundary>(s.layers[0].edits[0].anchor_start));
    EXPECT_EQ(text_of(s), "Hello world");
    EXPECT_EQ(text_of(make_stack("")), "");
}

TEST(Layers, HidingALayerRestoresTheTextBelow)
{
    auto s = make_stack("Alice was beginning to get very tired");
    add_layer(s, "Edits");
    edit(s, 10, 20, "");
    EXPECT_EQ(text_of(s), "Alice was to get very tired");
    set_visibility(s, s.layers[1].ordinal, false);
    EXPECT_EQ(text_of(s), "Alice was beginning to get very tired");
    set_visibility(s, s.layers[1].ordinal, true);
    EXPECT_EQ(text_of(s), "Alice was to get very tired");
}

TEST(Layers, EditsFollowTextChangedBelow)
{
    auto s = make_stack("the cat sat");
    add_layer(s, "Top");
    edit(s, 4, 7, "dog");
    EXPECT_EQ(text_of(s), "the dog sat");
    set_active(s, s.layers[0].ordinal);
    edit(s, 0, 3, "a");
    EXPECT_EQ(text_of(s), "a dog sat");
}

TEST(Layers, StrictRecordRejectsTouchingEdits)
{
    auto s = make_stack("abcdef");
    add_layer(s, "Top");
    record_edit(s, compose(s), 1, 2, "X");
    EXPECT_THROW(record_edit(s, compose(s), 2, 3, "Y"), OverlapError);
    EXPECT_NO_THROW(record_edit(s, compose(s), 4, 5, "Z"));
    EXPECT_EQ(text_of(s), "aXcdZf");
}

TEST(Layers, MergingFoldsOverlaps)
{
    auto s = make_stack("abcdef");
    add_layer(s, "Top");
    edit(s, 1, 2, "X");
    edit(s, 2, 3, "Y");
    EXPECT_EQ(text_of(s), "aXYdef");
    EXPECT_EQ(s.layers[1].edits.size(), 1u);
    edit(s, 1, 3, "bc");
    EXPECT_EQ(text_of(s), "abcdef");
    EXPECT_TRUE(s.layers[1].edits.empty());
}

TEST(Layers, RecordingOnHiddenLayerFails)
{
    auto s = make_stack("abc");
    add_layer(s, "Top");
    set_visibility(s, s.layers[1].ordinal, false);
    EXPECT_THROW(edit(s, 0, 1, "x"), HiddenLayerError);
}

TEST(Layers, SpanOwnedByHigherLayerIsRejected)
{
    auto s = make_stack("abc");
    add_layer(s, "Top");
    edit(s, 1, 1, "XYZ");
    set_active(s, s.layers[0].ordinal);
    EXPECT_THROW(edit(s, 2, 3, "q"), AnchorError);
}

TEST(Layers, OrphanedEditsAreSkippedNotDropped)
{
    auto s = make_stack("abc");
    add_layer(s, "Mid");
    edit(s, 1, 2, "XX");
    add_layer(s, "Top");
    edit(s, 2, 3, "y");  // anchored on the second X
    EXPECT_EQ(text_of(s), "aXyc");
    set_visibility(s, s.layers[1].ordinal, false);
    EXPECT_EQ(text_of(s), "abc");
    EXPECT_EQ(s.layers[2].edits.size(), 1u);
    set_visibility(s, s.layers[1].ordinal, true);
    EXPECT_EQ(text_of(s), "aXyc");
}

TEST(Layers, InsertionAnchorsAtGapEdges)
{
    auto s = make_stack("ab");
    add_layer(s, "Top");
    edit(s, 0, 0, "<");
    edit(s, 3, 3, ">");
    edit(s, 2, 2, "|");
    EXPECT_EQ(text_of(s), "<a|b>");
}

TEST(Layers, ReorderKeepsActiveLayer)
{
    auto s = make_stack("x");
    add_layer(s, "A");
    add_layer(s, "B");
    const auto active = s.active_layer().ordinal;
    reorder_layer(s, 2, 0);
    EXPECT_EQ(s.active_layer().ordinal, active);
    EXPECT_THROW(reorder_layer(s, 5, 0), IndexError);
}

TEST(Layers, LastLayerCannotBeRemoved)
{
    auto s = make_stack("x");
    EXPECT_THROW(remove_layer(s, s.layers[0].ordinal), ConflictError);
    EXPECT_THROW(set_visibility(s, 99, false), UnknownLayerError);
}

TEST(Layers, RecordChangesetAppliesEveryHunk)
{
    auto s = make_stack("the quick brown fox");
    add_layer(s, "Top");
    const std::string target = "a quick red fox!";
    record_changeset(s, diff(text_of(s), target));
    EXPECT_EQ(text_of(s), target);
}

TEST(Layers, ComposeMatchesNaiveOracle)
{
    std::mt19937_64 rng(42);
    for (int seed = 0; seed < 200; ++seed) {
        const auto s = gen::random_stack(rng);
        EXPECT_EQ(compose(s).cells, oracle::compose(s)) << "seed " << seed;
    }
}

TEST(Layers, ChangesetRecordingReachesTarget)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        auto s = gen::random_stack(rng, {4, 20, 200, false});
        s.active = rng() % s.layers.size();
        s.active_layer().visible = true;
        // Only text visible below or on the active layer may change.
        const auto below_ok = [&] {
            for (std::size_t k = s.active + 1; k < s.layers.size(); ++k) {
                if (s.layers[k].visible && !s.layers[k].edits.empty()) return false;
            }
            return true;
        }();
        if (!below_ok) continue;
        const std::string before = text_of(s);
        const std::string after = oracle::random_text(rng, rng() % 60);
        record_changeset(s, diff(before, after));
        EXPECT_EQ(text_of(s), after);
    }
}
