#include "treetalk/training_export.hpp"

#include <gtest/gtest.h>

#include <random>

#include "tree_fixtures.hpp"
#include "treetalk/error.hpp"
#include "treetalk/text_metrics.hpp"

using namespace treetalk;
using namespace treetalk::oracle;

TEST(ExportTraining, SingleNodeNoConditioning) {
  const DialogTree t = make_tree({make_node("a", 1, "Hi Keith, ready?")});
  const auto ex = export_training_examples(t, Conditioning::kNone);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].text,
            "[speaker1] and [speaker2] talk about weekend plans.\n"
            "[speaker1]: Hi [speaker2], ready?");
  const TokenSequence toks = tokenize(ex[0].text);
  const TokenSequence loss(toks.begin() + static_cast<long>(ex[0].loss_token_start),
                           toks.begin() + static_cast<long>(ex[0].loss_token_end));
  EXPECT_EQ(loss, (TokenSequence{"hi", "[", "speaker2", "],", "ready", "?"}));
  EXPECT_FALSE(ex[0].conditioning.has_value());
  EXPECT_EQ(training_example_to_json(ex[0]).find("\"conditioning\":null") != std::string::npos,
            true);
}

TEST(ExportTraining, EmotionPrefix) {
  const DialogTree t = make_tree({make_node("a", 1, "yay", {}, Emotion::kJoy)});
  const auto ex = export_training_examples(t, Conditioning::kEmotion);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].text.rfind("[emotion=joy] ", 0), 0u);
  EXPECT_EQ(ex[0].conditioning, "emotion=joy");

  const DialogTree unlabeled = make_tree({make_node("z", 1, "yay")});
  try {
    export_training_examples(unlabeled, Conditioning::kEmotion);
    FAIL();
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
  }
}

TEST(ExportTraining, LookaheadUsesChildrenMean) {
  const DialogTree t = make_tree({make_node(
      "p", 1, "well",
      {make_node("c1", 2, "great", {}, Emotion::kJoy), make_node("c2", 2, "fun", {}, Emotion::kJoy),
       make_node("c3", 2, "sad", {}, Emotion::kSadness)},
      Emotion::kNeutral)});
  const auto ex = export_training_examples(t, Conditioning::kLookahead, 0.0);
  ASSERT_EQ(ex.size(), 1u);  // leaves are skipped
  EXPECT_EQ(ex[0].path_ids, std::vector<std::string>{"p"});
  EXPECT_EQ(ex[0].text.rfind("[emotion=joy] ", 0), 0u);
  EXPECT_EQ(ex[0].conditioning, "lookahead=joy");
}

TEST(ExportTrainingProperty, LossSpanCoversExactlyTheFinalUtterance) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const DialogTree t = random_tree(rng);
    for (Conditioning c : {Conditioning::kNone, Conditioning::kEmotion, Conditioning::kLookahead}) {
      const auto examples = export_training_examples(t, c, 0.0);
      const auto paths = enumerate_paths(t);
      if (c != Conditioning::kLookahead) EXPECT_EQ(examples.size(), paths.size());
      for (const auto& ex : examples) {
        const Path p = resolve_path(t, ex.path_ids);
        const TokenSequence toks = tokenize(ex.text);
        ASSERT_LE(ex.loss_token_end, toks.size());
        const TokenSequence span(toks.begin() + static_cast<long>(ex.loss_token_start),
                                 toks.begin() + static_cast<long>(ex.loss_token_end));
        EXPECT_EQ(span, tokenize(anonymize_text(p.last().text, t.scenario)));
        EXPECT_EQ(ex.loss_token_end, toks.size());
      }
    }
  }
}
