#include "treetalk/retrieval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "tree_fixtures.hpp"
#include "treetalk/error.hpp"

using namespace treetalk;
using namespace treetalk::oracle;

namespace {

EmbeddingTable small_table() {
  return load_embeddings(
      "the 1 0 0\n"
      "cat 0 1 0\n"
      "dog 0 0 1\n"
      "sat 1 1 0\n"
      "[ 0.5 0.5 0.5\n"
      "speaker1 0 2 0\n");
}

IndexItem item(std::string id, std::vector<float> c, std::optional<Emotion> e) {
  return {std::move(id), std::move(c), "text of " + id, e};
}

}  // namespace

TEST(Embeddings, LoadAndRoundTrip) {
  const EmbeddingTable t = load_embeddings("a 1 2\nb 3 4.5\n\na 9 9\n");
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(*t.find("a"), (std::vector<float>{1, 2}));
  EXPECT_EQ(t.find("zzz"), nullptr);
  const EmbeddingTable back = load_embeddings(serialize_embeddings(t));
  EXPECT_EQ(back.words(), t.words());
  EXPECT_EQ(*back.find("b"), *t.find("b"));
}

TEST(Embeddings, ErrorsCarryLineNumber) {
  try {
    load_embeddings("a 1 2 3\nb 1 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  try {
    load_embeddings("a 1 2\nb 1 x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(EmbedContext, MeanOfKnownTokens) {
  const EmbeddingTable t = small_table();
  const std::vector<std::string> h{"The cat", "unknown words here"};
  EXPECT_EQ(embed_context(h, t), (std::vector<double>{0.5, 0.5, 0.0}));
  const std::vector<std::string> oov{"nothing known"};
  EXPECT_EQ(embed_context(oov, t), (std::vector<double>(3, 0.0)));
}

TEST(EmbedContextProperty, TokenOrderDoesNotMatter) {
  const EmbeddingTable t = small_table();
  std::mt19937_64 rng(37);
  std::vector<std::string> words{"the", "cat", "dog", "sat", "xyz", "[", "the"};
  for (int i = 0; i < 50; ++i) {
    std::shuffle(words.begin(), words.end(), rng);
    std::string joined;
    for (const auto& w : words) joined += w + " ";
    const std::vector<std::string> h{joined};
    const auto v = embed_context(h, t);
    EXPECT_NEAR(v[0], 3.5 / 6, 1e-12);
    EXPECT_NEAR(v[1], 2.5 / 6, 1e-12);
    EXPECT_NEAR(v[2], 1.5 / 6, 1e-12);
  }
}

TEST(Cosine, Examples) {
  const std::vector<double> a{1, 0}, b{1, 1}, z{0, 0}, c{1, 0, 0};
  EXPECT_NEAR(cosine(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(cosine(a, a), 1.0);
  EXPECT_EQ(cosine(a, z), 0.0);
  EXPECT_THROW(cosine(a, c), InvalidInputError);
}

TEST(ContextIndex, OneItemPerNodeWithMatchingCentroids) {
  const EmbeddingTable t = small_table();
  const DialogTree one = make_tree({make_node("a", 1, "the cat")});
  const std::vector<DialogTree> single{one};
  const ContextIndex idx1 = build_index(single, t);
  ASSERT_EQ(idx1.items.size(), 1u);
  EXPECT_EQ(idx1.items[0].item_id, "p0/a");
  const std::vector<std::string> prompt{anonymize_text(one.scenario.prompt_text, one.scenario)};
  const auto expect = embed_context(prompt, t);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_FLOAT_EQ(idx1.items[0].centroid[i], static_cast<float>(expect[i]));
  }

  const auto same = retrieve(idx1, t, prompt, MostLikely{});
  EXPECT_EQ(same.item_id, "p0/a");
  EXPECT_EQ(same.similarity, 1.0);

  std::mt19937_64 rng(41);
  const std::vector<DialogTree> trees{random_tree(rng, {}, "p1"), random_tree(rng, {}, "p2")};
  const ContextIndex idx = build_index(trees, t);
  EXPECT_EQ(idx.items.size(), node_count(trees[0]) + node_count(trees[1]));
  std::set<std::string> ids;
  for (const auto& it : idx.items) ids.insert(it.item_id);
  EXPECT_EQ(ids.size(), idx.items.size());
  for (const auto& p : enumerate_paths(trees[1])) {
    const auto h = context_history(trees[1], p, HistoryView::kAnonymized);
    const auto c = embed_context(h, t);
    const auto it = std::find_if(idx.items.begin(), idx.items.end(), [&](const IndexItem& x) {
      return x.item_id == "p2/" + p.last().id;
    });
    ASSERT_NE(it, idx.items.end());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_FLOAT_EQ(it->centroid[i], static_cast<float>(c[i]));
    EXPECT_EQ(it->response_emotion, p.last().emotion_label());
  }

  const ContextIndex back = index_from_json(index_to_json(idx));
  ASSERT_EQ(back.items.size(), idx.items.size());
  for (std::size_t i = 0; i < idx.items.size(); ++i) {
    EXPECT_EQ(back.items[i].item_id, idx.items[i].item_id);
    EXPECT_EQ(back.items[i].centroid, idx.items[i].centroid);
    EXPECT_EQ(back.items[i].response_emotion, idx.items[i].response_emotion);
  }
}

TEST(Retrieve, PlantedFixture) {
  ContextIndex idx{2,
                   {item("p/a", {1, 0}, Emotion::kAnger), item("p/b", {1, 1}, Emotion::kJoy),
                    item("p/c", {0, 1}, std::nullopt)}};
  const std::vector<float> q{1, 0};
  const auto best = retrieve(idx, q, MostLikely{});
  EXPECT_EQ(best.item_id, "p/a");
  EXPECT_EQ(best.similarity, 1.0);
  const auto joy = retrieve(idx, q, WithEmotion{Emotion::kJoy});
  EXPECT_EQ(joy.item_id, "p/b");
  EXPECT_NEAR(joy.similarity, 1.0 / std::sqrt(2.0), 1e-7);
  try {
    retrieve(idx, q, WithEmotion{Emotion::kFear});
    FAIL();
  } catch (const NotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("fear"), std::string::npos);
  }

  // fear replies mostly follow joy utterances, so T[->fear] = joy.
  std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions> counts{};
  counts[index_of(Emotion::kJoy)][index_of(Emotion::kFear)] = 4;
  const TransitionMatrix tm = transition_from_counts(counts, 1.0);
  EXPECT_EQ(retrieve(idx, q, WithTransition{Emotion::kFear, &tm}).item_id, "p/b");

  EXPECT_THROW(retrieve(ContextIndex{2, {}}, q, MostLikely{}), InvalidInputError);
}

TEST(Retrieve, TiesGoToSmallestId) {
  ContextIndex idx{2, {item("p/z", {1, 0}, Emotion::kJoy), item("p/b", {2, 0}, Emotion::kJoy)}};
  const std::vector<float> q{3, 0};
  EXPECT_EQ(retrieve(idx, q, MostLikely{}).item_id, "p/b");
}

TEST(RetrieveProperty, ConstrainedResultsCarryTheEmotion) {
  std::mt19937_64 rng(43);
  std::normal_distribution<float> gauss;
  ContextIndex idx{8, {}};
  for (int i = 0; i < 300; ++i) {
    std::vector<float> c(8);
    for (auto& x : c) x = gauss(rng);
    idx.items.push_back(item("p/" + std::to_string(i), std::move(c), kAllEmotions[rng() % 7]));
  }
  for (int q = 0; q < 200; ++q) {
    std::vector<float> query(8);
    for (auto& x : query) x = gauss(rng);
    const auto free = retrieve(idx, query, MostLikely{});
    for (Emotion e : kAllEmotions) {
      const auto r = retrieve(idx, query, WithEmotion{e});
      EXPECT_EQ(r.response_emotion, e);
      EXPECT_GE(free.similarity, r.similarity);
    }
    EXPECT_EQ(retrieve(idx, query, MostLikely{}).item_id, free.item_id);
  }
}
