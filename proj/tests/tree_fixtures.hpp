#pragma once
// Test-only tree builders.

#include <random>
#include <string>
#include <vector>

#include "treetalk/dialog_tree.hpp"

namespace treetalk::oracle {

inline DialogNode make_node(std::string id, int speaker, std::string text,
                            std::vector<DialogNode> children = {},
                            std::optional<Emotion> label = std::nullopt) {
  DialogNode n;
  n.id = std::move(id);
  n.speaker = speaker;
  n.text = std::move(text);
  n.continued = !children.empty();
  n.children = std::move(children);
  if (label) n.emotion = EmotionDistribution::one_hot(*label);
  return n;
}

inline DialogTree make_tree(std::vector<DialogNode> turns, std::string prompt_id = "p0") {
  DialogTree t;
  t.scenario.prompt_id = std::move(prompt_id);
  t.scenario.prompt_text = "Mildred and Keith talk about weekend plans.";
  t.scenario.character_1 = {"Mildred", "she"};
  t.scenario.character_2 = {"Keith", "he"};
  t.turns = std::move(turns);
  return t;
}

struct RandomTreeOptions {
  int branching = 10;
  int continuation = 3;
  int max_depth = 6;
  bool labeled = true;
  // Labels as random distributions instead of one-hots.
  bool soft_labels = false;
};

inline std::vector<DialogNode> random_level(std::mt19937_64& rng, const RandomTreeOptions& o,
                                            int depth, int speaker, const std::string& prefix,
                                            int& counter) {
  static const std::vector<std::string> words{"hey", "Keith", "mildred", "sure", "no",
                                              "maybe", "tonight", "!", "why", "great"};
  std::vector<DialogNode> out;
  const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(o.branching));
  const int cont = depth < o.max_depth
                       ? static_cast<int>(rng() % static_cast<unsigned>(o.continuation + 1))
                       : 0;
  for (int i = 0; i < n; ++i) {
    DialogNode node;
    node.id = prefix + std::to_string(counter++);
    node.speaker = speaker;
    const int len = 1 + static_cast<int>(rng() % 8);
    for (int w = 0; w < len; ++w) {
      if (w > 0) node.text += ' ';
      node.text += words[rng() % words.size()];
    }
    if (o.labeled) {
      if (o.soft_labels) {
        std::vector<double> p(kNumEmotions);
        double s = 0.0;
        for (double& x : p) s += (x = static_cast<double>(rng() % 1000) + 1.0);
        for (double& x : p) x /= s;
        node.emotion = EmotionDistribution::from_probabilities(p);
      } else {
        node.emotion = EmotionDistribution::one_hot(kAllEmotions[rng() % kNumEmotions]);
      }
    }
    if (i < cont) {
      node.continued = true;
      node.children = random_level(rng, o, depth + 1, 3 - speaker, prefix, counter);
    }
    out.push_back(std::move(node));
  }
  return out;
}

inline DialogTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& o = {},
                              std::string prompt_id = "p0") {
  int counter = 0;
  DialogTree t = make_tree(random_level(rng, o, 1, 1, "n", counter), std::move(prompt_id));
  t.parameters = {o.branching, o.continuation, o.max_depth};
  return t;
}

}  // namespace treetalk::oracle
