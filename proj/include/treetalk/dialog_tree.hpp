#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treetalk/emotion.hpp"

namespace treetalk {

struct Character {
  std::string name;
  std::string pronoun;

  bool operator==(const Character&) const = default;
};

struct Scenario {
  std::string prompt_id;
  std::string prompt_text;
  Character character_1;
  Character character_2;

  bool operator==(const Scenario&) const = default;
};

struct DialogNode {
  std::string id;
  int speaker = 1;  // 1 or 2
  std::string text;
  bool continued = false;
  // Label e(x); one-hot when read from a tree file, possibly a classifier
  // distribution when attached from a label file.
  std::optional<EmotionDistribution> emotion;
  std::vector<DialogNode> children;

  std::optional<Emotion> emotion_label() const {
    if (!emotion) return std::nullopt;
    return emotion->argmax();
  }

  bool operator==(const DialogNode&) const = default;
};

// b: branching factor, c: continuation factor, d: max depth.
struct TreeParameters {
  int branching = 10;
  int continuation = 3;
  int max_depth = 6;

  bool operator==(const TreeParameters&) const = default;
};

struct DialogTree {
  Scenario scenario;
  TreeParameters parameters;
  std::vector<DialogNode> turns;  // depth-1 responses to the prompt

  bool operator==(const DialogTree&) const = default;
};

// Canonical key -> accepted alternative spellings, for trees exported by
// other tools. Keys not listed are read under their canonical name only.
using KeyMap = std::map<std::string, std::vector<std::string>>;

// `{"id": ["node_id", "uid"], "children": ["replies"]}`.
KeyMap parse_key_map(std::string_view document);

// Parses and fully validates a tree file. Malformed JSON raises ParseError
// with the byte offset; structural problems raise ValidationError naming the
// node and the rule.
DialogTree parse_tree(std::string_view document, const KeyMap& keys = {});

// Checks every structural invariant; throws ValidationError.
void validate_tree(const DialogTree& tree);

// Canonical JSON (newline-terminated). Distribution labels are written as
// their argmax emotion.
std::string serialize_tree(const DialogTree& tree);

std::size_t node_count(const DialogTree& tree);

// Root-to-node node sequence; `nodes.back()` is the utterance the path leads to.
struct Path {
  std::vector<const DialogNode*> nodes;

  const DialogNode& last() const { return *nodes.back(); }
  std::vector<std::string> ids() const;
};

// One path per node, depth-first in child order.
std::vector<Path> enumerate_paths(const DialogTree& tree);

// Resolves a root-to-node id sequence. Empty `path_ids` addresses the root.
// Throws NotFoundError when an id is not a child of the previous node.
Path resolve_path(const DialogTree& tree, std::span<const std::string> path_ids);

// Texts of the addressed node's children (the root's turns for an empty
// prefix). Throws NotFoundError for an unknown id and InvalidInputError
// when the node was not continued or has no children.
std::vector<std::string> references_for_context(const DialogTree& tree,
                                                std::span<const std::string> path_ids);

// Replaces whole-word, case-insensitive occurrences of the character names
// with [speaker1] / [speaker2]. "Keith's" keeps its "'s".
std::string anonymize_text(std::string_view text, const Scenario& scenario);

// "[speakerN]: text" per utterance, newline separated, names anonymized.
std::string anonymize_speakers(const Path& path, const Scenario& scenario);

struct DatasetStats {
  std::uint64_t total_prompts = 0;
  std::uint64_t total_sentences = 0;
  std::uint64_t total_tokens = 0;
  double avg_sentences_per_prompt = 0.0;    // rounded half-even to 0.1
  double avg_sentence_length_tokens = 0.0;  // rounded half-even to 0.1
  std::uint64_t observed_max_branching = 0;
  std::uint64_t observed_max_depth = 0;
  std::vector<std::uint64_t> per_depth_counts;  // index 0 is depth 1

  bool operator==(const DatasetStats&) const = default;
};

// Sentence = one response node. Token counts use tokenize().
DatasetStats compute_stats(std::span<const DialogTree> trees);

// Combines the raw totals of two disjoint tree lists and recomputes averages.
DatasetStats merge_stats(const DatasetStats& a, const DatasetStats& b);

// p / q rounded half-to-even at one decimal place, computed exactly.
double round_ratio_half_even(std::uint64_t p, std::uint64_t q);

}  // namespace treetalk
