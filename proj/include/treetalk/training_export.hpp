#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "treetalk/dialog_tree.hpp"

namespace treetalk {

enum class Conditioning { kNone, kEmotion, kLookahead };

// Throws InvalidInputError for anything but "none", "emotion", "lookahead".
Conditioning parse_conditioning(std::string_view name);

struct TrainingExample {
  std::vector<std::string> path_ids;
  // Optional "[emotion=<label>] " prefix, the anonymized prompt, then one
  // "[speakerN]: ..." line per utterance on the path.
  std::string text;
  // Half-open token range of tokenize(text) holding the final utterance;
  // the only loss-bearing tokens.
  std::size_t loss_token_start = 0;
  std::size_t loss_token_end = 0;
  // "emotion=<label>", "lookahead=<label>" or empty for no conditioning.
  std::optional<std::string> conditioning;
};

// One example per node (per non-leaf node under lookahead, where the label
// is lookahead_label(node, gamma)). Missing labels throw InvalidInputError
// naming the node.
std::vector<TrainingExample> export_training_examples(const DialogTree& tree,
                                                      Conditioning conditioning,
                                                      double gamma = 0.0);

// `{"path_ids", "text", "loss_token_start", "loss_token_end", "conditioning"}`
std::string training_example_to_json(const TrainingExample& ex);

}  // namespace treetalk
