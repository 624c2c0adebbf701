#include "treetalk/training_export.hpp"

#include <json.hpp>

#include "treetalk/emotion_analysis.hpp"
#include "treetalk/error.hpp"
#include "treetalk/text_metrics.hpp"

namespace treetalk {

Conditioning parse_conditioning(std::string_view name) {
  if (name == "none") return Conditioning::kNone;
  if (name == "emotion") return Conditioning::kEmotion;
  if (name == "lookahead") return Conditioning::kLookahead;
  throw InvalidInputError("unknown conditioning '" + std::string(name) +
                          "' (expected none, emotion or lookahead)");
}

std::vector<TrainingExample> export_training_examples(const DialogTree& tree,
                                                      Conditioning conditioning, double gamma) {
  const std::string prompt = anonymize_text(tree.scenario.prompt_text, tree.scenario);
  std::vector<TrainingExample> out;
  for (const Path& path : enumerate_paths(tree)) {
    const DialogNode& node = path.last();
    TrainingExample ex;
    std::string prefix;
    switch (conditioning) {
      case Conditioning::kNone:
        break;
      case Conditioning::kEmotion: {
        const auto label = node.emotion_label();
        if (!label) throw InvalidInputError("node '" + node.id + "' has no emotion label");
        ex.conditioning = "emotion=" + std::string(to_string(*label));
        break;
      }
      case Conditioning::kLookahead: {
        if (node.children.empty()) continue;
        ex.conditioning = "lookahead=" + std::string(to_string(lookahead_label(node, gamma)));
        break;
      }
    }
    if (ex.conditioning) {
      const std::string label = ex.conditioning->substr(ex.conditioning->find('=') + 1);
      prefix = "[emotion=" + label + "] ";
    }

    ex.path_ids = path.ids();
    ex.text = prefix + prompt + "\n" + anonymize_speakers(path, tree.scenario);
    // Segments are whitespace separated, so tokens of the final utterance
    // are exactly the tail of the full token sequence.
    const std::size_t total = tokenize(ex.text).size();
    const std::size_t final_len = tokenize(anonymize_text(node.text, tree.scenario)).size();
    ex.loss_token_start = total - final_len;
    ex.loss_token_end = total;
    out.push_back(std::move(ex));
  }
  return out;
}

std::string training_example_to_json(const TrainingExample& ex) {
  nlohmann::ordered_json j;
  j["path_ids"] = ex.path_ids;
  j["text"] = ex.text;
  j["loss_token_start"] = ex.loss_token_start;
  j["loss_token_end"] = ex.loss_token_end;
  if (ex.conditioning) {
    j["conditioning"] = *ex.conditioning;
  } else {
    j["conditioning"] = nullptr;
  }
  return j.dump();
}

}  // namespace treetalk
