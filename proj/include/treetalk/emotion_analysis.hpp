#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treetalk/dialog_tree.hpp"
#include "treetalk/emotion.hpp"

namespace treetalk {

// Emotion labels produced by an external classifier, keyed by node id and
// optionally scoped to a prompt.
class EmotionLabels {
 public:
  void set(std::string node_id, EmotionDistribution d, std::string prompt_id = {});
  // Prompt-scoped entry first, then the unscoped one.
  const EmotionDistribution* find(std::string_view prompt_id, std::string_view node_id) const;
  std::size_t size() const { return labels_.size(); }

  // JSONL, one of `{"node_id": str, "emotion": str}` or
  // `{"node_id": str, "distribution": [7 reals]}`, optional "prompt_id".
  // Throws ParseError carrying the 1-based line number.
  static EmotionLabels parse_jsonl(std::string_view document);

 private:
  std::map<std::pair<std::string, std::string>, EmotionDistribution> labels_;
};

// Copy of `tree` with every labelled node's emotion replaced by the label
// file's entry. Nodes without an entry keep the tree file's own label.
DialogTree attach_labels(const DialogTree& tree, const EmotionLabels& labels);

// d(u) = 1/|c(u)| * sum over children v of [e(v) + gamma * d(v)], with
// d(leaf) = 0. Throws InvalidInputError for a leaf, gamma outside [0, 1] or
// an unlabelled descendant (naming it).
EmotionDistribution depth_weighted_estimate(const DialogNode& node, double gamma);
EmotionDistribution depth_weighted_estimate(std::span<const DialogNode> children, double gamma);

// argmax of d(u), ties in canonical order.
Emotion lookahead_label(const DialogNode& node, double gamma);

struct TransitionMatrix {
  // counts[from][to]: parent labelled `from` with a child labelled `to`.
  std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions> counts{};
  // probs[from][to] = P(to | from) after adding alpha to every cell.
  std::array<std::array<double, kNumEmotions>, kNumEmotions> probs{};
  double alpha = 1.0;
  // Row with no mass (only possible for alpha = 0); its probs are all zero.
  std::array<bool, kNumEmotions> undefined_row{};

  double operator()(Emotion from, Emotion to) const {
    return probs[index_of(from)][index_of(to)];
  }
};

// Parent/child pairs among response nodes; the prompt has no emotion so
// prompt -> depth-1 pairs are not counted.
TransitionMatrix build_transition_matrix(std::span<const DialogTree> trees, double alpha);
TransitionMatrix transition_from_counts(
    const std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions>& counts,
    double alpha);

enum class LeadsToMode {
  kConditional,  // argmax over sources of P(e | source)
  kJoint,        // argmax over sources of count(source -> e)
};

// T[->e]: the source emotion most likely to lead to `target`.
Emotion leads_to(const TransitionMatrix& t, Emotion target,
                 LeadsToMode mode = LeadsToMode::kConditional);

// JSON `{"order", "counts", "alpha", "probs", "undefined_rows"}`.
std::string transition_to_json(const TransitionMatrix& t);
TransitionMatrix transition_from_json(std::string_view document);

struct AccuracyReport {
  // Absent for emotions that never occur as a target.
  std::array<std::optional<double>, kNumEmotions> per_emotion{};
  std::array<std::uint64_t, kNumEmotions> target_counts{};
  std::array<std::uint64_t, kNumEmotions> correct_counts{};
  double average = 0.0;             // macro mean over present emotions
  double no_neutral_average = 0.0;  // same, excluding neutral
};

struct EmotionRecord {
  Emotion target;
  Emotion predicted;
};

AccuracyReport emotion_accuracy(std::span<const EmotionRecord> records);

struct LabeledUtterance {
  std::string id;
  std::string text;
  Emotion emotion;

  bool operator==(const LabeledUtterance&) const = default;
};

// Every class padded to the largest class size by seeded sampling with
// replacement. Output is grouped by canonical emotion order: originals in
// input order, then the padding. Throws InvalidInputError listing empty
// classes.
std::vector<LabeledUtterance> balanced_oversample(std::span<const LabeledUtterance> utterances,
                                                  std::uint64_t seed);

// Children of the context whose own replies include `target`, by descending
// fraction of replies labelled `target` (stable on ties). Throws
// InvalidInputError naming an unlabelled grandchild.
std::vector<std::string> oracle_select(std::span<const DialogNode> context_children,
                                       Emotion target);
std::vector<std::string> oracle_select(const DialogNode& context, Emotion target);

}  // namespace treetalk
