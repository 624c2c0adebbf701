#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "treetalk/dialog_tree.hpp"
#include "treetalk/emotion.hpp"
#include "treetalk/emotion_analysis.hpp"

namespace treetalk {

// Word vectors in GloVe text layout. Vectors are stored as float.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }

  // Returns false (and keeps the existing vector) for a duplicate word.
  bool add(std::string word, std::vector<float> vec);
  const std::vector<float>* find(std::string_view word) const;

  // Insertion order.
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

// "word f1 f2 ... fd" per line. Duplicate words keep their first vector.
// ParseError carries the 1-based line number.
EmbeddingTable load_embeddings(std::string_view document);
std::string serialize_embeddings(const EmbeddingTable& table);

// Mean vector of all in-vocabulary tokens over every history utterance;
// zero vector when nothing is in vocabulary.
std::vector<double> embed_context(std::span<const std::string> history,
                                  const EmbeddingTable& table);

// u.v / (|u||v|), accumulated in double; 0 when either norm is 0.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

struct IndexItem {
  std::string item_id;  // "<prompt_id>/<node_id>"
  std::vector<float> centroid;
  std::string response_text;
  std::optional<Emotion> response_emotion;
};

struct ContextIndex {
  std::size_t dim = 0;
  std::vector<IndexItem> items;
};

enum class HistoryView {
  kAnonymized,  // character names replaced by speaker tokens
  kRaw,
};

// Prompt plus the utterances before `path.last()`.
std::vector<std::string> context_history(const DialogTree& tree, const Path& path,
                                         HistoryView view);

// One item per response node: its history centroid, text and label.
ContextIndex build_index(std::span<const DialogTree> trees, const EmbeddingTable& table,
                         HistoryView view = HistoryView::kAnonymized);

std::string index_to_json(const ContextIndex& index);
ContextIndex index_from_json(std::string_view document);
inline constexpr int kIndexFormatVersion = 1;

struct MostLikely {};
struct WithEmotion {
  Emotion emotion;
};
struct WithTransition {
  Emotion emotion;  // desired reply emotion; retrieval uses leads_to(T, emotion)
  const TransitionMatrix* transition;
};
using RetrievalMode = std::variant<MostLikely, WithEmotion, WithTransition>;

struct RetrievalResult {
  std::string item_id;
  std::string response_text;
  std::optional<Emotion> response_emotion;
  double similarity;
};

// Highest cosine among eligible items, ties to the smallest item_id.
// Throws InvalidInputError for an empty index and NotFoundError when no
// item carries the required emotion.
RetrievalResult retrieve(const ContextIndex& index, std::span<const float> query,
                         const RetrievalMode& mode);
RetrievalResult retrieve(const ContextIndex& index, const EmbeddingTable& table,
                         std::span<const std::string> query_history, const RetrievalMode& mode);

}  // namespace treetalk
