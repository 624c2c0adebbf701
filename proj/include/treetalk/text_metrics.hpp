#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace treetalk {

// Lowercased tokens; never contain whitespace.
using TokenSequence = std::vector<std::string>;

// Lowercases ASCII letters, splits on whitespace, and emits every maximal run
// of punctuation as its own token ("can't" -> "can", "'", "t"). UTF-8 aware
// for the common Unicode quote, dash and space characters.
TokenSequence tokenize(std::string_view text);

// Joins with single spaces. Inverse of tokenize only up to case and spacing.
std::string detokenize(const TokenSequence& tokens);

// Sentence BLEU over n-gram orders 1..min(4, |candidate|) with uniform
// weights, clipped precisions floored at kBleuEpsilon, and the standard
// brevity penalty. Empty candidate scores 0; empty reference throws.
inline constexpr double kBleuEpsilon = 1e-9;
double bleu4(const TokenSequence& candidate, const TokenSequence& reference);

// F1 of LCS precision and recall. Empty candidate scores 0; empty reference
// throws.
double rouge_l_f1(const TokenSequence& candidate, const TokenSequence& reference);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

double exact_match(const TokenSequence& candidate, const TokenSequence& reference);

struct PairwiseScorer {
  std::string name;
  std::function<double(const TokenSequence& candidate, const TokenSequence& reference)> score;
};

// "bleu4", "rougeL" or "exact". Throws InvalidInputError otherwise.
PairwiseScorer scorer_by_name(std::string_view name);
const std::vector<std::string>& scorer_names();

}  // namespace treetalk
