#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treetalk/text_metrics.hpp"

namespace treetalk {

// One evaluation item: a history, its gold reference set and the model's
// generations for the next utterance.
struct EvalContext {
  std::string context_id;
  std::vector<std::string> history;
  std::vector<std::string> references;
  std::vector<std::string> generations;
};

struct PairScore {
  std::size_t reference_index;
  std::size_t generation_index;
  double score;

  bool operator==(const PairScore&) const = default;
};

struct MatchReport {
  std::string context_id;
  std::string scorer_name;
  std::vector<PairScore> assignments;  // by reference index
  double total = 0.0;
  double mean_per_reference = 0.0;  // total / n_references
  std::size_t n_references = 0;
  std::size_t n_generations = 0;
  // Fewer generations than references; unmatched references count as 0.
  bool under_generated = false;
};

struct CorpusReport {
  std::string scorer_name;
  std::vector<MatchReport> per_context;  // input order
  double macro_mean = 0.0;               // mean of mean_per_reference
};

struct CurvePoint {
  std::size_t count;
  double macro_mean;
};

// Optimal injective matching of generations to references; edge weight is
// scorer(generation, reference).
MatchReport score_context(const EvalContext& ctx, const PairwiseScorer& scorer);

// Contexts are scored on up to `jobs` threads; the report keeps input order.
// Errors are rethrown with the offending context id.
CorpusReport score_corpus(std::span<const EvalContext> contexts, const PairwiseScorer& scorer,
                          unsigned jobs = 1);

// Seeded order in which a context's references are drawn. The subsample of
// size k is the first k entries, so subsamples are nested in k.
std::vector<std::size_t> reference_sample_order(std::uint64_t seed, const std::string& context_id,
                                                std::size_t n_references);

// Macro mean when each context keeps k sampled references, for each k.
std::vector<CurvePoint> sweep_references(std::span<const EvalContext> contexts,
                                         const PairwiseScorer& scorer,
                                         std::span<const std::size_t> ref_counts,
                                         std::uint64_t seed, unsigned jobs = 1);

// Macro mean when each context keeps its first k generations, for each k.
std::vector<CurvePoint> sweep_generations(std::span<const EvalContext> contexts,
                                          const PairwiseScorer& scorer,
                                          std::span<const std::size_t> gen_counts,
                                          unsigned jobs = 1);

// Metric values multiplied by `scale` (1 or 100); indices are untouched.
std::string corpus_report_to_json(const CorpusReport& report, double scale = 1.0);
// "count,macro_mean" header then one row per point.
std::string curve_to_csv(std::span<const CurvePoint> curve, double scale = 1.0);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace treetalk
