#include "treetalk/matching_eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "treetalk/assignment.hpp"
#include "treetalk/error.hpp"
#include "treetalk/random.hpp"

namespace treetalk {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first failure in
// index order is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, jobs), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double macro_mean(const std::vector<MatchReport>& reports) {
  double sum = 0.0;
  for (const auto& r : reports) sum += r.mean_per_reference;
  return reports.empty() ? 0.0 : sum / static_cast<double>(reports.size());
}

void require_contexts(std::span<const EvalContext> contexts) {
  if (contexts.empty()) throw InvalidInputError("no evaluation contexts given");
}

}  // namespace

MatchReport score_context(const EvalContext& ctx, const PairwiseScorer& scorer) {
  if (ctx.references.empty()) {
    throw InvalidInputError("context '" + ctx.context_id + "' has no references");
  }
  if (ctx.generations.empty()) {
    throw InvalidInputError("context '" + ctx.context_id + "' has no generations");
  }
  std::vector<TokenSequence> refs, gens;
  refs.reserve(ctx.references.size());
  gens.reserve(ctx.generations.size());
  for (const auto& r : ctx.references) refs.push_back(tokenize(r));
  for (const auto& g : ctx.generations) gens.push_back(tokenize(g));

  std::vector<double> weights;
  weights.reserve(refs.size() * gens.size());
  try {
    for (const auto& r : refs) {
      for (const auto& g : gens) weights.push_back(scorer.score(g, r));
    }
  } catch (const InvalidInputError& e) {
    throw InvalidInputError("context '" + ctx.context_id + "': " + e.what());
  }
  const Matching m = solve_max_assignment(WeightMatrix(refs.size(), gens.size(), std::move(weights)));

  MatchReport report;
  report.context_id = ctx.context_id;
  report.scorer_name = scorer.name;
  report.n_references = refs.size();
  report.n_generations = gens.size();
  report.under_generated = gens.size() < refs.size();
  report.assignments.reserve(m.pairs.size());
  for (const auto& [r, g] : m.pairs) {
    report.assignments.push_back({r, g, scorer.score(gens[g], refs[r])});
  }
  report.total = m.total;
  report.mean_per_reference = m.total / static_cast<double>(refs.size());
  return report;
}

CorpusReport score_corpus(std::span<const EvalContext> contexts, const PairwiseScorer& scorer,
                          unsigned jobs) {
  require_contexts(contexts);
  CorpusReport report;
  report.scorer_name = scorer.name;
  report.per_context.resize(contexts.size());
  parallel_for(contexts.size(), jobs, [&](std::size_t i) {
    try {
      report.per_context[i] = score_context(contexts[i], scorer);
    } catch (const InvalidInputError& e) {
      const std::string msg = e.what();
      if (msg.rfind("context '", 0) == 0) throw;
      throw InvalidInputError("context '" + contexts[i].context_id + "': " + msg);
    }
  });
  report.macro_mean = macro_mean(report.per_context);
  return report;
}

std::vector<std::size_t> reference_sample_order(std::uint64_t seed, const std::string& context_id,
                                                std::size_t n_references) {
  std::vector<std::size_t> order(n_references);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {stable_hash(context_id)}));
  stable_shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<CurvePoint> sweep_references(std::span<const EvalContext> contexts,
                                         const PairwiseScorer& scorer,
                                         std::span<const std::size_t> ref_counts,
                                         std::uint64_t seed, unsigned jobs) {
  require_contexts(contexts);
  for (std::size_t k : ref_counts) {
    if (k == 0) throw InvalidInputError("reference counts must be >= 1");
    for (const auto& ctx : contexts) {
      if (k > ctx.references.size()) {
        throw InvalidInputError("reference count " + std::to_string(k) + " exceeds the " +
                                std::to_string(ctx.references.size()) +
                                " references of context '" + ctx.context_id + "'");
      }
    }
  }
  std::vector<std::vector<std::size_t>> orders;
  orders.reserve(contexts.size());
  for (const auto& ctx : contexts) {
    orders.push_back(reference_sample_order(seed, ctx.context_id, ctx.references.size()));
  }

  std::vector<CurvePoint> curve;
  for (std::size_t k : ref_counts) {
    std::vector<EvalContext> sub(contexts.begin(), contexts.end());
    for (std::size_t c = 0; c < sub.size(); ++c) {
      std::vector<std::size_t> keep(orders[c].begin(), orders[c].begin() + static_cast<long>(k));
      std::sort(keep.begin(), keep.end());
      std::vector<std::string> refs;
      refs.reserve(k);
      for (std::size_t i : keep) refs.push_back(contexts[c].references[i]);
      sub[c].references = std::move(refs);
    }
    curve.push_back({k, score_corpus(sub, scorer, jobs).macro_mean});
  }
  return curve;
}

std::vector<CurvePoint> sweep_generations(std::span<const EvalContext> contexts,
                                          const PairwiseScorer& scorer,
                                          std::span<const std::size_t> gen_counts,
                                          unsigned jobs) {
  require_contexts(contexts);
  for (std::size_t k : gen_counts) {
    if (k == 0) throw InvalidInputError("generation counts must be >= 1");
    for (const auto& ctx : contexts) {
      if (k > ctx.generations.size()) {
        throw InvalidInputError("generation count " + std::to_string(k) + " exceeds the " +
                                std::to_string(ctx.generations.size()) +
                                " generations of context '" + ctx.context_id + "'");
      }
    }
  }
  std::vector<CurvePoint> curve;
  for (std::size_t k : gen_counts) {
    std::vector<EvalContext> sub(contexts.begin(), contexts.end());
    for (auto& ctx : sub) ctx.generations.resize(k);
    curve.push_back({k, score_corpus(sub, scorer, jobs).macro_mean});
  }
  return curve;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string corpus_report_to_json(const CorpusReport& report, double scale) {
  nlohmann::ordered_json j;
  j["scorer"] = report.scorer_name;
  j["scale"] = scale;
  j["n_contexts"] = report.per_context.size();
  j["macro_mean"] = report.macro_mean * scale;
  j["contexts"] = nlohmann::ordered_json::array();
  for (const auto& r : report.per_context) {
    nlohmann::ordered_json c;
    c["context_id"] = r.context_id;
    c["n_references"] = r.n_references;
    c["n_generations"] = r.n_generations;
    c["under_generated"] = r.under_generated;
    c["total"] = r.total * scale;
    c["mean_per_reference"] = r.mean_per_reference * scale;
    c["assignments"] = nlohmann::ordered_json::array();
    for (const auto& a : r.assignments) {
      c["assignments"].push_back({{"reference_index", a.reference_index},
                                  {"generation_index", a.generation_index},
                                  {"score", a.score * scale}});
    }
    j["contexts"].push_back(std::move(c));
  }
  return j.dump(1) + "\n";
}

std::string curve_to_csv(std::span<const CurvePoint> curve, double scale) {
  std::string out = "count,macro_mean\n";
  for (const auto& p : curve) {
    out += std::to_string(p.count) + "," + format_double(p.macro_mean * scale) + "\n";
  }
  return out;
}

}  // namespace treetalk
