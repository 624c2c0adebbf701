#include "treetalk/emotion_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <json.hpp>

#include "treetalk/error.hpp"
#include "treetalk/random.hpp"

namespace treetalk {

using nlohmann::json;

namespace {

const EmotionDistribution& require_label(const DialogNode& n) {
  if (!n.emotion) throw InvalidInputError("node '" + n.id + "' has no emotion label");
  return *n.emotion;
}

void attach(DialogNode& n, const std::string& prompt_id, const EmotionLabels& labels) {
  if (const EmotionDistribution* d = labels.find(prompt_id, n.id)) n.emotion = *d;
  for (auto& c : n.children) attach(c, prompt_id, labels);
}

void count_pairs(const DialogNode& n, TransitionMatrix& t) {
  for (const auto& c : n.children) {
    const Emotion from = require_label(n).argmax();
    const Emotion to = require_label(c).argmax();
    ++t.counts[index_of(from)][index_of(to)];
    count_pairs(c, t);
  }
}

}  // namespace

void EmotionLabels::set(std::string node_id, EmotionDistribution d, std::string prompt_id) {
  labels_[{std::move(prompt_id), std::move(node_id)}] = d;
}

const EmotionDistribution* EmotionLabels::find(std::string_view prompt_id,
                                               std::string_view node_id) const {
  if (!prompt_id.empty()) {
    if (auto it = labels_.find({std::string(prompt_id), std::string(node_id)});
        it != labels_.end()) {
      return &it->second;
    }
  }
  if (auto it = labels_.find({std::string(), std::string(node_id)}); it != labels_.end()) {
    return &it->second;
  }
  return nullptr;
}

EmotionLabels EmotionLabels::parse_jsonl(std::string_view document) {
  EmotionLabels out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    const std::string_view line = document.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == document.size()) break;
      continue;
    }
    const std::string where = "labels line " + std::to_string(line_no) + ": ";
    try {
      const json rec = json::parse(line);
      if (!rec.is_object() || !rec.contains("node_id") || !rec["node_id"].is_string()) {
        throw ParseError(where + "expected an object with a string 'node_id'", line_no);
      }
      std::string prompt_id;
      if (rec.contains("prompt_id") && rec["prompt_id"].is_string()) {
        prompt_id = rec["prompt_id"].get<std::string>();
      }
      EmotionDistribution d;
      if (rec.contains("emotion") && rec["emotion"].is_string()) {
        d = EmotionDistribution::one_hot(parse_emotion(rec["emotion"].get<std::string>()));
      } else if (rec.contains("distribution") && rec["distribution"].is_array()) {
        d = EmotionDistribution::from_probabilities(
            rec["distribution"].get<std::vector<double>>());
      } else {
        throw ParseError(where + "needs 'emotion' or 'distribution'", line_no);
      }
      out.set(rec["node_id"].get<std::string>(), d, std::move(prompt_id));
    } catch (const json::exception& e) {
      throw ParseError(where + e.what(), line_no);
    } catch (const InvalidInputError& e) {
      throw ParseError(where + e.what(), line_no);
    }
    if (end == document.size()) break;
  }
  return out;
}

DialogTree attach_labels(const DialogTree& tree, const EmotionLabels& labels) {
  DialogTree out = tree;
  for (auto& t : out.turns) attach(t, out.scenario.prompt_id, labels);
  return out;
}

EmotionDistribution depth_weighted_estimate(std::span<const DialogNode> children, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidInputError("gamma must lie in [0, 1]");
  }
  if (children.empty()) {
    throw InvalidInputError("depth-weighted estimate needs at least one child");
  }
  EmotionDistribution total;
  for (const auto& child : children) {
    EmotionDistribution term = require_label(child);
    // Deeper labels are only needed when they carry weight.
    if (gamma > 0.0 && !child.children.empty()) {
      EmotionDistribution deeper = depth_weighted_estimate(child.children, gamma);
      deeper *= gamma;
      term += deeper;
    }
    total += term;
  }
  total /= static_cast<double>(children.size());
  return total;
}

EmotionDistribution depth_weighted_estimate(const DialogNode& node, double gamma) {
  if (node.children.empty()) {
    throw InvalidInputError("node '" + node.id + "' is a leaf; its estimate is undefined");
  }
  return depth_weighted_estimate(std::span<const DialogNode>(node.children), gamma);
}

Emotion lookahead_label(const DialogNode& node, double gamma) {
  return depth_weighted_estimate(node, gamma).argmax();
}

TransitionMatrix transition_from_counts(
    const std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions>& counts,
    double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("smoothing alpha must be a finite value >= 0");
  }
  TransitionMatrix t;
  t.counts = counts;
  t.alpha = alpha;
  for (std::size_t from = 0; from < kNumEmotions; ++from) {
    double row = 0.0;
    for (std::size_t to = 0; to < kNumEmotions; ++to) {
      row += static_cast<double>(counts[from][to]) + alpha;
    }
    if (row == 0.0) {
      t.undefined_row[from] = true;
      continue;
    }
    for (std::size_t to = 0; to < kNumEmotions; ++to) {
      t.probs[from][to] = (static_cast<double>(counts[from][to]) + alpha) / row;
    }
  }
  return t;
}

TransitionMatrix build_transition_matrix(std::span<const DialogTree> trees, double alpha) {
  TransitionMatrix raw;
  for (const auto& tree : trees) {
    for (const auto& turn : tree.turns) {
      require_label(turn);
      count_pairs(turn, raw);
    }
  }
  return transition_from_counts(raw.counts, alpha);
}

Emotion leads_to(const TransitionMatrix& t, Emotion target, LeadsToMode mode) {
  const std::size_t col = index_of(target);
  std::size_t best = 0;
  for (std::size_t from = 1; from < kNumEmotions; ++from) {
    const bool better = mode == LeadsToMode::kConditional
                            ? t.probs[from][col] > t.probs[best][col]
                            : t.counts[from][col] > t.counts[best][col];
    if (better) best = from;
  }
  return kAllEmotions[best];
}

std::string transition_to_json(const TransitionMatrix& t) {
  nlohmann::ordered_json out;
  out["order"] = json::array();
  for (Emotion e : kAllEmotions) out["order"].push_back(std::string(to_string(e)));
  out["counts"] = t.counts;
  out["alpha"] = t.alpha;
  out["probs"] = t.probs;
  out["undefined_rows"] = json::array();
  for (Emotion e : kAllEmotions) {
    if (t.undefined_row[index_of(e)]) out["undefined_rows"].push_back(std::string(to_string(e)));
  }
  return out.dump() + "\n";
}

TransitionMatrix transition_from_json(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("transition matrix: ") + e.what(), e.byte);
  }
  try {
    const auto order = doc.at("order").get<std::vector<std::string>>();
    const auto counts = doc.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    const double alpha = doc.at("alpha").get<double>();
    if (order.size() != kNumEmotions || counts.size() != kNumEmotions) {
      throw InvalidInputError("transition matrix must be 7x7");
    }
    std::array<std::size_t, kNumEmotions> slot{};
    for (std::size_t i = 0; i < kNumEmotions; ++i) slot[i] = index_of(parse_emotion(order[i]));
    std::array<std::array<std::uint64_t, kNumEmotions>, kNumEmotions> canonical{};
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
      if (counts[i].size() != kNumEmotions) throw InvalidInputError("transition matrix must be 7x7");
      for (std::size_t j = 0; j < kNumEmotions; ++j) canonical[slot[i]][slot[j]] = counts[i][j];
    }
    return transition_from_counts(canonical, alpha);
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("transition matrix: ") + e.what());
  }
}

AccuracyReport emotion_accuracy(std::span<const EmotionRecord> records) {
  if (records.empty()) throw InvalidInputError("emotion accuracy needs at least one record");
  AccuracyReport r;
  for (const auto& rec : records) {
    ++r.target_counts[index_of(rec.target)];
    if (rec.predicted == rec.target) ++r.correct_counts[index_of(rec.target)];
  }
  double sum = 0.0, sum_no_neutral = 0.0;
  int present = 0, present_no_neutral = 0;
  for (Emotion e : kAllEmotions) {
    const std::size_t i = index_of(e);
    if (r.target_counts[i] == 0) continue;
    const double acc =
        static_cast<double>(r.correct_counts[i]) / static_cast<double>(r.target_counts[i]);
    r.per_emotion[i] = acc;
    sum += acc;
    ++present;
    if (e != Emotion::kNeutral) {
      sum_no_neutral += acc;
      ++present_no_neutral;
    }
  }
  r.average = sum / present;
  r.no_neutral_average = present_no_neutral > 0 ? sum_no_neutral / present_no_neutral : 0.0;
  return r;
}

std::vector<LabeledUtterance> balanced_oversample(std::span<const LabeledUtterance> utterances,
                                                  std::uint64_t seed) {
  std::array<std::vector<const LabeledUtterance*>, kNumEmotions> classes;
  for (const auto& u : utterances) classes[index_of(u.emotion)].push_back(&u);

  std::string missing;
  std::size_t target = 0;
  for (Emotion e : kAllEmotions) {
    const auto& cls = classes[index_of(e)];
    if (cls.empty()) missing += (missing.empty() ? "" : ", ") + std::string(to_string(e));
    target = std::max(target, cls.size());
  }
  if (!missing.empty()) {
    throw InvalidInputError("cannot oversample; empty emotion classes: " + missing);
  }

  std::vector<LabeledUtterance> out;
  out.reserve(target * kNumEmotions);
  for (Emotion e : kAllEmotions) {
    const auto& cls = classes[index_of(e)];
    for (const auto* u : cls) out.push_back(*u);
    std::mt19937_64 rng(derive_seed(seed, {stable_hash(to_string(e))}));
    for (std::size_t k = cls.size(); k < target; ++k) {
      out.push_back(*cls[uniform_index(rng, cls.size())]);
    }
  }
  return out;
}

std::vector<std::string> oracle_select(std::span<const DialogNode> context_children,
                                       Emotion target) {
  struct Candidate {
    const DialogNode* node;
    double fraction;
  };
  std::vector<Candidate> picks;
  for (const auto& child : context_children) {
    if (child.children.empty()) continue;
    std::size_t hits = 0;
    for (const auto& reply : child.children) {
      if (require_label(reply).argmax() == target) ++hits;
    }
    if (hits == 0) continue;
    picks.push_back({&child, static_cast<double>(hits) / static_cast<double>(child.children.size())});
  }
  std::stable_sort(picks.begin(), picks.end(),
                   [](const Candidate& a, const Candidate& b) { return a.fraction > b.fraction; });
  std::vector<std::string> out;
  out.reserve(picks.size());
  for (const auto& p : picks) out.push_back(p.node->id);
  return out;
}

std::vector<std::string> oracle_select(const DialogNode& context, Emotion target) {
  if (!context.continued) {
    throw InvalidInputError("oracle context '" + context.id + "' was not continued");
  }
  return oracle_select(std::span<const DialogNode>(context.children), target);
}

}  // namespace treetalk
