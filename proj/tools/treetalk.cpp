#include <algorithm>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_io.hpp"
#include "treetalk/error.hpp"
#include "treetalk/retrieval.hpp"
#include "treetalk/text_metrics.hpp"
#include "treetalk/training_export.hpp"

namespace treetalk::cli {
namespace {

using ojson = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0: one per hardware thread
  int scale = 1;
  std::string key_map;
  std::string output;

  unsigned workers() const {
    return jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
  }
};

struct EvalArgs {
  std::string generations;
  std::string references;
  std::vector<std::string> trees;
  std::string scorer = "bleu4";
  std::string counts;
};

std::string dump(const ojson& j) { return j.dump(1) + "\n"; }

ojson emotion_vector(const EmotionDistribution& d) {
  ojson out = ojson::array();
  for (double v : d.values()) out.push_back(v);
  return out;
}

Emotion required_emotion(const nlohmann::json& rec, const std::string& where) {
  const auto it = rec.find("emotion");
  if (it == rec.end() || !it->is_string()) {
    throw InvalidInputError(where + ": missing string field 'emotion'");
  }
  return parse_emotion(it->get<std::string>());
}

std::string string_field(const nlohmann::json& rec, const char* key, const std::string& where) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw InvalidInputError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<EvalContext> eval_inputs(const Globals& g, const EvalArgs& a) {
  const auto trees = load_trees(a.trees, load_key_map(g.key_map));
  return load_contexts(a.generations, a.references, trees);
}

std::string cmd_score(const Globals& g, const EvalArgs& a) {
  const auto contexts = eval_inputs(g, a);
  const auto report = score_corpus(contexts, scorer_by_name(a.scorer), g.workers());
  return corpus_report_to_json(report, g.scale);
}

std::string cmd_sweep(const Globals& g, const EvalArgs& a, bool references) {
  const auto counts = parse_counts(a.counts);
  const auto contexts = eval_inputs(g, a);
  const auto scorer = scorer_by_name(a.scorer);
  const auto curve = references ? sweep_references(contexts, scorer, counts, g.seed, g.workers())
                                : sweep_generations(contexts, scorer, counts, g.workers());
  return curve_to_csv(curve, g.scale);
}

std::string cmd_stats(const Globals& g, const std::vector<std::string>& paths) {
  const auto trees = load_trees(paths, load_key_map(g.key_map));
  if (trees.empty()) throw InvalidInputError("no tree files found");
  const DatasetStats s = compute_stats(trees);
  ojson j;
  j["total_prompts"] = s.total_prompts;
  j["total_sentences"] = s.total_sentences;
  j["total_tokens"] = s.total_tokens;
  j["avg_sentences_per_prompt"] = s.avg_sentences_per_prompt;
  j["avg_sentence_length_tokens"] = s.avg_sentence_length_tokens;
  j["observed_max_branching"] = s.observed_max_branching;
  j["observed_max_depth"] = s.observed_max_depth;
  j["per_depth_counts"] = s.per_depth_counts;
  return dump(j);
}

std::string cmd_lookahead(const Globals& g, const std::vector<std::string>& paths,
                          const std::string& labels, double gamma) {
  const auto trees = with_labels(load_trees(paths, load_key_map(g.key_map)), labels);
  std::string out;
  for (const auto& t : trees) {
    for (const Path& p : enumerate_paths(t)) {
      const DialogNode& n = p.last();
      if (n.children.empty()) continue;
      const EmotionDistribution d = depth_weighted_estimate(n, gamma);
      ojson j;
      j["prompt_id"] = t.scenario.prompt_id;
      j["node_id"] = n.id;
      j["lookahead_emotion"] = to_string(d.argmax());
      j["d_vector"] = emotion_vector(d);
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string cmd_transition(const Globals& g, const std::vector<std::string>& paths,
                           const std::string& labels, double alpha, const std::string& target,
                           bool joint) {
  const auto trees = with_labels(load_trees(paths, load_key_map(g.key_map)), labels);
  const TransitionMatrix t = build_transition_matrix(trees, alpha);
  if (target.empty()) return transition_to_json(t);
  const Emotion e = parse_emotion(target);
  ojson j;
  j["target"] = to_string(e);
  j["mode"] = joint ? "joint" : "conditional";
  j["leads_to"] = to_string(leads_to(t, e, joint ? LeadsToMode::kJoint : LeadsToMode::kConditional));
  return dump(j);
}

std::map<std::string, Emotion> read_emotion_records(const std::string& path) {
  std::map<std::string, Emotion> out;
  for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = path + ":" + std::to_string(line);
    const std::string id = string_field(rec, "id", where);
    if (!out.emplace(id, required_emotion(rec, where)).second) {
      throw InvalidInputError(where + ": duplicate id '" + id + "'");
    }
  });
  return out;
}

std::string cmd_accuracy(const Globals& g, const std::string& targets_path,
                         const std::string& predictions_path) {
  const auto targets = read_emotion_records(targets_path);
  const auto predictions = read_emotion_records(predictions_path);
  std::vector<EmotionRecord> records;
  for (const auto& [id, target] : targets) {
    const auto it = predictions.find(id);
    if (it == predictions.end()) throw NotFoundError("no prediction for id '" + id + "'");
    records.push_back({target, it->second});
  }
  for (const auto& [id, _] : predictions) {
    if (!targets.contains(id)) throw NotFoundError("prediction for unknown id '" + id + "'");
  }
  const AccuracyReport r = emotion_accuracy(records);
  ojson per = ojson::object();
  ojson counts = ojson::object();
  for (Emotion e : kAllEmotions) {
    const auto& a = r.per_emotion[index_of(e)];
    per[std::string(to_string(e))] = a ? ojson(*a * g.scale) : ojson(nullptr);
    counts[std::string(to_string(e))] = {{"targets", r.target_counts[index_of(e)]},
                                         {"correct", r.correct_counts[index_of(e)]}};
  }
  ojson j;
  j["scale"] = g.scale;
  j["n_records"] = records.size();
  j["per_emotion"] = per;
  j["counts"] = counts;
  j["average"] = r.average * g.scale;
  j["no_neutral_average"] = r.no_neutral_average * g.scale;
  return dump(j);
}

struct RetrieveArgs {
  std::string index;
  std::vector<std::string> trees;
  std::string labels;
  std::string embeddings;
  std::string save_index;
  std::string queries;
  std::string mode = "most_likely";
  std::string emotion;
  std::string transition;
  bool raw_history = false;
};

std::string cmd_retrieve(const Globals& g, const RetrieveArgs& a) {
  const EmbeddingTable table = load_embeddings(read_file(a.embeddings));
  ContextIndex index;
  if (!a.index.empty()) {
    index = index_from_json(read_file(a.index));
    if (index.dim != table.dim()) {
      throw InvalidInputError("index dimension " + std::to_string(index.dim) +
                              " does not match the embeddings (" + std::to_string(table.dim()) +
                              ")");
    }
  } else {
    if (a.trees.empty()) throw InvalidInputError("retrieve needs --index or --trees");
    const auto trees = with_labels(load_trees(a.trees, load_key_map(g.key_map)), a.labels);
    index = build_index(trees, table, a.raw_history ? HistoryView::kRaw : HistoryView::kAnonymized);
    if (!a.save_index.empty()) emit(a.save_index, index_to_json(index));
  }

  TransitionMatrix transition;
  RetrievalMode mode = MostLikely{};
  if (a.mode != "most_likely") {
    if (a.emotion.empty()) throw InvalidInputError("--mode " + a.mode + " needs --emotion");
    const Emotion e = parse_emotion(a.emotion);
    if (a.mode == "with_emotion") {
      mode = WithEmotion{e};
    } else {
      if (a.transition.empty()) throw InvalidInputError("--mode with_transition needs --transition");
      transition = transition_from_json(read_file(a.transition));
      mode = WithTransition{e, &transition};
    }
  }

  std::string out;
  for_each_jsonl(a.queries, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = a.queries + ":" + std::to_string(line);
    const std::string id = string_field(rec, "query_id", where);
    const auto h = rec.find("history");
    if (h == rec.end() || !h->is_array()) {
      throw InvalidInputError(where + ": missing array field 'history'");
    }
    const auto history = h->get<std::vector<std::string>>();
    const RetrievalResult r = retrieve(index, table, history, mode);
    ojson j;
    j["query_id"] = id;
    j["item_id"] = r.item_id;
    j["response_text"] = r.response_text;
    j["response_emotion"] =
        r.response_emotion ? ojson(std::string(to_string(*r.response_emotion))) : ojson(nullptr);
    j["similarity"] = r.similarity;
    out += j.dump() + "\n";
  });
  return out;
}

std::string cmd_oversample(const Globals& g, const std::string& utterances_path,
                           const std::string& labels_path) {
  EmotionLabels labels;
  if (!labels_path.empty()) labels = EmotionLabels::parse_jsonl(read_file(labels_path));
  std::vector<LabeledUtterance> input;
  for_each_jsonl(utterances_path, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = utterances_path + ":" + std::to_string(line);
    LabeledUtterance u;
    u.id = string_field(rec, "id", where);
    u.text = string_field(rec, "text", where);
    if (rec.contains("emotion")) {
      u.emotion = required_emotion(rec, where);
    } else if (const EmotionDistribution* d = labels.find("", u.id)) {
      u.emotion = d->argmax();
    } else {
      throw InvalidInputError(where + ": utterance '" + u.id + "' has no emotion label");
    }
    input.push_back(std::move(u));
  });
  std::string out;
  for (const auto& u : balanced_oversample(input, g.seed)) {
    ojson j;
    j["id"] = u.id;
    j["text"] = u.text;
    j["emotion"] = to_string(u.emotion);
    out += j.dump() + "\n";
  }
  return out;
}

std::string cmd_export(const Globals& g, const std::vector<std::string>& paths,
                       const std::string& labels, const std::string& conditioning,
                       double gamma) {
  const Conditioning c = parse_conditioning(conditioning);
  const auto trees = with_labels(load_trees(paths, load_key_map(g.key_map)), labels);
  std::string out;
  for (const auto& t : trees) {
    for (const auto& ex : export_training_examples(t, c, gamma)) {
      ojson j;
      j["prompt_id"] = t.scenario.prompt_id;
      const ojson fields = ojson::parse(training_example_to_json(ex));
      for (const auto& [k, v] : fields.items()) j[k] = v;
      out += j.dump() + "\n";
    }
  }
  return out;
}

void add_eval_options(CLI::App* cmd, EvalArgs& a, bool with_counts) {
  cmd->add_option("--generations", a.generations,
                  "JSONL of {\"context_id\", \"generations\": [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--references", a.references,
                  "JSONL of {\"context_id\", \"references\": [...]} or "
                  "{\"context_id\", \"path_ids\": [...], \"prompt_id\"?}")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--trees", a.trees, "tree files or directories for path_ids references");
  cmd->add_option("--scorer", a.scorer, "pairwise metric")
      ->check(CLI::IsMember(scorer_names()))
      ->capture_default_str();
  if (with_counts) {
    cmd->add_option("--counts", a.counts, "comma-separated counts, e.g. 1,2,5,10")->required();
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Multi-reference matching evaluation and dialog-tree analytics.", "treetalk"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (0: one per hardware thread)")
      ->capture_default_str();
  app.add_option("--scale", g.scale, "multiply reported metric values (1 or 100)")
      ->check(CLI::IsMember({1, 100}))
      ->capture_default_str();
  app.add_option("--key-map", g.key_map, "JSON map of alternative tree keys")
      ->check(CLI::ExistingFile);
  app.add_option("--output", g.output, "output file (default: standard output)");

  EvalArgs score_args, refs_args, gens_args;
  auto* score = app.add_subcommand("score", "matching metric report for a generation corpus");
  add_eval_options(score, score_args, false);
  auto* sweep_refs = app.add_subcommand("sweep-refs", "macro mean versus sampled reference count");
  add_eval_options(sweep_refs, refs_args, true);
  auto* sweep_gens = app.add_subcommand("sweep-gens", "macro mean versus generation prefix length");
  add_eval_options(sweep_gens, gens_args, true);

  std::vector<std::string> stats_paths;
  auto* stats = app.add_subcommand("stats", "dataset statistics over tree files");
  stats->add_option("trees", stats_paths, "tree files or directories")->required();

  std::vector<std::string> look_paths;
  std::string look_labels;
  double gamma = 0.0;
  auto* look = app.add_subcommand("lookahead-label", "depth-weighted emotion estimate per node");
  look->add_option("trees", look_paths, "tree files or directories")->required();
  look->add_option("--labels", look_labels, "emotion label JSONL")->check(CLI::ExistingFile);
  look->add_option("--gamma", gamma, "discount for deeper replies")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  std::vector<std::string> trans_paths;
  std::string trans_labels, leads_to_target;
  double alpha = 1.0;
  bool joint = false;
  auto* trans = app.add_subcommand("transition", "emotion transition matrix");
  trans->add_option("trees", trans_paths, "tree files or directories")->required();
  trans->add_option("--labels", trans_labels, "emotion label JSONL")->check(CLI::ExistingFile);
  trans->add_option("--alpha", alpha, "Laplace smoothing")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  trans->add_option("--leads-to", leads_to_target, "print the emotion most likely to elicit this one");
  trans->add_flag("--joint", joint, "rank sources by joint count instead of P(target | source)");

  std::string targets_path, predictions_path;
  auto* acc = app.add_subcommand("accuracy", "per-emotion accuracy of classified outputs");
  acc->add_option("--targets", targets_path, "JSONL of {\"id\", \"emotion\"}")
      ->required()
      ->check(CLI::ExistingFile);
  acc->add_option("--predictions", predictions_path, "JSONL of {\"id\", \"emotion\"}")
      ->required()
      ->check(CLI::ExistingFile);

  RetrieveArgs ra;
  auto* ret = app.add_subcommand("retrieve", "nearest stored context by embedding cosine");
  ret->add_option("--embeddings", ra.embeddings, "word vectors, one \"word v1 ... vd\" per line")
      ->required()
      ->check(CLI::ExistingFile);
  auto* index_opt =
      ret->add_option("--index", ra.index, "saved index JSON")->check(CLI::ExistingFile);
  auto* trees_opt = ret->add_option("--trees", ra.trees, "build the index from these trees");
  index_opt->excludes(trees_opt);
  ret->add_option("--labels", ra.labels, "emotion label JSONL for --trees")
      ->check(CLI::ExistingFile);
  ret->add_option("--save-index", ra.save_index, "write the built index here");
  ret->add_option("--queries", ra.queries, "JSONL of {\"query_id\", \"history\": [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  ret->add_option("--mode", ra.mode, "most_likely, with_emotion or with_transition")
      ->check(CLI::IsMember({"most_likely", "with_emotion", "with_transition"}))
      ->capture_default_str();
  ret->add_option("--emotion", ra.emotion, "desired emotion for the constrained modes");
  ret->add_option("--transition", ra.transition, "transition matrix JSON for with_transition")
      ->check(CLI::ExistingFile);
  ret->add_flag("--raw-history", ra.raw_history, "embed contexts without anonymizing names");

  std::string utterances_path, over_labels;
  auto* over = app.add_subcommand("oversample", "balance utterances across emotions");
  over->add_option("--utterances", utterances_path, "JSONL of {\"id\", \"text\", \"emotion\"?}")
      ->required()
      ->check(CLI::ExistingFile);
  over->add_option("--labels", over_labels, "emotion label JSONL keyed by utterance id")
      ->check(CLI::ExistingFile);

  std::vector<std::string> export_paths;
  std::string export_labels, conditioning = "none";
  double export_gamma = 0.0;
  auto* exp = app.add_subcommand("export-training", "one training example per tree node");
  exp->add_option("trees", export_paths, "tree files or directories")->required();
  exp->add_option("--labels", export_labels, "emotion label JSONL")->check(CLI::ExistingFile);
  exp->add_option("--conditioning", conditioning, "none, emotion or lookahead")
      ->check(CLI::IsMember({"none", "emotion", "lookahead"}))
      ->capture_default_str();
  exp->add_option("--gamma", export_gamma, "discount for lookahead labels")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::string out;
    if (score->parsed()) {
      out = cmd_score(g, score_args);
    } else if (sweep_refs->parsed()) {
      out = cmd_sweep(g, refs_args, true);
    } else if (sweep_gens->parsed()) {
      out = cmd_sweep(g, gens_args, false);
    } else if (stats->parsed()) {
      out = cmd_stats(g, stats_paths);
    } else if (look->parsed()) {
      out = cmd_lookahead(g, look_paths, look_labels, gamma);
    } else if (trans->parsed()) {
      out = cmd_transition(g, trans_paths, trans_labels, alpha, leads_to_target, joint);
    } else if (acc->parsed()) {
      out = cmd_accuracy(g, targets_path, predictions_path);
    } else if (ret->parsed()) {
      out = cmd_retrieve(g, ra);
    } else if (over->parsed()) {
      out = cmd_oversample(g, utterances_path, over_labels);
    } else if (exp->parsed()) {
      out = cmd_export(g, export_paths, export_labels, conditioning, export_gamma);
    }
    emit(g.output, out);
  } catch (const Error& e) {
    std::cerr << "treetalk: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "treetalk: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace treetalk::cli

int main(int argc, char** argv) { return treetalk::cli::run(argc, argv); }
