#include "treetalk/dialog_tree.hpp"

#include <functional>
#include <set>
#include <string>

#include <json.hpp>

#include "treetalk/error.hpp"
#include "treetalk/text_metrics.hpp"

namespace treetalk {

using nlohmann::json;

namespace {

constexpr const char* kScenarioId = "<scenario>";
constexpr const char* kRootId = "<root>";

class Reader {
 public:
  explicit Reader(const KeyMap& keys) : keys_(keys) {}

  const json* find(const json& obj, const std::string& key) const {
    if (auto it = obj.find(key); it != obj.end()) return &*it;
    if (auto alt = keys_.find(key); alt != keys_.end()) {
      for (const auto& name : alt->second) {
        if (auto it = obj.find(name); it != obj.end()) return &*it;
      }
    }
    return nullptr;
  }

  const json& require(const json& obj, const std::string& key, const std::string& owner) const {
    const json* v = find(obj, key);
    if (v == nullptr) throw ValidationError(owner, "missing field '" + key + "'");
    return *v;
  }

  std::string string_field(const json& obj, const std::string& key,
                           const std::string& owner) const {
    const json& v = require(obj, key, owner);
    if (!v.is_string()) throw ValidationError(owner, "field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  int int_field(const json& obj, const std::string& key, const std::string& owner) const {
    const json& v = require(obj, key, owner);
    if (!v.is_number_integer()) {
      throw ValidationError(owner, "field '" + key + "' must be an integer");
    }
    return v.get<int>();
  }

  DialogNode node(const json& obj, const std::string& parent) const {
    if (!obj.is_object()) throw ValidationError(parent, "child entries must be objects");
    DialogNode n;
    n.id = string_field(obj, "id", parent + "/?");
    n.speaker = int_field(obj, "speaker", n.id);
    n.text = string_field(obj, "text", n.id);
    if (const json* c = find(obj, "continued"); c != nullptr) {
      if (!c->is_boolean()) throw ValidationError(n.id, "field 'continued' must be a boolean");
      n.continued = c->get<bool>();
    }
    if (const json* e = find(obj, "emotion"); e != nullptr && !e->is_null()) {
      if (!e->is_string()) throw ValidationError(n.id, "field 'emotion' must be a string or null");
      try {
        n.emotion = EmotionDistribution::one_hot(parse_emotion(e->get<std::string>()));
      } catch (const InvalidInputError& err) {
        throw ValidationError(n.id, err.what());
      }
    }
    if (const json* kids = find(obj, "children"); kids != nullptr && !kids->is_null()) {
      if (!kids->is_array()) throw ValidationError(n.id, "field 'children' must be an array");
      n.children.reserve(kids->size());
      for (const json& k : *kids) n.children.push_back(node(k, n.id));
    }
    return n;
  }

 private:
  const KeyMap& keys_;
};

void check_children(const std::vector<DialogNode>& children, const std::string& owner,
                    const TreeParameters& p) {
  if (children.size() > static_cast<std::size_t>(p.branching)) {
    throw ValidationError(owner, "has " + std::to_string(children.size()) +
                                     " children, more than branching factor b=" +
                                     std::to_string(p.branching));
  }
  int continued = 0;
  for (const auto& c : children) continued += c.continued ? 1 : 0;
  if (continued > p.continuation) {
    throw ValidationError(owner, "has " + std::to_string(continued) +
                                     " continued children, more than continuation factor c=" +
                                     std::to_string(p.continuation));
  }
}

void validate_node(const DialogNode& n, int depth, const TreeParameters& p,
                   std::set<std::string>& seen) {
  if (n.id.empty()) throw ValidationError("", "node id must not be empty");
  if (!seen.insert(n.id).second) throw ValidationError(n.id, "duplicate node id");
  if (n.speaker != 1 && n.speaker != 2) throw ValidationError(n.id, "speaker must be 1 or 2");
  if (depth > p.max_depth) {
    throw ValidationError(n.id, "depth " + std::to_string(depth) + " exceeds max depth d=" +
                                    std::to_string(p.max_depth));
  }
  if (!n.children.empty() && !n.continued) {
    throw ValidationError(n.id, "has children but continued is false");
  }
  check_children(n.children, n.id, p);
  for (const auto& c : n.children) {
    if (c.speaker == n.speaker) {
      throw ValidationError(c.id, "speaker must alternate with parent '" + n.id + "'");
    }
    validate_node(c, depth + 1, p, seen);
  }
}

nlohmann::ordered_json node_to_json(const DialogNode& n) {
  nlohmann::ordered_json out;
  out["id"] = n.id;
  out["speaker"] = n.speaker;
  out["text"] = n.text;
  out["continued"] = n.continued;
  if (n.emotion) {
    out["emotion"] = std::string(to_string(n.emotion->argmax()));
  } else {
    out["emotion"] = nullptr;
  }
  out["children"] = nlohmann::ordered_json::array();
  for (const auto& c : n.children) out["children"].push_back(node_to_json(c));
  return out;
}

void collect_stats(const DialogNode& n, std::size_t depth, DatasetStats& s) {
  if (s.per_depth_counts.size() < depth) s.per_depth_counts.resize(depth, 0);
  ++s.per_depth_counts[depth - 1];
  ++s.total_sentences;
  s.total_tokens += tokenize(n.text).size();
  s.observed_max_depth = std::max<std::uint64_t>(s.observed_max_depth, depth);
  s.observed_max_branching = std::max<std::uint64_t>(s.observed_max_branching, n.children.size());
  for (const auto& c : n.children) collect_stats(c, depth + 1, s);
}

void finish_averages(DatasetStats& s) {
  s.avg_sentences_per_prompt = round_ratio_half_even(s.total_sentences, s.total_prompts);
  s.avg_sentence_length_tokens = round_ratio_half_even(s.total_tokens, s.total_sentences);
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c == '_' || c >= 0x80;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    auto a = static_cast<unsigned char>(text[pos + i]);
    auto b = static_cast<unsigned char>(word[i]);
    if (a >= 'A' && a <= 'Z') a = static_cast<unsigned char>(a - 'A' + 'a');
    if (b >= 'A' && b <= 'Z') b = static_cast<unsigned char>(b - 'A' + 'a');
    if (a != b) return false;
  }
  return true;
}

}  // namespace

KeyMap parse_key_map(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("key map: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw InvalidInputError("key map must be a JSON object");
  KeyMap out;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_string()) {
      out[key].push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& v : value) {
        if (!v.is_string()) throw InvalidInputError("key map entries must be strings");
        out[key].push_back(v.get<std::string>());
      }
    } else {
      throw InvalidInputError("key map value for '" + key + "' must be a string or array");
    }
  }
  return out;
}

DialogTree parse_tree(std::string_view document, const KeyMap& keys) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("tree file: malformed JSON at byte ") +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object()) throw ValidationError(kScenarioId, "tree document must be an object");

  const Reader rd(keys);
  DialogTree tree;
  tree.scenario.prompt_id = rd.string_field(doc, "prompt_id", kScenarioId);
  tree.scenario.prompt_text = rd.string_field(doc, "prompt_text", kScenarioId);

  const json& chars = rd.require(doc, "characters", kScenarioId);
  if (!chars.is_array() || chars.size() != 2) {
    throw ValidationError(kScenarioId, "'characters' must list exactly two characters");
  }
  Character* slots[2] = {&tree.scenario.character_1, &tree.scenario.character_2};
  for (std::size_t i = 0; i < 2; ++i) {
    if (!chars[i].is_object()) throw ValidationError(kScenarioId, "characters must be objects");
    slots[i]->name = rd.string_field(chars[i], "name", kScenarioId);
    if (rd.find(chars[i], "pronoun") != nullptr) {
      slots[i]->pronoun = rd.string_field(chars[i], "pronoun", kScenarioId);
    }
  }

  if (const json* p = rd.find(doc, "parameters"); p != nullptr && !p->is_null()) {
    if (!p->is_object()) throw ValidationError(kScenarioId, "'parameters' must be an object");
    if (rd.find(*p, "b")) tree.parameters.branching = rd.int_field(*p, "b", kScenarioId);
    if (rd.find(*p, "c")) tree.parameters.continuation = rd.int_field(*p, "c", kScenarioId);
    if (rd.find(*p, "d")) tree.parameters.max_depth = rd.int_field(*p, "d", kScenarioId);
  }

  const json& turns = rd.require(doc, "turns", kScenarioId);
  if (!turns.is_array()) throw ValidationError(kScenarioId, "'turns' must be an array");
  tree.turns.reserve(turns.size());
  for (const json& t : turns) tree.turns.push_back(rd.node(t, kRootId));

  validate_tree(tree);
  return tree;
}

void validate_tree(const DialogTree& tree) {
  const Scenario& s = tree.scenario;
  if (s.prompt_text.empty()) throw ValidationError(kScenarioId, "prompt_text must not be empty");
  if (s.character_1.name.empty() || s.character_2.name.empty()) {
    throw ValidationError(kScenarioId, "character names must not be empty");
  }
  if (s.character_1.name == s.character_2.name) {
    throw ValidationError(kScenarioId, "character names must be distinct");
  }
  const TreeParameters& p = tree.parameters;
  if (p.branching < 1 || p.continuation < 0 || p.continuation > p.branching ||
      p.max_depth < 1) {
    throw ValidationError(kScenarioId, "parameters need b >= 1, 0 <= c <= b and d >= 1");
  }
  check_children(tree.turns, kRootId, p);
  std::set<std::string> seen;
  for (const auto& t : tree.turns) {
    if (t.speaker != tree.turns.front().speaker) {
      throw ValidationError(t.id, "depth-1 responses must share one starting speaker");
    }
    validate_node(t, 1, p, seen);
  }
}

std::string serialize_tree(const DialogTree& tree) {
  nlohmann::ordered_json out;
  out["prompt_id"] = tree.scenario.prompt_id;
  out["prompt_text"] = tree.scenario.prompt_text;
  out["characters"] = nlohmann::ordered_json::array();
  for (const Character* c : {&tree.scenario.character_1, &tree.scenario.character_2}) {
    nlohmann::ordered_json cj;
    cj["name"] = c->name;
    cj["pronoun"] = c->pronoun;
    out["characters"].push_back(cj);
  }
  out["parameters"] = {{"b", tree.parameters.branching},
                       {"c", tree.parameters.continuation},
                       {"d", tree.parameters.max_depth}};
  out["turns"] = nlohmann::ordered_json::array();
  for (const auto& t : tree.turns) out["turns"].push_back(node_to_json(t));
  return out.dump() + "\n";
}

std::size_t node_count(const DialogTree& tree) {
  std::function<std::size_t(const DialogNode&)> count = [&](const DialogNode& n) {
    std::size_t k = 1;
    for (const auto& c : n.children) k += count(c);
    return k;
  };
  std::size_t total = 0;
  for (const auto& t : tree.turns) total += count(t);
  return total;
}

std::vector<std::string> Path::ids() const {
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (const DialogNode* n : nodes) out.push_back(n->id);
  return out;
}

std::vector<Path> enumerate_paths(const DialogTree& tree) {
  std::vector<Path> out;
  Path current;
  std::function<void(const DialogNode&)> visit = [&](const DialogNode& n) {
    current.nodes.push_back(&n);
    out.push_back(current);
    for (const auto& c : n.children) visit(c);
    current.nodes.pop_back();
  };
  for (const auto& t : tree.turns) visit(t);
  return out;
}

Path resolve_path(const DialogTree& tree, std::span<const std::string> path_ids) {
  Path path;
  const std::vector<DialogNode>* level = &tree.turns;
  for (const std::string& id : path_ids) {
    const DialogNode* next = nullptr;
    for (const auto& n : *level) {
      if (n.id == id) {
        next = &n;
        break;
      }
    }
    if (next == nullptr) {
      const std::string parent = path.nodes.empty() ? kRootId : path.last().id;
      throw NotFoundError("node '" + id + "' is not a child of '" + parent + "' in prompt '" +
                          tree.scenario.prompt_id + "'");
    }
    path.nodes.push_back(next);
    level = &next->children;
  }
  return path;
}

std::vector<std::string> references_for_context(const DialogTree& tree,
                                                std::span<const std::string> path_ids) {
  const Path path = resolve_path(tree, path_ids);
  const std::vector<DialogNode>* children = &tree.turns;
  if (!path.nodes.empty()) {
    const DialogNode& n = path.last();
    if (!n.continued || n.children.empty()) {
      throw InvalidInputError("node '" + n.id + "' has no responses to use as references");
    }
    children = &n.children;
  } else if (tree.turns.empty()) {
    throw InvalidInputError("prompt '" + tree.scenario.prompt_id + "' has no responses");
  }
  std::vector<std::string> out;
  out.reserve(children->size());
  for (const auto& c : *children) out.push_back(c.text);
  return out;
}

std::string anonymize_text(std::string_view text, const Scenario& scenario) {
  // Longer name first so "Anna" wins over "Ann" at the same position.
  std::pair<std::string_view, std::string_view> names[2] = {
      {scenario.character_1.name, "[speaker1]"}, {scenario.character_2.name, "[speaker2]"}};
  if (names[1].first.size() > names[0].first.size()) std::swap(names[0], names[1]);

  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary_before = i == 0 || !is_word_byte(static_cast<unsigned char>(text[i - 1]));
    bool replaced = false;
    if (boundary_before) {
      for (const auto& [name, token] : names) {
        if (name.empty() || !iequals_at(text, i, name)) continue;
        const std::size_t end = i + name.size();
        if (end < text.size() && is_word_byte(static_cast<unsigned char>(text[end]))) continue;
        out += token;
        i = end;
        replaced = true;
        break;
      }
    }
    if (!replaced) out += text[i++];
  }
  return out;
}

std::string anonymize_speakers(const Path& path, const Scenario& scenario) {
  std::string out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const DialogNode& n = *path.nodes[i];
    if (i > 0) out += '\n';
    out += "[speaker" + std::to_string(n.speaker) + "]: ";
    out += anonymize_text(n.text, scenario);
  }
  return out;
}

double round_ratio_half_even(std::uint64_t p, std::uint64_t q) {
  if (q == 0) return 0.0;
  const unsigned __int128 scaled = static_cast<unsigned __int128>(p) * 10;
  auto tenths = static_cast<std::uint64_t>(scaled / q);
  const auto rem = static_cast<std::uint64_t>(scaled % q);
  const unsigned __int128 twice = static_cast<unsigned __int128>(rem) * 2;
  if (twice > q || (twice == q && tenths % 2 == 1)) ++tenths;
  return static_cast<double>(tenths) / 10.0;
}

DatasetStats compute_stats(std::span<const DialogTree> trees) {
  if (trees.empty()) throw InvalidInputError("compute_stats needs at least one tree");
  DatasetStats s;
  for (const auto& tree : trees) {
    ++s.total_prompts;
    s.observed_max_branching =
        std::max<std::uint64_t>(s.observed_max_branching, tree.turns.size());
    for (const auto& t : tree.turns) collect_stats(t, 1, s);
  }
  finish_averages(s);
  return s;
}

DatasetStats merge_stats(const DatasetStats& a, const DatasetStats& b) {
  DatasetStats s;
  s.total_prompts = a.total_prompts + b.total_prompts;
  s.total_sentences = a.total_sentences + b.total_sentences;
  s.total_tokens = a.total_tokens + b.total_tokens;
  s.observed_max_branching = std::max(a.observed_max_branching, b.observed_max_branching);
  s.observed_max_depth = std::max(a.observed_max_depth, b.observed_max_depth);
  s.per_depth_counts.assign(std::max(a.per_depth_counts.size(), b.per_depth_counts.size()), 0);
  for (std::size_t i = 0; i < a.per_depth_counts.size(); ++i) {
    s.per_depth_counts[i] += a.per_depth_counts[i];
  }
  for (std::size_t i = 0; i < b.per_depth_counts.size(); ++i) {
    s.per_depth_counts[i] += b.per_depth_counts[i];
  }
  finish_averages(s);
  return s;
}

}  // namespace treetalk
