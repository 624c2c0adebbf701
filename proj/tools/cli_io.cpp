#include "cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "treetalk/error.hpp"

namespace treetalk::cli {

namespace fs = std::filesystem;

namespace {

std::string get_string(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw InvalidInputError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> get_strings(const nlohmann::json& j, const char* key,
                                     const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw InvalidInputError(where + ": missing array field '" + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw InvalidInputError(where + ": '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

struct ReferenceSet {
  std::vector<std::string> history;
  std::vector<std::string> references;
};

const DialogTree& tree_for(const std::vector<DialogTree>& trees, const nlohmann::json& rec,
                           const std::string& where) {
  if (trees.empty()) {
    throw InvalidInputError(where + ": path_ids records need --trees");
  }
  if (!rec.contains("prompt_id")) {
    if (trees.size() == 1) return trees.front();
    throw InvalidInputError(where + ": prompt_id is required when several trees are loaded");
  }
  const std::string prompt_id = get_string(rec, "prompt_id", where);
  for (const auto& t : trees) {
    if (t.scenario.prompt_id == prompt_id) return t;
  }
  throw NotFoundError(where + ": no tree with prompt_id '" + prompt_id + "'");
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InvalidInputError("error while reading '" + path.string() + "'");
  return ss.str();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp.replace_filename("." + target.filename().string() + ".tmp." + std::to_string(getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InvalidInputError("error while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidInputError("cannot move output into place at '" + path + "'");
  }
}

void for_each_jsonl(const fs::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    if (!rec.is_object()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an object",
                       line_no);
    }
    try {
      fn(rec, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
}

std::vector<DialogTree> load_trees(const std::vector<std::string>& paths, const KeyMap& keys) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inside;
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          inside.push_back(entry.path());
        }
      }
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else {
      files.emplace_back(p);
    }
  }
  std::vector<DialogTree> trees;
  trees.reserve(files.size());
  for (const auto& f : files) {
    try {
      trees.push_back(parse_tree(read_file(f), keys));
    } catch (const ParseError& e) {
      throw ParseError(f.string() + ": " + e.what(), e.position());
    } catch (const ValidationError& e) {
      throw ValidationError(e.node_id(), e.rule() + " (in " + f.string() + ")");
    }
  }
  return trees;
}

KeyMap load_key_map(const std::string& path) {
  if (path.empty()) return {};
  return parse_key_map(read_file(path));
}

std::vector<DialogTree> with_labels(std::vector<DialogTree> trees, const std::string& labels_path) {
  if (labels_path.empty()) return trees;
  const EmotionLabels labels = EmotionLabels::parse_jsonl(read_file(labels_path));
  for (auto& t : trees) t = attach_labels(t, labels);
  return trees;
}

std::vector<EvalContext> load_contexts(const std::string& generations_path,
                                       const std::string& references_path,
                                       const std::vector<DialogTree>& trees) {
  std::map<std::string, ReferenceSet> refs;
  for_each_jsonl(references_path, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = references_path + ":" + std::to_string(line);
    const std::string id = get_string(rec, "context_id", where);
    ReferenceSet set;
    if (rec.contains("references")) {
      set.references = get_strings(rec, "references", where);
      if (rec.contains("history")) set.history = get_strings(rec, "history", where);
    } else {
      const DialogTree& tree = tree_for(trees, rec, where);
      const auto path_ids = get_strings(rec, "path_ids", where);
      set.references = references_for_context(tree, path_ids);
      set.history.push_back(tree.scenario.prompt_text);
      for (const DialogNode* n : resolve_path(tree, path_ids).nodes) set.history.push_back(n->text);
    }
    if (!refs.emplace(id, std::move(set)).second) {
      throw InvalidInputError(where + ": duplicate context_id '" + id + "'");
    }
  });

  std::vector<EvalContext> contexts;
  std::map<std::string, std::size_t> seen;
  for_each_jsonl(generations_path, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = generations_path + ":" + std::to_string(line);
    const std::string id = get_string(rec, "context_id", where);
    if (!seen.emplace(id, line).second) {
      throw InvalidInputError(where + ": duplicate context_id '" + id + "'");
    }
    const auto it = refs.find(id);
    if (it == refs.end()) {
      throw NotFoundError(where + ": context_id '" + id + "' has no reference set");
    }
    contexts.push_back({id, it->second.history, it->second.references,
                        get_strings(rec, "generations", where)});
  });
  if (contexts.empty()) throw InvalidInputError(generations_path + ": no generation records");
  return contexts;
}

std::vector<std::size_t> parse_counts(const std::string& list) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string::npos) end = list.size();
    const std::string_view item(list.data() + start, end - start);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw InvalidInputError("bad count '" + std::string(item) + "' in '" + list + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace treetalk::cli
