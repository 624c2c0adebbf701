#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "treetalk/dialog_tree.hpp"
#include "treetalk/emotion_analysis.hpp"
#include "treetalk/matching_eval.hpp"

namespace treetalk::cli {

// Whole file as bytes; InvalidInputError when it cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes `content` to `path` through a temporary file in the same directory
// and a rename, so a failed run never leaves a partial file. An empty path
// means standard output.
void emit(const std::string& path, const std::string& content);

// Calls fn(record, line_number) for every non-blank line. Malformed lines
// raise ParseError naming the file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

// Tree files; a directory contributes every *.json file inside it, sorted.
std::vector<DialogTree> load_trees(const std::vector<std::string>& paths, const KeyMap& keys);

KeyMap load_key_map(const std::string& path);

// Label file when given, otherwise the labels already in the trees.
std::vector<DialogTree> with_labels(std::vector<DialogTree> trees, const std::string& labels_path);

// Joins a generations file with either a references file or a path-id
// manifest resolved against `trees`. Contexts keep generation-file order;
// a generation record whose context_id has no reference set is a
// NotFoundError naming the id.
std::vector<EvalContext> load_contexts(const std::string& generations_path,
                                       const std::string& references_path,
                                       const std::vector<DialogTree>& trees);

std::vector<std::size_t> parse_counts(const std::string& list);

}  // namespace treetalk::cli
