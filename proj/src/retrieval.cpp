#include "treetalk/retrieval.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "treetalk/error.hpp"
#include "treetalk/text_metrics.hpp"

namespace treetalk {

namespace {

std::vector<float> to_float(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw InvalidInputError("cosine of vectors with lengths " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

}  // namespace

bool EmbeddingTable::add(std::string word, std::vector<float> vec) {
  if (vec.size() != dim_) {
    throw InvalidInputError("embedding for '" + word + "' has " + std::to_string(vec.size()) +
                            " values, table dimension is " + std::to_string(dim_));
  }
  if (vectors_.contains(word)) return false;
  words_.push_back(word);
  vectors_.emplace(std::move(word), std::move(vec));
  return true;
}

const std::vector<float>* EmbeddingTable::find(std::string_view word) const {
  const auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embeddings(std::string_view document) {
  EmbeddingTable table;
  bool have_dim = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const std::size_t s = line.find_first_not_of(" \t", pos);
      if (s == std::string_view::npos) break;
      std::size_t e = line.find_first_of(" \t", s);
      if (e == std::string_view::npos) e = line.size();
      fields.push_back(line.substr(s, e - s));
      pos = e;
    }
    const std::string where = "embeddings line " + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw ParseError(where + "expected a word and at least one value", line_no);

    std::vector<float> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      float x = 0.0f;
      const auto* first = fields[i].data();
      const auto* last = first + fields[i].size();
      const auto res = std::from_chars(first, last, x);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(x)) {
        throw ParseError(where + "non-numeric value '" + std::string(fields[i]) + "'", line_no);
      }
      vec.push_back(x);
    }
    if (!have_dim) {
      table = EmbeddingTable(vec.size());
      have_dim = true;
    } else if (vec.size() != table.dim()) {
      throw ParseError(where + "has " + std::to_string(vec.size()) + " values, expected " +
                           std::to_string(table.dim()),
                       line_no);
    }
    table.add(std::string(fields[0]), std::move(vec));
  }
  return table;
}

std::string serialize_embeddings(const EmbeddingTable& table) {
  std::string out;
  char buf[32];
  for (const auto& w : table.words()) {
    out += w;
    for (float x : *table.find(w)) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), x);
      out += ' ';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> embed_context(std::span<const std::string> history,
                                  const EmbeddingTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& utterance : history) {
    for (const auto& tok : tokenize(utterance)) {
      const auto* vec = table.find(tok);
      if (vec == nullptr) continue;
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*vec)[i];
      ++hits;
    }
  }
  if (hits > 0) {
    for (double& x : sum) x /= static_cast<double>(hits);
  }
  return sum;
}

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

std::vector<std::string> context_history(const DialogTree& tree, const Path& path,
                                         HistoryView view) {
  std::vector<std::string> out;
  auto render = [&](const std::string& text) {
    return view == HistoryView::kAnonymized ? anonymize_text(text, tree.scenario) : text;
  };
  out.push_back(render(tree.scenario.prompt_text));
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) out.push_back(render(path.nodes[i]->text));
  return out;
}

ContextIndex build_index(std::span<const DialogTree> trees, const EmbeddingTable& table,
                         HistoryView view) {
  ContextIndex index;
  index.dim = table.dim();
  std::set<std::string> seen;
  for (const auto& tree : trees) {
    for (const Path& path : enumerate_paths(tree)) {
      IndexItem item;
      item.item_id = tree.scenario.prompt_id + "/" + path.last().id;
      if (!seen.insert(item.item_id).second) {
        throw InvalidInputError("duplicate index item '" + item.item_id + "'");
      }
      item.centroid = to_float(embed_context(context_history(tree, path, view), table));
      item.response_text = path.last().text;
      item.response_emotion = path.last().emotion_label();
      index.items.push_back(std::move(item));
    }
  }
  return index;
}

std::string index_to_json(const ContextIndex& index) {
  nlohmann::ordered_json j;
  j["format_version"] = kIndexFormatVersion;
  j["dim"] = index.dim;
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : index.items) {
    nlohmann::ordered_json o;
    o["item_id"] = it.item_id;
    o["centroid"] = it.centroid;
    o["response_text"] = it.response_text;
    if (it.response_emotion) {
      o["response_emotion"] = std::string(to_string(*it.response_emotion));
    } else {
      o["response_emotion"] = nullptr;
    }
    j["items"].push_back(std::move(o));
  }
  return j.dump() + "\n";
}

ContextIndex index_from_json(std::string_view document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("index file: ") + e.what(), e.byte);
  }
  try {
    if (j.at("format_version").get<int>() != kIndexFormatVersion) {
      throw InvalidInputError("unsupported index format_version " +
                              j.at("format_version").dump());
    }
    ContextIndex index;
    index.dim = j.at("dim").get<std::size_t>();
    std::set<std::string> seen;
    for (const auto& o : j.at("items")) {
      IndexItem it;
      it.item_id = o.at("item_id").get<std::string>();
      it.centroid = o.at("centroid").get<std::vector<float>>();
      it.response_text = o.at("response_text").get<std::string>();
      if (!o.at("response_emotion").is_null()) {
        it.response_emotion = parse_emotion(o.at("response_emotion").get<std::string>());
      }
      if (it.centroid.size() != index.dim) {
        throw InvalidInputError("index item '" + it.item_id + "' has the wrong dimension");
      }
      if (!seen.insert(it.item_id).second) {
        throw InvalidInputError("duplicate index item '" + it.item_id + "'");
      }
      index.items.push_back(std::move(it));
    }
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("index file: ") + e.what());
  }
}

RetrievalResult retrieve(const ContextIndex& index, std::span<const float> query,
                         const RetrievalMode& mode) {
  if (index.items.empty()) throw InvalidInputError("retrieval index is empty");
  std::optional<Emotion> required;
  if (const auto* m = std::get_if<WithEmotion>(&mode)) {
    required = m->emotion;
  } else if (const auto* m = std::get_if<WithTransition>(&mode)) {
    if (m->transition == nullptr) throw InvalidInputError("transition mode needs a matrix");
    required = leads_to(*m->transition, m->emotion);
  }

  const IndexItem* best = nullptr;
  double best_sim = 0.0;
  for (const auto& item : index.items) {
    if (required && item.response_emotion != required) continue;
    const double sim = cosine(std::span<const float>(item.centroid), query);
    if (best == nullptr || sim > best_sim || (sim == best_sim && item.item_id < best->item_id)) {
      best = &item;
      best_sim = sim;
    }
  }
  if (best == nullptr) {
    throw NotFoundError("no indexed response carries emotion '" +
                        std::string(to_string(*required)) + "'");
  }
  return {best->item_id, best->response_text, best->response_emotion, best_sim};
}

RetrievalResult retrieve(const ContextIndex& index, const EmbeddingTable& table,
                         std::span<const std::string> query_history, const RetrievalMode& mode) {
  const std::vector<float> q = to_float(embed_context(query_history, table));
  return retrieve(index, q, mode);
}

}  // namespace treetalk
