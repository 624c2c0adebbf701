#include "treetalk/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "treetalk/error.hpp"

namespace treetalk {

namespace {

enum class CharClass { kSpace, kPunct, kWord };

struct CodePoint {
  char32_t value;
  std::size_t length;  // bytes consumed
};

// Malformed sequences decode as a single byte so they stay in word tokens.
CodePoint decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1};
  }
  if (i + len > s.size()) return {b0, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      return CharClass::kSpace;
    }
    if ((c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
        (c >= '{' && c <= '~')) {
      return CharClass::kPunct;
    }
    return CharClass::kWord;
  }
  if (cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
      cp == 0x202F || cp == 0x205F || cp == 0x3000) {
    return CharClass::kSpace;
  }
  if (cp == 0x00A1 || cp == 0x00AB || cp == 0x00BB || cp == 0x00BF ||
      (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || cp == 0x3001 ||
      cp == 0x3002) {
    return CharClass::kPunct;
  }
  return CharClass::kWord;
}

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts count_ngrams(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void require_reference(const TokenSequence& reference, const char* metric) {
  if (reference.empty()) {
    throw InvalidInputError(std::string(metric) + ": reference must not be empty");
  }
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string current;
  CharClass current_class = CharClass::kSpace;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const CodePoint cp = decode_utf8(text, i);
    const CharClass cls = classify(cp.value);
    if (cls != current_class) flush();
    current_class = cls;
    if (cls != CharClass::kSpace) {
      if (cp.length == 1) {
        char c = text[i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        current += c;
      } else {
        current.append(text.substr(i, cp.length));
      }
    }
    i += cp.length;
  }
  flush();
  return out;
}

std::string detokenize(const TokenSequence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

double bleu4(const TokenSequence& candidate, const TokenSequence& reference) {
  require_reference(reference, "bleu4");
  if (candidate.empty()) return 0.0;

  const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    const NgramCounts ref = count_ngrams(reference, n);
    int matched = 0;
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    const double total = static_cast<double>(candidate.size() - n + 1);
    const double precision = matched > 0 ? matched / total : kBleuEpsilon;
    log_sum += std::log(precision);
  }
  const double geo_mean = std::exp(log_sum / static_cast<double>(max_order));

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(brevity * geo_mean, 0.0, 1.0);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(const TokenSequence& candidate, const TokenSequence& reference) {
  require_reference(reference, "rouge_l_f1");
  if (candidate.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(candidate.size());
  const double recall = lcs / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double exact_match(const TokenSequence& candidate, const TokenSequence& reference) {
  return candidate == reference ? 1.0 : 0.0;
}

const std::vector<std::string>& scorer_names() {
  static const std::vector<std::string> names{"bleu4", "rougeL", "exact"};
  return names;
}

PairwiseScorer scorer_by_name(std::string_view name) {
  if (name == "bleu4") return {"bleu4", bleu4};
  if (name == "rougeL") return {"rougeL", rouge_l_f1};
  if (name == "exact") return {"exact", exact_match};
  throw InvalidInputError("unknown scorer '" + std::string(name) +
                          "' (expected bleu4, rougeL or exact)");
}

}  // namespace treetalk
