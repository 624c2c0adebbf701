#include "treetalk/emotion.hpp"

#include <cmath>
#include <string>

#include "treetalk/error.hpp"

namespace treetalk {

namespace {
constexpr std::array<std::string_view, kNumEmotions> kNames{
    "joy", "sadness", "fear", "anger", "surprise", "disgust", "neutral"};
}

std::string_view to_string(Emotion e) { return kNames[index_of(e)]; }

Emotion parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    if (kNames[i] == name) return kAllEmotions[i];
  }
  throw InvalidInputError("unknown emotion '" + std::string(name) + "'");
}

EmotionDistribution EmotionDistribution::one_hot(Emotion e) {
  EmotionDistribution d;
  d[e] = 1.0;
  return d;
}

EmotionDistribution EmotionDistribution::from_probabilities(std::span<const double> values) {
  if (values.size() != kNumEmotions) {
    throw InvalidInputError("emotion distribution needs 7 entries, got " +
                            std::to_string(values.size()));
  }
  EmotionDistribution d;
  double total = 0.0;
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw InvalidInputError("emotion distribution entries must be finite and non-negative");
    }
    d.values_[i] = values[i];
    total += values[i];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw InvalidInputError("emotion distribution must sum to 1 (got " + std::to_string(total) +
                            ")");
  }
  return d;
}

double EmotionDistribution::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

Emotion EmotionDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumEmotions; ++i) {
    if (values_[i] > values_[best]) best = i;
  }
  return kAllEmotions[best];
}

EmotionDistribution& EmotionDistribution::operator+=(const EmotionDistribution& other) {
  for (std::size_t i = 0; i < kNumEmotions; ++i) values_[i] += other.values_[i];
  return *this;
}

EmotionDistribution& EmotionDistribution::operator*=(double k) {
  for (double& v : values_) v *= k;
  return *this;
}

EmotionDistribution& EmotionDistribution::operator/=(double k) {
  for (double& v : values_) v /= k;
  return *this;
}

}  // namespace treetalk
