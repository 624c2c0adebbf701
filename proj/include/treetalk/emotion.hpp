#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace treetalk {

// Canonical order; used for vector indexing and for every tie-break.
enum class Emotion : std::uint8_t { kJoy, kSadness, kFear, kAnger, kSurprise, kDisgust, kNeutral };

inline constexpr std::size_t kNumEmotions = 7;

inline constexpr std::array<Emotion, kNumEmotions> kAllEmotions{
    Emotion::kJoy,      Emotion::kSadness, Emotion::kFear,   Emotion::kAnger,
    Emotion::kSurprise, Emotion::kDisgust, Emotion::kNeutral};

constexpr std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

std::string_view to_string(Emotion e);

// Throws InvalidInputError for names outside the closed set.
Emotion parse_emotion(std::string_view name);

// Non-negative finite 7-vector over emotions. Holds a label distribution
// e(x) (one-hot or classifier output) or an unnormalized subtree score.
class EmotionDistribution {
 public:
  EmotionDistribution() = default;

  static EmotionDistribution one_hot(Emotion e);
  // Validates entries (finite, >= 0) and that they sum to 1 within 1e-6.
  static EmotionDistribution from_probabilities(std::span<const double> values);

  double operator[](Emotion e) const { return values_[index_of(e)]; }
  double& operator[](Emotion e) { return values_[index_of(e)]; }
  const std::array<double, kNumEmotions>& values() const { return values_; }

  double sum() const;
  // First maximal entry in canonical order.
  Emotion argmax() const;

  EmotionDistribution& operator+=(const EmotionDistribution& other);
  EmotionDistribution& operator*=(double k);
  EmotionDistribution& operator/=(double k);

  bool operator==(const EmotionDistribution&) const = default;

 private:
  std::array<double, kNumEmotions> values_{};
};

}  // namespace treetalk
