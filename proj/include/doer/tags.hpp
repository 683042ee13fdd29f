#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace doer {

// O takes index 0 in both schemes, so an all-zero CRF decodes to "no aspect".
enum class AspectTag : std::uint8_t { O = 0, B = 1, I = 2 };
enum class PolarityTag : std::uint8_t { O = 0, PO = 1, NT = 2, NG = 3, CF = 4 };

inline constexpr std::size_t kNumAspectTags = 3;
inline constexpr std::size_t kNumPolarityTags = 5;

inline constexpr std::array<std::string_view, kNumAspectTags> kAspectTagNames{"O", "B", "I"};
inline constexpr std::array<std::string_view, kNumPolarityTags> kPolarityTagNames{"O", "PO", "NT", "NG",
                                                                                  "CF"};

std::string_view to_string(AspectTag t);
std::string_view to_string(PolarityTag t);
std::optional<AspectTag> parse_aspect_tag(std::string_view s);
std::optional<PolarityTag> parse_polarity_tag(std::string_view s);

inline std::size_t index_of(AspectTag t) { return static_cast<std::size_t>(t); }
inline std::size_t index_of(PolarityTag t) { return static_cast<std::size_t>(t); }

/// Word-level lexicon label used by the auxiliary sentiment head.
enum class SentimentLabel : std::uint8_t { kPositive = 0, kNegative = 1, kNone = 2 };
inline constexpr std::size_t kNumSentimentLabels = 3;

/// An extracted aspect term with its polarity. Span indices are inclusive
/// token positions.
struct AspectPair {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string term;
  PolarityTag polarity = PolarityTag::NT;

  bool operator==(const AspectPair&) const = default;
};

}  // namespace doer
