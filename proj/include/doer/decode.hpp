#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "doer/tags.hpp"

namespace doer {

/// Rewrites every I that does not follow B or I into B.
std::vector<AspectTag> repair_aspect_tags(std::span<const AspectTag> tags);

struct AssembleStats {
  // Spans whose polarity tags were all O and fell back to NT.
  std::size_t polarity_fallbacks = 0;
};

/// One pair per maximal B I* run. The span's polarity is the most frequent
/// of PO/NT/NG/CF among its tokens (O ignored); a count tie goes to the
/// tied label that appears first in the span; an all-O span becomes NT.
/// `aspect_tags` must already be valid BIO.
std::vector<AspectPair> assemble_pairs(std::span<const std::string> tokens, std::span<const AspectTag> aspect_tags,
                                       std::span<const PolarityTag> polarity_tags, AssembleStats* stats = nullptr);

struct EvalCounts {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  EvalCounts pairs;  // span and polarity must both match
  EvalCounts spans;  // span only
};

/// Micro-averaged exact-match scores. Throws std::invalid_argument when the
/// two lists cover a different number of sentences.
EvalReport pair_f1(std::span<const std::vector<AspectPair>> gold, std::span<const std::vector<AspectPair>> pred);

/// Prediction file: "start\tend\tterm\tpolarity" per pair, and every
/// sentence's block (possibly empty) terminated by one blank line.
void write_pairs(std::ostream& out, std::span<const std::vector<AspectPair>> pairs);
std::vector<std::vector<AspectPair>> read_pairs(std::istream& in);

std::string eval_report_json(const EvalReport& report);

}  // namespace doer
