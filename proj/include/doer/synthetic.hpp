#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "doer/corpus.hpp"
#include "doer/embedding.hpp"

namespace doer {

struct SyntheticCorpus {
  std::vector<Sentence> sentences;
  Lexicon lexicon;
  std::vector<std::string> vocabulary;  // every word the generator can emit
};

/// Review-like sentences with one or two aspect terms each (some two
/// tokens long). Each term is followed by an opinion word; lexicon-positive
/// words give PO, lexicon-negative words NG and the neutral words NT.
SyntheticCorpus make_synthetic_corpus(std::size_t sentences, std::uint64_t seed);

/// Two fixed sentences over a 12-word vocabulary, for gradient checks.
SyntheticCorpus toy_batch();

/// Random in-vocabulary tables for both halves of the double embedding.
DoubleEmbedding random_embedding(const std::vector<std::string>& vocabulary, std::size_t general_dim,
                                 std::size_t domain_dim, std::uint64_t seed);

}  // namespace doer
