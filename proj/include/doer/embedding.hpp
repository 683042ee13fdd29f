#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "doer/tensor.hpp"

namespace doer {

/// Frozen word-vector table. Out-of-vocabulary words get a vector drawn
/// uniformly from +-0.25/sqrt(dim), seeded by the table seed and the word
/// itself, then cached; the draw never depends on lookup order.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::uint64_t oov_seed);

  EmbeddingTable(const EmbeddingTable& other);
  EmbeddingTable& operator=(const EmbeddingTable& other);
  EmbeddingTable(EmbeddingTable&&) noexcept;
  EmbeddingTable& operator=(EmbeddingTable&&) noexcept;
  ~EmbeddingTable();

  /// Vectors uniform in [-scale, scale] for every word in `words`.
  static EmbeddingTable random(std::span<const std::string> words, std::size_t dim, std::uint64_t seed,
                               double scale = 1.0);

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return words_.size(); }
  std::uint64_t oov_seed() const { return oov_seed_; }
  const std::vector<std::string>& words() const { return words_; }

  /// Appends a word; a repeated word keeps its first vector.
  bool add(const std::string& word, std::span<const double> vec);

  /// Exact-case lookup, then lowercase fallback.
  std::optional<std::size_t> index_of(const std::string& word) const;
  std::span<const double> row(std::size_t index) const;

  /// Writes the word's vector (in-vocabulary or cached OOV) into `out`.
  void lookup(const std::string& word, std::span<double> out) const;
  std::size_t oov_cache_size() const;

  /// FNV-1a over dim and the vocabulary in index order.
  std::uint64_t vocab_hash() const;

 private:
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> matrix_;
  mutable std::mutex oov_mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> oov_cache_;
};

struct VectorLoadStats {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  bool had_header = false;
  std::vector<std::string> warnings;
};

/// Text format: "word v1 ... vd" per line, optionally preceded by a
/// "count dim" header. Rows with the wrong number of values or unparsable
/// numbers are skipped. `expected_dim` 0 infers the width from the first
/// row. A header whose dim disagrees with `expected_dim` is an error.
EmbeddingTable parse_vectors(std::istream& in, std::size_t expected_dim, std::uint64_t oov_seed,
                             VectorLoadStats* stats = nullptr);
EmbeddingTable load_vectors(const std::filesystem::path& path, std::size_t expected_dim, std::uint64_t oov_seed,
                            VectorLoadStats* stats = nullptr);

/// General-purpose table followed by the domain table.
struct DoubleEmbedding {
  EmbeddingTable general;
  EmbeddingTable domain;

  std::size_t dim() const { return general.dim() + domain.dim(); }
};

/// Row i is general(token_i) concatenated with domain(token_i).
Tensor embed_sentence(std::span<const std::string> tokens, const DoubleEmbedding& emb);

}  // namespace doer
