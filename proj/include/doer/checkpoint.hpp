#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doer/model.hpp"

namespace doer {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Facts about the embeddings a model was trained with.
struct EmbeddingInfo {
  std::uint64_t general_hash = 0;
  std::uint64_t domain_hash = 0;
  std::uint64_t general_oov_seed = 0;
  std::uint64_t domain_oov_seed = 0;
};

EmbeddingInfo embedding_info(const DoubleEmbedding& emb);

struct Checkpoint {
  DoerModel model;
  EmbeddingInfo embeddings;
};

/// Layout (little-endian):
///   "DOERCKPT" | u32 version | u64 header length | JSON header
///   per tensor: u32 name length | name | u32 rank | u64 dims[rank] | f64 values
///   "DOEREND!"
/// The JSON header carries the model config, tag schemes, length norm,
/// embedding hashes and the tensor count.
void save_checkpoint(const DoerModel& model, const EmbeddingInfo& embeddings, const std::filesystem::path& path);

/// Rebuilds the model from the checkpoint's own configuration. When
/// `expected` is given, tensors whose shapes disagree with a model built
/// from it raise CheckpointError naming the tensor.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig* expected = nullptr);

/// Empty when compatible, otherwise one message per mismatched table.
std::vector<std::string> check_embeddings(const EmbeddingInfo& saved, const DoubleEmbedding& emb);

}  // namespace doer
