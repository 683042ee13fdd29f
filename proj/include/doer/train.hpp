#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "doer/corpus.hpp"
#include "doer/decode.hpp"
#include "doer/embedding.hpp"
#include "doer/model.hpp"

namespace doer {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  double lambda = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  std::size_t patience = 10;  // epochs without dev pair-F1 improvement; 0 disables
  double target_f1 = 0.0;     // stop once dev pair-F1 reaches this; 0 disables
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // summed over the epoch's batches
  std::size_t batches = 0;
  std::size_t clipped_batches = 0;
  bool has_dev = false;
  EvalReport dev;
  double seconds = 0.0;
};

struct TrainResult {
  DoerModel model;  // best dev epoch, or the last epoch without a dev set
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // 0 = the initialized model
};

/// Seeded mini-batch training with Adam and global-norm clipping. Throws
/// NumericError naming the epoch and batch if the loss turns non-finite.
TrainResult train(std::span<const Sentence> train_set, std::span<const Sentence> dev_set, const DoubleEmbedding& emb,
                  const Lexicon& lexicon, const ModelConfig& model_config, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Pair and span scores of the model's joint output on labeled sentences.
EvalReport evaluate(const DoerModel& model, const DoubleEmbedding& emb, std::span<const Sentence> sentences);

std::string epoch_record_json(const EpochRecord& r);

}  // namespace doer
