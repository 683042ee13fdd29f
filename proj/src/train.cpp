#include "doer/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "doer/optim.hpp"

namespace doer {

EvalReport evaluate(const DoerModel& model, const DoubleEmbedding& emb, std::span<const Sentence> sentences) {
  std::vector<std::vector<AspectPair>> gold, pred;
  gold.reserve(sentences.size());
  pred.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    gold.push_back(extract_gold_pairs(s));
    pred.push_back(predict(model, s.tokens, embed_sentence(s.tokens, emb)).pairs);
  }
  return pair_f1(gold, pred);
}

TrainResult train(std::span<const Sentence> train_set, std::span<const Sentence> dev_set, const DoubleEmbedding& emb,
                  const Lexicon& lexicon, const ModelConfig& model_config, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (config.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (emb.dim() != model_config.input_dim()) {
    throw DimensionError("train: embeddings are " + std::to_string(emb.dim()) + " wide, model expects " +
                         std::to_string(model_config.input_dim()));
  }

  DoerModel model(model_config);
  model.initialize(config.seed);
  model.length_norm = compute_length_norm(train_set);

  const std::vector<Example> examples = prepare_examples(train_set, emb, lexicon, model.length_norm);
  const Rng root(config.seed);
  Rng shuffle_rng = root.split("shuffle");
  Rng dropout_rng = root.split("dropout");

  ParamRefs params = model.params();
  AdamState adam(params, AdamConfig{config.learning_rate});

  TrainResult result{model, {}, 0};
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(examples.size());
  std::vector<Example> batch;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);

      const std::string where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(rec.batches + 1);
      zero_grads(params);
      LossBreakdown loss;
      try {
        loss = joint_loss(batch, model, config.lambda, &dropout_rng, true);
      } catch (const NumericError& e) {
        throw NumericError(where + ": " + e.what());
      }
      if (!std::isfinite(loss.total())) throw NumericError("non-finite loss at " + where);
      if (clip_global_norm(params, config.clip_norm) < 1.0) ++rec.clipped_batches;
      adam.apply(params);
      rec.loss += loss;
      ++rec.batches;
    }

    if (!dev_set.empty()) {
      rec.has_dev = true;
      rec.dev = evaluate(model, emb, dev_set);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!rec.has_dev) {
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    const double f1 = rec.dev.pairs.f1();
    if (f1 > best_f1) {
      best_f1 = f1;
      since_best = 0;
      result.model = model;
      result.best_epoch = epoch;
    } else {
      ++since_best;
    }
    if (config.target_f1 > 0.0 && f1 >= config.target_f1) break;
    if (config.patience > 0 && since_best >= config.patience) break;
  }
  return result;
}

std::string epoch_record_json(const EpochRecord& r) {
  nlohmann::json j;
  j["epoch"] = r.epoch;
  j["batches"] = r.batches;
  j["clipped_batches"] = r.clipped_batches;
  j["loss"] = {{"total", r.loss.total()},       {"crf_aspect", r.loss.crf_a},  {"crf_polarity", r.loss.crf_p},
               {"length_aspect", r.loss.length_a}, {"length_polarity", r.loss.length_p},
               {"sentiment", r.loss.sentiment},   {"regularizer", r.loss.regularizer}};
  if (r.has_dev) {
    j["dev"] = {{"pair_precision", r.dev.pairs.precision()}, {"pair_recall", r.dev.pairs.recall()},
                {"pair_f1", r.dev.pairs.f1()},               {"ate_precision", r.dev.spans.precision()},
                {"ate_recall", r.dev.spans.recall()},        {"ate_f1", r.dev.spans.f1()}};
  }
  j["seconds"] = r.seconds;
  return j.dump();
}

}  // namespace doer
