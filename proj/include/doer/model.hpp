#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doer/auxiliary.hpp"
#include "doer/corpus.hpp"
#include "doer/crf.hpp"
#include "doer/csu.hpp"
#include "doer/embedding.hpp"
#include "doer/regu.hpp"
#include "doer/tags.hpp"

namespace doer {

struct ModelConfig {
  std::size_t general_dim = 300;
  std::size_t domain_dim = 100;
  std::size_t hidden_dim = 300;  // d; branch outputs are 2d wide
  std::size_t slices = 5;        // K
  std::size_t num_layers = 2;
  double dropout = 0.5;
  bool use_csu = true;
  bool use_aux_length = true;
  bool use_aux_sentiment = true;

  std::size_t input_dim() const { return general_dim + domain_dim; }
  bool operator==(const ModelConfig&) const = default;
};

/// Everything one forward pass produces.
struct ForwardResult {
  Tensor emissions_a;  // n x 3
  Tensor emissions_p;  // n x 5
  Tensor first_a;      // first-layer outputs (auxiliary taps)
  Tensor first_p;
  Tensor scores_a;  // raw CSU scores, empty when the CSU is disabled
  Tensor scores_p;
  double length_a = 0.0;  // only when auxiliary heads ran
  double length_p = 0.0;
  Tensor sentiment;  // n x 3
};

struct ForwardTrace {
  BranchTrace branch_a, branch_p;
  CrossEnhanceTrace csu;
  Tensor enhanced_a, enhanced_p;  // CRF inputs
  LengthHeadResult len_a, len_p;
};

struct ForwardOptions {
  bool training = false;
  Rng* rng = nullptr;      // dropout draws; required when training with dropout > 0
  bool with_aux = false;   // evaluate the enabled auxiliary heads
};

/// Dual-branch tagger: embeddings -> BiReGU stack per branch -> CSU ->
/// CRF per branch, plus the auxiliary length and lexicon heads.
class DoerModel {
 public:
  explicit DoerModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  BranchStack ate;
  BranchStack asc;
  CSUParams csu;
  CRFParams crf_a;
  CRFParams crf_p;
  AuxParams aux;
  double length_norm = 1.0;

  /// Trainable parameters in a fixed order. Components switched off by the
  /// ablation flags are left out.
  ParamRefs params();

  void initialize(std::uint64_t seed);
  void zero_all();

  ForwardResult forward(const Tensor& x, const ForwardOptions& opts, ForwardTrace* trace = nullptr) const;

 private:
  ModelConfig config_;
};

/// A labeled sentence turned into model inputs and targets.
struct Example {
  Tensor x;
  std::vector<std::size_t> aspect;
  std::vector<std::size_t> polarity;
  std::vector<SentimentLabel> sentiment;
  double length_target = 0.0;
};

/// Throws std::invalid_argument for an unlabeled sentence.
std::vector<Example> prepare_examples(std::span<const Sentence> sentences, const DoubleEmbedding& emb,
                                      const Lexicon& lexicon, double length_norm);

struct LossBreakdown {
  double crf_a = 0.0;      // summed -log p over the batch
  double crf_p = 0.0;
  double length_a = 0.0;   // batch means
  double length_p = 0.0;
  double sentiment = 0.0;
  double regularizer = 0.0;

  double total() const { return crf_a + crf_p + length_a + length_p + sentiment + regularizer; }
  LossBreakdown& operator+=(const LossBreakdown& o);
};

/// J = (L_a + L_p) + (L_uA + L_uP + L_s) + lambda/2 * |theta|^2 over one
/// batch. With `with_grads`, dJ/dtheta is accumulated into the parameters
/// (the caller zeroes them first). `rng` drives dropout and may be null
/// when the model's dropout is 0.
LossBreakdown joint_loss(std::span<const Example> batch, DoerModel& model, double lambda, Rng* rng,
                         bool with_grads);

struct TagPrediction {
  std::vector<AspectTag> aspect;  // repaired
  std::vector<PolarityTag> polarity;
  std::vector<AspectPair> pairs;
  std::size_t repairs = 0;            // I tags rewritten to B
  std::size_t polarity_fallbacks = 0;
};

/// Evaluation-mode forward, Viterbi on both branches, repair and joint output.
TagPrediction predict(const DoerModel& model, std::span<const std::string> tokens, const Tensor& x);

}  // namespace doer
