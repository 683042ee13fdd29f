#include "doer/model.hpp"

#include <stdexcept>

#include "doer/decode.hpp"
#include "doer/ops.hpp"

namespace doer {

DoerModel::DoerModel(const ModelConfig& config)
    : ate("ate", config.input_dim(), config.hidden_dim, config.num_layers),
      asc("asc", config.input_dim(), config.hidden_dim, config.num_layers),
      csu("csu", config.slices, 2 * config.hidden_dim),
      crf_a("crf_a", 2 * config.hidden_dim, kNumAspectTags),
      crf_p("crf_p", 2 * config.hidden_dim, kNumPolarityTags),
      aux("aux", 2 * config.hidden_dim),
      config_(config) {
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

ParamRefs DoerModel::params() {
  ParamRefs out;
  ate.collect(out);
  asc.collect(out);
  if (config_.use_csu) csu.collect(out);
  crf_a.collect(out);
  crf_p.collect(out);
  if (config_.use_aux_length) aux.collect_length(out);
  if (config_.use_aux_sentiment) aux.collect_sentiment(out);
  return out;
}

void DoerModel::initialize(std::uint64_t seed) {
  Rng root = Rng(seed).split("init");
  Rng r_ate = root.split("ate"), r_asc = root.split("asc"), r_csu = root.split("csu");
  Rng r_crf_a = root.split("crf_a"), r_crf_p = root.split("crf_p"), r_aux = root.split("aux");
  ate.initialize(r_ate);
  asc.initialize(r_asc);
  csu.initialize(r_csu);
  crf_a.initialize(r_crf_a);
  crf_p.initialize(r_crf_p);
  aux.initialize(r_aux);
}

void DoerModel::zero_all() {
  // Includes parameters of disabled components.
  ParamRefs all;
  ate.collect(all);
  asc.collect(all);
  csu.collect(all);
  crf_a.collect(all);
  crf_p.collect(all);
  aux.collect_length(all);
  aux.collect_sentiment(all);
  for (ParamTensor* p : all) {
    p->value.fill(0.0);
    p->grad.fill(0.0);
  }
}

ForwardResult DoerModel::forward(const Tensor& x, const ForwardOptions& opts, ForwardTrace* trace) const {
  if (x.rank() != 2 || x.rows() == 0) throw DimensionError("forward: empty sentence");
  if (x.cols() != config_.input_dim()) {
    throw DimensionError("forward: token vectors are " + std::to_string(x.cols()) + " wide, model expects " +
                         std::to_string(config_.input_dim()));
  }
  const DropoutContext ctx{config_.dropout, opts.training, opts.rng};
  ForwardResult r;
  BranchOutput out_a = branch_forward(x, ate, ctx, trace ? &trace->branch_a : nullptr);
  BranchOutput out_p = branch_forward(x, asc, ctx, trace ? &trace->branch_p : nullptr);

  Tensor top_a, top_p;
  if (config_.use_csu) {
    CrossEnhanceResult ce = cross_enhance(out_a.top, out_p.top, csu, trace ? &trace->csu : nullptr);
    top_a = std::move(ce.h_a);
    top_p = std::move(ce.h_p);
    r.scores_a = std::move(ce.s_a);
    r.scores_p = std::move(ce.s_p);
  } else {
    top_a = std::move(out_a.top);
    top_p = std::move(out_p.top);
  }
  r.emissions_a = emissions(top_a, crf_a);
  r.emissions_p = emissions(top_p, crf_p);
  r.emissions_a.require_finite("aspect emissions");
  r.emissions_p.require_finite("polarity emissions");

  if (opts.with_aux || opts.training) {
    if (config_.use_aux_length) {
      LengthHeadResult la = length_head(out_a.first_layer, aux.W_uA.value, aux.b_uA.value[0]);
      LengthHeadResult lp = length_head(out_p.first_layer, aux.W_uP.value, aux.b_uP.value[0]);
      r.length_a = la.z;
      r.length_p = lp.z;
      if (trace) {
        trace->len_a = std::move(la);
        trace->len_p = std::move(lp);
      }
    }
    if (config_.use_aux_sentiment) r.sentiment = sentiment_probs(out_p.first_layer, aux.W_s.value, aux.b_s.value);
  }
  r.first_a = std::move(out_a.first_layer);
  r.first_p = std::move(out_p.first_layer);
  if (trace) {
    trace->enhanced_a = std::move(top_a);
    trace->enhanced_p = std::move(top_p);
  }
  return r;
}

std::vector<Example> prepare_examples(std::span<const Sentence> sentences, const DoubleEmbedding& emb,
                                      const Lexicon& lexicon, double length_norm) {
  std::vector<Example> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    if (!s.labeled()) throw std::invalid_argument("training needs gold tags on every sentence");
    Example e;
    e.x = embed_sentence(s.tokens, emb);
    for (AspectTag t : s.aspect_tags) e.aspect.push_back(index_of(t));
    for (PolarityTag t : s.polarity_tags) e.polarity.push_back(index_of(t));
    e.sentiment = sentiment_targets(s, lexicon);
    e.length_target = length_target(s, length_norm);
    out.push_back(std::move(e));
  }
  return out;
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  crf_a += o.crf_a;
  crf_p += o.crf_p;
  length_a += o.length_a;
  length_p += o.length_p;
  sentiment += o.sentiment;
  regularizer += o.regularizer;
  return *this;
}

LossBreakdown joint_loss(std::span<const Example> batch, DoerModel& model, double lambda, Rng* rng,
                         bool with_grads) {
  if (batch.empty()) throw std::invalid_argument("joint_loss: empty batch");
  const ModelConfig& cfg = model.config();
  const double aux_weight = 1.0 / static_cast<double>(batch.size());
  LossBreakdown loss;

  for (const Example& ex : batch) {
    if (ex.aspect.size() != ex.x.rows() || ex.polarity.size() != ex.x.rows()) {
      throw std::invalid_argument("joint_loss: example is missing gold tags");
    }
    ForwardTrace trace;
    const ForwardResult fr = model.forward(ex.x, {true, rng, true}, &trace);

    Tensor d_em_a, d_em_p;
    loss.crf_a += crf_nll_backward(fr.emissions_a, model.crf_a, ex.aspect, d_em_a);
    loss.crf_p += crf_nll_backward(fr.emissions_p, model.crf_p, ex.polarity, d_em_p);

    const std::size_t n = ex.x.rows();
    const std::size_t width = 2 * cfg.hidden_dim;
    Tensor d_first_a = Tensor::matrix(n, width);
    Tensor d_first_p = Tensor::matrix(n, width);

    if (cfg.use_aux_length) {
      loss.length_a += aux_weight * length_loss(fr.length_a, ex.length_target);
      loss.length_p += aux_weight * length_loss(fr.length_p, ex.length_target);
      if (with_grads) {
        length_head_backward(trace.len_a, aux_weight * 2.0 * (fr.length_a - ex.length_target), model.aux.W_uA,
                             model.aux.b_uA, d_first_a);
        length_head_backward(trace.len_p, aux_weight * 2.0 * (fr.length_p - ex.length_target), model.aux.W_uP,
                             model.aux.b_uP, d_first_p);
      }
    }
    if (cfg.use_aux_sentiment) {
      loss.sentiment += aux_weight * sentiment_loss(fr.sentiment, ex.sentiment);
      if (with_grads) {
        sentiment_backward(fr.first_p, fr.sentiment, ex.sentiment, aux_weight, model.aux.W_s, model.aux.b_s,
                           d_first_p);
      }
    }

    if (!with_grads) continue;
    Tensor d_top_a = emissions_backward(trace.enhanced_a, d_em_a, model.crf_a);
    Tensor d_top_p = emissions_backward(trace.enhanced_p, d_em_p, model.crf_p);
    if (cfg.use_csu) {
      CrossEnhanceGrads g = cross_enhance_backward(trace.csu, d_top_a, d_top_p, model.csu);
      d_top_a = std::move(g.h_a);
      d_top_p = std::move(g.h_p);
    }
    const bool tap = cfg.use_aux_length || cfg.use_aux_sentiment;
    branch_backward(trace.branch_a, tap ? &d_first_a : nullptr, d_top_a, model.ate);
    branch_backward(trace.branch_p, tap ? &d_first_p : nullptr, d_top_p, model.asc);
  }

  if (lambda > 0.0) {
    ParamRefs params = model.params();
    loss.regularizer = 0.5 * lambda * sum_of_squares(params);
    if (with_grads) {
      for (ParamTensor* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) p->grad[i] += lambda * p->value[i];
      }
    }
  }
  return loss;
}

TagPrediction predict(const DoerModel& model, std::span<const std::string> tokens, const Tensor& x) {
  const ForwardResult fr = model.forward(x, {});
  const auto path_a = viterbi(fr.emissions_a, model.crf_a);
  const auto path_p = viterbi(fr.emissions_p, model.crf_p);
  TagPrediction p;
  std::vector<AspectTag> raw;
  for (std::size_t y : path_a) raw.push_back(static_cast<AspectTag>(y));
  for (std::size_t y : path_p) p.polarity.push_back(static_cast<PolarityTag>(y));
  p.aspect = repair_aspect_tags(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) p.repairs += raw[i] != p.aspect[i];
  AssembleStats stats;
  p.pairs = assemble_pairs(tokens, p.aspect, p.polarity, &stats);
  p.polarity_fallbacks = stats.polarity_fallbacks;
  return p;
}

}  // namespace doer
