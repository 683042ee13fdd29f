#include "doer/toycheck.hpp"

#include "doer/synthetic.hpp"

namespace doer {

ModelConfig toy_model_config(const ToyCheckConfig& cfg) {
  ModelConfig m;
  m.general_dim = 4;
  m.domain_dim = 3;
  m.hidden_dim = 6;
  m.slices = 2;
  m.num_layers = 2;
  m.dropout = cfg.dropout;
  m.use_csu = cfg.use_csu;
  m.use_aux_length = cfg.use_aux_length;
  m.use_aux_sentiment = cfg.use_aux_sentiment;
  return m;
}

GradCheckReport toy_grad_check(const ToyCheckConfig& cfg) {
  const SyntheticCorpus toy = toy_batch();
  const DoubleEmbedding emb = random_embedding(toy.vocabulary, 4, 3, cfg.seed);
  DoerModel model(toy_model_config(cfg));
  model.initialize(cfg.seed);
  if (cfg.point_scale > 0.0) {
    Rng point = Rng(cfg.seed).split("gradcheck-point");
    for (ParamTensor* p : model.params())
      for (double& v : p->value.values()) v = point.uniform(-cfg.point_scale, cfg.point_scale);
  }
  model.length_norm = compute_length_norm(toy.sentences);
  const std::vector<Example> batch = prepare_examples(toy.sentences, emb, toy.lexicon, model.length_norm);

  ParamRefs params = model.params();
  ParamTensor* corrupt = nullptr;
  for (ParamTensor* p : params)
    if (p->name == cfg.corrupt_param) corrupt = p;
  if (!cfg.corrupt_param.empty() && !corrupt) {
    throw std::invalid_argument("no parameter named '" + cfg.corrupt_param + "'");
  }

  const LossFunction loss = [&](bool with_grads) {
    Rng dropout = Rng(cfg.seed).split("dropout");
    const double j = joint_loss(batch, model, cfg.lambda, &dropout, with_grads).total();
    if (with_grads && corrupt) {
      for (double& g : corrupt->grad.values()) g *= cfg.corrupt_scale;
    }
    return j;
  };
  return grad_check(loss, params, cfg.eps);
}

}  // namespace doer
