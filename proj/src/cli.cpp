#include "doer/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "doer/checkpoint.hpp"
#include "doer/kernels.hpp"
#include "doer/ops.hpp"
#include "doer/toycheck.hpp"

namespace doer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Setter = std::function<void(RunConfig&, const json&)>;

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else {
      if (!v.is_number()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value " + v.dump());
  }
}

#define DOER_KEY(name, member) \
  {name, [](RunConfig& c, const json& v) { c.member = as<decltype(c.member)>(v, name); }}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      DOER_KEY("train_path", train_path),
      DOER_KEY("dev_path", dev_path),
      DOER_KEY("test_path", test_path),
      DOER_KEY("general_embeddings", general_embeddings),
      DOER_KEY("domain_embeddings", domain_embeddings),
      DOER_KEY("lexicon_path", lexicon_path),
      DOER_KEY("checkpoint_path", checkpoint_path),
      DOER_KEY("output_path", output_path),
      DOER_KEY("log_path", log_path),
      DOER_KEY("predictions_path", predictions_path),
      DOER_KEY("general_dim", model.general_dim),
      DOER_KEY("domain_dim", model.domain_dim),
      DOER_KEY("hidden_dim", model.hidden_dim),
      DOER_KEY("slices", model.slices),
      DOER_KEY("num_layers", model.num_layers),
      DOER_KEY("dropout", model.dropout),
      DOER_KEY("use_csu", model.use_csu),
      DOER_KEY("use_aux_length", model.use_aux_length),
      DOER_KEY("use_aux_sentiment", model.use_aux_sentiment),
      DOER_KEY("learning_rate", train.learning_rate),
      DOER_KEY("batch_size", train.batch_size),
      DOER_KEY("epochs", train.epochs),
      DOER_KEY("lambda", train.lambda),
      DOER_KEY("clip_norm", train.clip_norm),
      DOER_KEY("seed", train.seed),
      DOER_KEY("patience", train.patience),
      DOER_KEY("target_f1", train.target_f1),
      DOER_KEY("threads", threads),
      DOER_KEY("gradcheck_eps", gradcheck_eps),
      DOER_KEY("gradcheck_corrupt", gradcheck_corrupt),
  };
  return table;
}

#undef DOER_KEY

const std::set<std::string> kShapeKeys = {"general_dim", "domain_dim", "hidden_dim", "slices", "num_layers"};

std::string slurp(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is not set");
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " not found: " + path);
}

std::vector<Sentence> read_corpus(const std::string& path, const char* what) {
  require_file(path, what);
  return read_corpus_file(path);
}

std::vector<Sentence> require_labeled(std::vector<Sentence> s, const std::string& path) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].labeled()) throw DataError(path + ": sentence " + std::to_string(i + 1) + " has no gold tags");
  }
  return s;
}

EmbeddingTable load_table(const std::string& path, std::size_t dim, std::uint64_t oov_seed, const char* what,
                          std::ostream& err) {
  if (path.empty()) return EmbeddingTable(dim, oov_seed);  // every word takes its hashed OOV vector
  require_file(path, what);
  VectorLoadStats stats;
  EmbeddingTable t = load_vectors(path, dim, oov_seed, &stats);
  for (const auto& w : stats.warnings) err << "warning: " << path << ": " << w << "\n";
  return t;
}

DoubleEmbedding load_embeddings(const RunConfig& cfg, const ModelConfig& m, std::uint64_t general_seed,
                                std::uint64_t domain_seed, std::ostream& err) {
  return {load_table(cfg.general_embeddings, m.general_dim, general_seed, "general embedding file", err),
          load_table(cfg.domain_embeddings, m.domain_dim, domain_seed, "domain embedding file", err)};
}

Lexicon read_lexicon(const RunConfig& cfg, std::ostream& err) {
  if (cfg.lexicon_path.empty()) return {};
  require_file(cfg.lexicon_path, "lexicon file");
  Lexicon lex = load_lexicon(cfg.lexicon_path);
  for (const auto& w : lex.warnings) err << "warning: " << cfg.lexicon_path << ": " << w << "\n";
  return lex;
}

// Output stream: the configured file, or `fallback` when no path is set.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw DataError("cannot write " + path);
      os_ = &file_;
    }
  }
  std::ostream& get() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

Checkpoint open_checkpoint(const RunConfig& cfg) {
  require_file(cfg.checkpoint_path, "checkpoint");
  Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
  bool shaped = false;
  for (const auto& k : kShapeKeys) shaped = shaped || cfg.explicit_keys.count(k);
  if (!shaped) return ck;
  ModelConfig expected = ck.model.config();
  expected.general_dim = cfg.model.general_dim;
  expected.domain_dim = cfg.model.domain_dim;
  expected.hidden_dim = cfg.model.hidden_dim;
  expected.slices = cfg.model.slices;
  expected.num_layers = cfg.model.num_layers;
  if (expected == ck.model.config()) return ck;
  return load_checkpoint(cfg.checkpoint_path, &expected);
}

DoubleEmbedding checkpoint_embeddings(const RunConfig& cfg, const Checkpoint& ck, std::ostream& err) {
  DoubleEmbedding emb =
      load_embeddings(cfg, ck.model.config(), ck.embeddings.general_oov_seed, ck.embeddings.domain_oov_seed, err);
  for (const auto& issue : check_embeddings(ck.embeddings, emb)) err << "warning: " << issue << "\n";
  return emb;
}

void print_report(std::ostream& out, const char* label, const EvalReport& r) {
  out << label << ": pair P=" << r.pairs.precision() << " R=" << r.pairs.recall() << " F1=" << r.pairs.f1()
      << " | ATE P=" << r.spans.precision() << " R=" << r.spans.recall() << " F1=" << r.spans.f1() << "\n";
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.checkpoint_path.empty()) throw ConfigError("checkpoint_path is not set");
  const auto train_set = require_labeled(read_corpus(cfg.train_path, "training corpus"), cfg.train_path);
  if (train_set.empty()) throw DataError(cfg.train_path + ": no sentences");
  std::vector<Sentence> dev_set;
  if (!cfg.dev_path.empty()) dev_set = require_labeled(read_corpus(cfg.dev_path, "dev corpus"), cfg.dev_path);
  const Lexicon lexicon = read_lexicon(cfg, err);

  const Rng root(cfg.train.seed);
  const DoubleEmbedding emb = load_embeddings(cfg, cfg.model, root.split("oov-general").next_u64(),
                                              root.split("oov-domain").next_u64(), err);

  std::unique_ptr<Sink> log;
  if (!cfg.log_path.empty()) log = std::make_unique<Sink>(cfg.log_path, out);
  const TrainResult result = train(train_set, dev_set, emb, lexicon, cfg.model, cfg.train, [&](const EpochRecord& r) {
    if (log) log->get() << epoch_record_json(r) << "\n" << std::flush;
    out << "epoch " << r.epoch << " loss " << r.loss.total();
    if (r.has_dev) out << " dev pair-F1 " << r.dev.pairs.f1();
    out << "\n";
  });
  save_checkpoint(result.model, embedding_info(emb), cfg.checkpoint_path);
  out << "checkpoint " << cfg.checkpoint_path << " (epoch " << result.best_epoch << ")\n";
  if (!dev_set.empty()) print_report(out, "dev", evaluate(result.model, emb, dev_set));
  return kOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto sentences = read_corpus(cfg.test_path, "input corpus");
  const Checkpoint ck = open_checkpoint(cfg);
  const DoubleEmbedding emb = checkpoint_embeddings(cfg, ck, err);
  std::vector<std::vector<AspectPair>> pairs;
  std::size_t repairs = 0, fallbacks = 0;
  for (const Sentence& s : sentences) {
    TagPrediction p = predict(ck.model, s.tokens, embed_sentence(s.tokens, emb));
    repairs += p.repairs;
    fallbacks += p.polarity_fallbacks;
    pairs.push_back(std::move(p.pairs));
  }
  Sink sink(cfg.output_path, out);
  write_pairs(sink.get(), pairs);
  if (repairs || fallbacks) {
    err << "note: " << repairs << " aspect tag repairs, " << fallbacks << " polarity fallbacks to NT\n";
  }
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto gold_sentences = require_labeled(read_corpus(cfg.test_path, "gold corpus"), cfg.test_path);
  std::vector<std::vector<AspectPair>> gold, pred;
  for (const auto& s : gold_sentences) gold.push_back(extract_gold_pairs(s));

  if (!cfg.predictions_path.empty()) {
    std::istringstream in(slurp(cfg.predictions_path, "predictions file"));
    pred = read_pairs(in);
    if (pred.size() != gold.size()) {
      throw DataError("predictions cover " + std::to_string(pred.size()) + " sentences, gold has " +
                      std::to_string(gold.size()));
    }
  } else {
    const Checkpoint ck = open_checkpoint(cfg);
    const DoubleEmbedding emb = checkpoint_embeddings(cfg, ck, err);
    for (const auto& s : gold_sentences) pred.push_back(predict(ck.model, s.tokens, embed_sentence(s.tokens, emb)).pairs);
  }
  const EvalReport report = pair_f1(gold, pred);
  print_report(out, "eval", report);
  if (!cfg.output_path.empty()) {
    Sink sink(cfg.output_path, out);
    sink.get() << eval_report_json(report) << "\n";
  }
  return kOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ToyCheckConfig t;
  t.seed = cfg.train.seed;
  t.eps = cfg.gradcheck_eps;
  t.lambda = cfg.train.lambda;
  t.dropout = cfg.model.dropout;
  t.use_csu = cfg.model.use_csu;
  t.use_aux_length = cfg.model.use_aux_length;
  t.use_aux_sentiment = cfg.model.use_aux_sentiment;
  t.corrupt_param = cfg.gradcheck_corrupt;
  GradCheckReport report;
  try {
    report = toy_grad_check(t);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  constexpr double kTolerance = 1e-4;
  for (const auto& p : report.params) {
    out << std::left << std::setw(24) << p.name << " " << std::setw(5) << p.entries << " max rel error "
        << std::scientific << std::setprecision(3) << p.max_rel_error << " (analytic " << p.analytic << ", numeric " << p.numeric << " at " << p.worst_index
        << ")" << std::defaultfloat << "\n";
  }
  const auto bad = report.failing(kTolerance);
  if (bad.empty()) {
    out << "gradcheck passed (worst " << report.max_rel_error << ")\n";
    return kOk;
  }
  err << "gradcheck failed for:";
  for (const auto& n : bad) err << " " << n;
  err << "\n";
  return kNumericError;
}

void dump_matrix(std::ostream& os, const char* label, std::size_t index, std::span<const std::string> tokens,
                 const Tensor& s) {
  os << "# sentence " << index << " " << label << "\n";
  for (const auto& t : tokens) os << "\t" << t;
  os << "\n";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    os << tokens[i];
    for (std::size_t j = 0; j < tokens.size(); ++j) os << "\t" << s(i, j);
    os << "\n";
  }
}

double row_sum_deviation(const Tensor& scores) {
  const Tensor p = softmax_rows(scores);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (double v : p.row(i)) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

int cmd_attention(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto sentences = read_corpus(cfg.test_path, "input corpus");
  const Checkpoint ck = open_checkpoint(cfg);
  if (!ck.model.config().use_csu) {
    throw ConfigError("checkpoint was trained with use_csu=false, so it has no attention scores to dump");
  }
  const DoubleEmbedding emb = checkpoint_embeddings(cfg, ck, err);
  Sink sink(cfg.output_path, out);
  std::ostream& os = sink.get();
  os << std::setprecision(17);
  double worst = 0.0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& tokens = sentences[k].tokens;
    const ForwardResult r = ck.model.forward(embed_sentence(tokens, emb), ForwardOptions{});
    dump_matrix(os, "S_A", k + 1, tokens, r.scores_a);
    dump_matrix(os, "S_P", k + 1, tokens, r.scores_p);
    const double dev = std::max(row_sum_deviation(r.scores_a), row_sum_deviation(r.scores_p));
    worst = std::max(worst, dev);
    os << "# softmax row sums: max |sum - 1| = " << dev << (dev <= 1e-9 ? " ok" : " FAILED") << "\n\n";
  }
  os << "# sentences " << sentences.size() << ", worst row-sum deviation " << worst << "\n";
  return worst <= 1e-9 ? kOk : kNumericError;
}

}  // namespace

void set_key(RunConfig& cfg, const std::string& key, const json& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, value);
  cfg.explicit_keys.insert(key);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path);
    json j;
    try {
      j = json::parse(slurp(path, "config file"));
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
    for (const auto& [k, v] : j.items()) set_key(cfg, k, v);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + o + "'");
    const std::string key = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    // JSON literal when it parses (numbers, booleans, quoted strings), raw string otherwise.
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) v = text;
    set_key(cfg, key, v);
  }
  return cfg;
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.model.general_dim > 0 && c.model.domain_dim > 0, "embedding dims must be positive");
  need(c.model.hidden_dim > 0, "hidden_dim must be positive");
  need(c.model.slices > 0, "slices must be positive");
  need(c.model.num_layers > 0, "num_layers must be positive");
  need(c.model.dropout >= 0.0 && c.model.dropout < 1.0, "dropout must lie in [0, 1)");
  need(c.train.learning_rate > 0.0, "learning_rate must be positive");
  need(c.train.batch_size > 0, "batch_size must be positive");
  need(c.train.lambda >= 0.0, "lambda must be non-negative");
  need(c.train.clip_norm > 0.0, "clip_norm must be positive");
  need(c.train.target_f1 >= 0.0 && c.train.target_f1 <= 1.0, "target_f1 must lie in [0, 1]");
  need(c.threads >= 0, "threads must be non-negative");
  need(c.gradcheck_eps >= 1e-6 && c.gradcheck_eps <= 1e-4, "gradcheck_eps must lie in [1e-6, 1e-4]");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DOER aspect term-polarity co-extraction"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--threads", threads, "worker thread cap");
  app.add_option("--set", overrides, "override one config key, key=value")->take_all()->allow_extra_args(false);

  using Command = int (*)(const RunConfig&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"train", "train a model and write a checkpoint", cmd_train},
      {"predict", "write aspect term-polarity pairs for a corpus", cmd_predict},
      {"eval", "score predictions against a labeled corpus", cmd_eval},
      {"gradcheck", "finite-difference check of the full model on a toy batch", cmd_gradcheck},
      {"attention", "dump the cross-shared attention scores", cmd_attention},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    RunConfig cfg = load_config(config_path, overrides);
    if (seed) {
      cfg.train.seed = *seed;
      cfg.explicit_keys.insert("seed");
    }
    if (threads) cfg.threads = *threads;
    validate(cfg);
    if (cfg.threads > 0) kernels::set_num_threads(cfg.threads);
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) return fn(cfg, out, err);
    }
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    // Parse, dimension, checkpoint and I/O problems all come from the data.
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace doer::cli
