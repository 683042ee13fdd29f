#include "doer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace doer {

namespace {

constexpr char kMagic[8] = {'D', 'O', 'E', 'R', 'C', 'K', 'P', 'T'};
constexpr char kFooter[8] = {'D', 'O', 'E', 'R', 'E', 'N', 'D', '!'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json config_json(const ModelConfig& c) {
  return {{"general_dim", c.general_dim}, {"domain_dim", c.domain_dim},   {"hidden_dim", c.hidden_dim},
          {"slices", c.slices},           {"num_layers", c.num_layers},   {"dropout", c.dropout},
          {"use_csu", c.use_csu},         {"use_aux_length", c.use_aux_length},
          {"use_aux_sentiment", c.use_aux_sentiment}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.general_dim = j.at("general_dim").get<std::size_t>();
  c.domain_dim = j.at("domain_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.slices = j.at("slices").get<std::size_t>();
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.use_csu = j.at("use_csu").get<bool>();
  c.use_aux_length = j.at("use_aux_length").get<bool>();
  c.use_aux_sentiment = j.at("use_aux_sentiment").get<bool>();
  return c;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint64_t from_hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

std::map<std::string, ParamTensor*> by_name(DoerModel& model) {
  std::map<std::string, ParamTensor*> m;
  for (ParamTensor* p : model.params()) m[p->name] = p;
  return m;
}

}  // namespace

EmbeddingInfo embedding_info(const DoubleEmbedding& emb) {
  return {emb.general.vocab_hash(), emb.domain.vocab_hash(), emb.general.oov_seed(), emb.domain.oov_seed()};
}

void save_checkpoint(const DoerModel& model, const EmbeddingInfo& embeddings, const std::filesystem::path& path) {
  DoerModel copy = model;
  const ParamRefs params = copy.params();

  nlohmann::json header;
  header["format"] = "doer-checkpoint";
  header["version"] = kCheckpointVersion;
  header["config"] = config_json(model.config());
  header["length_norm"] = model.length_norm;
  header["aspect_tags"] = std::vector<std::string>(kAspectTagNames.begin(), kAspectTagNames.end());
  header["polarity_tags"] = std::vector<std::string>(kPolarityTagNames.begin(), kPolarityTagNames.end());
  header["embeddings"] = {{"general_vocab_hash", hex(embeddings.general_hash)},
                          {"domain_vocab_hash", hex(embeddings.domain_hash)},
                          {"general_oov_seed", hex(embeddings.general_oov_seed)},
                          {"domain_oov_seed", hex(embeddings.domain_oov_seed)}};
  header["tensor_count"] = params.size();
  const std::string header_text = header.dump(2);

  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const ParamTensor* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    const auto& shape = p->value.shape();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put_le<std::uint64_t>(out, d);
    for (double v : p->value.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  out.append(kFooter, sizeof kFooter);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig* expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  Reader in(buf.str());

  if (in.take(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw CheckpointError("not a checkpoint file");
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = in.le<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  Checkpoint ck{DoerModel(config_from_json(header.at("config"))), {}};
  ck.model.length_norm = header.at("length_norm").get<double>();
  if (header.at("aspect_tags").get<std::vector<std::string>>() !=
          std::vector<std::string>(kAspectTagNames.begin(), kAspectTagNames.end()) ||
      header.at("polarity_tags").get<std::vector<std::string>>() !=
          std::vector<std::string>(kPolarityTagNames.begin(), kPolarityTagNames.end())) {
    throw CheckpointError("checkpoint tag scheme differs from this build");
  }
  const auto& e = header.at("embeddings");
  ck.embeddings = {from_hex(e.at("general_vocab_hash")), from_hex(e.at("domain_vocab_hash")),
                   from_hex(e.at("general_oov_seed")), from_hex(e.at("domain_oov_seed"))};

  std::optional<DoerModel> reference;
  std::map<std::string, ParamTensor*> expected_params;
  if (expected) {
    reference.emplace(*expected);
    expected_params = by_name(*reference);
  }

  auto params = by_name(ck.model);
  const auto count = header.at("tensor_count").get<std::size_t>();
  if (count != params.size()) throw CheckpointError("checkpoint tensor count does not match its configuration");

  // Values go to a scratch copy so a failure leaves no partial model behind.
  std::map<std::string, Tensor> loaded;
  for (std::size_t k = 0; k < count; ++k) {
    const std::string name = in.take(in.le<std::uint32_t>());
    const auto rank = in.le<std::uint32_t>();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = in.le<std::uint64_t>();
    auto it = params.find(name);
    if (it == params.end()) throw CheckpointError("unexpected tensor '" + name + "' in checkpoint");
    if (it->second->value.shape() != shape) {
      throw CheckpointError("tensor '" + name + "' has shape " + shape_string(shape) + ", configuration implies " +
                            shape_string(it->second->value.shape()));
    }
    if (expected) {
      auto ex = expected_params.find(name);
      if (ex == expected_params.end()) throw CheckpointError("tensor '" + name + "' is not part of the expected model");
      if (ex->second->value.shape() != shape) {
        throw CheckpointError("tensor '" + name + "' has shape " + shape_string(shape) + " but the run expects " +
                              shape_string(ex->second->value.shape()));
      }
    }
    Tensor t(shape);
    for (double& v : t.values()) v = std::bit_cast<double>(in.le<std::uint64_t>());
    if (!loaded.emplace(name, std::move(t)).second) throw CheckpointError("duplicate tensor '" + name + "'");
  }
  if (in.take(sizeof kFooter) != std::string(kFooter, sizeof kFooter) || !in.at_end()) {
    throw CheckpointError("checkpoint footer missing or trailing data present");
  }
  if (expected && expected_params.size() != params.size()) {
    throw CheckpointError("checkpoint configuration differs from the expected model");
  }
  for (auto& [name, t] : loaded) params.at(name)->value = std::move(t);
  return ck;
}

std::vector<std::string> check_embeddings(const EmbeddingInfo& saved, const DoubleEmbedding& emb) {
  std::vector<std::string> issues;
  if (saved.general_hash != emb.general.vocab_hash()) issues.push_back("general-purpose vocabulary differs from training");
  if (saved.domain_hash != emb.domain.vocab_hash()) issues.push_back("domain vocabulary differs from training");
  return issues;
}

}  // namespace doer
