#include "doer/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "doer/corpus.hpp"
#include "doer/rng.hpp"

namespace doer {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::uint64_t oov_seed) : dim_(dim), oov_seed_(oov_seed) {
  if (dim == 0) throw DimensionError("embedding dim must be positive");
}

EmbeddingTable::EmbeddingTable(const EmbeddingTable& other)
    : dim_(other.dim_), oov_seed_(other.oov_seed_), words_(other.words_), index_(other.index_),
      matrix_(other.matrix_) {
  std::lock_guard lock(other.oov_mutex_);
  oov_cache_ = other.oov_cache_;
}

EmbeddingTable& EmbeddingTable::operator=(const EmbeddingTable& other) {
  if (this == &other) return *this;
  EmbeddingTable copy(other);
  *this = std::move(copy);
  return *this;
}

EmbeddingTable::EmbeddingTable(EmbeddingTable&& other) noexcept
    : dim_(other.dim_), oov_seed_(other.oov_seed_), words_(std::move(other.words_)),
      index_(std::move(other.index_)), matrix_(std::move(other.matrix_)), oov_cache_(std::move(other.oov_cache_)) {}

EmbeddingTable& EmbeddingTable::operator=(EmbeddingTable&& other) noexcept {
  dim_ = other.dim_;
  oov_seed_ = other.oov_seed_;
  words_ = std::move(other.words_);
  index_ = std::move(other.index_);
  matrix_ = std::move(other.matrix_);
  oov_cache_ = std::move(other.oov_cache_);
  return *this;
}

EmbeddingTable::~EmbeddingTable() = default;

EmbeddingTable EmbeddingTable::random(std::span<const std::string> words, std::size_t dim, std::uint64_t seed,
                                      double scale) {
  EmbeddingTable t(dim, seed);
  Rng rng = Rng(seed).split("embedding-table");
  std::vector<double> vec(dim);
  for (const auto& w : words) {
    if (t.index_.count(w)) continue;
    for (double& v : vec) v = rng.uniform(-scale, scale);
    t.add(w, vec);
  }
  return t;
}

bool EmbeddingTable::add(const std::string& word, std::span<const double> vec) {
  if (vec.size() != dim_) throw DimensionError("embedding row for '" + word + "' has wrong width");
  auto [it, inserted] = index_.try_emplace(word, words_.size());
  if (!inserted) return false;
  words_.push_back(word);
  matrix_.insert(matrix_.end(), vec.begin(), vec.end());
  return true;
}

std::optional<std::size_t> EmbeddingTable::index_of(const std::string& word) const {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  if (auto it = index_.find(to_lower(word)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::span<const double> EmbeddingTable::row(std::size_t index) const {
  return std::span<const double>(matrix_).subspan(index * dim_, dim_);
}

void EmbeddingTable::lookup(const std::string& word, std::span<double> out) const {
  if (out.size() != dim_) throw DimensionError("embedding lookup buffer has wrong width");
  if (auto idx = index_of(word)) {
    auto r = row(*idx);
    std::copy(r.begin(), r.end(), out.begin());
    return;
  }
  std::lock_guard lock(oov_mutex_);
  auto it = oov_cache_.find(word);
  if (it == oov_cache_.end()) {
    Rng rng(splitmix64(oov_seed_ ^ fnv1a64(word)));
    const double bound = 0.25 / std::sqrt(static_cast<double>(dim_));
    std::vector<double> vec(dim_);
    for (double& v : vec) v = rng.uniform(-bound, bound);
    it = oov_cache_.emplace(word, std::move(vec)).first;
  }
  std::copy(it->second.begin(), it->second.end(), out.begin());
}

std::size_t EmbeddingTable::oov_cache_size() const {
  std::lock_guard lock(oov_mutex_);
  return oov_cache_.size();
}

std::uint64_t EmbeddingTable::vocab_hash() const {
  std::uint64_t h = fnv1a64(std::to_string(dim_));
  for (const auto& w : words_) {
    h = fnv1a64(w, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_size(const std::string& s, std::size_t& out) {
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

EmbeddingTable parse_vectors(std::istream& in, std::size_t expected_dim, std::uint64_t oov_seed,
                             VectorLoadStats* stats) {
  VectorLoadStats local;
  VectorLoadStats& st = stats ? *stats : local;
  std::size_t dim = expected_dim;
  std::optional<EmbeddingTable> table;
  if (dim) table.emplace(dim, oov_seed);

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    fields.clear();
    std::istringstream is(line);
    for (std::string f; is >> f;) fields.push_back(f);
    if (fields.empty()) continue;

    std::size_t count = 0;
    std::size_t header_dim = 0;
    if (line_no == 1 && fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], header_dim) &&
        expected_dim != 1) {
      st.had_header = true;
      if (dim && header_dim != dim) {
        throw DimensionError("line 1: header declares dim " + std::to_string(header_dim) + " but " +
                             std::to_string(dim) + " was expected");
      }
      if (!dim) {
        if (header_dim == 0) throw DimensionError("line 1: header declares dim 0");
        dim = header_dim;
        table.emplace(dim, oov_seed);
      }
      continue;
    }

    if (!dim) {
      if (fields.size() < 2) throw DimensionError("line " + std::to_string(line_no) + ": no vector values");
      dim = fields.size() - 1;
      table.emplace(dim, oov_seed);
    }
    if (fields.size() != dim + 1) {
      ++st.skipped;
      st.warnings.push_back("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                            " values, got " + std::to_string(fields.size() - 1) + "; row skipped");
      continue;
    }
    vec.resize(dim);
    bool ok = true;
    for (std::size_t k = 0; k < dim && ok; ++k) ok = parse_double(fields[k + 1], vec[k]);
    if (!ok) {
      ++st.skipped;
      st.warnings.push_back("line " + std::to_string(line_no) + ": unparsable value; row skipped");
      continue;
    }
    if (table->add(fields[0], vec)) ++st.loaded;
  }
  if (!table) throw DimensionError("vector file is empty and no dimension was given");
  return std::move(*table);
}

EmbeddingTable load_vectors(const std::filesystem::path& path, std::size_t expected_dim, std::uint64_t oov_seed,
                            VectorLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  return parse_vectors(in, expected_dim, oov_seed, stats);
}

Tensor embed_sentence(std::span<const std::string> tokens, const DoubleEmbedding& emb) {
  if (tokens.empty()) throw DimensionError("cannot embed an empty sentence");
  const std::size_t dg = emb.general.dim();
  Tensor x = Tensor::matrix(tokens.size(), emb.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto row = x.row(i);
    emb.general.lookup(tokens[i], row.subspan(0, dg));
    emb.domain.lookup(tokens[i], row.subspan(dg));
  }
  return x;
}

}  // namespace doer
