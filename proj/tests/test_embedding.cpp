#include <sstream>

#include "doctest.h"
#include "doer/embedding.hpp"
#include "helpers.hpp"

using namespace doer;

namespace {

EmbeddingTable vectors(const std::string& text, std::size_t dim, VectorLoadStats* stats = nullptr) {
  std::istringstream in(text);
  return parse_vectors(in, dim, 17, stats);
}

}  // namespace

TEST_CASE("vector files") {
  const EmbeddingTable t = vectors("cat 1 2 3\ndog 4 5 6\n", 3);
  CHECK(t.vocab_size() == 2);
  CHECK(t.dim() == 3);

  VectorLoadStats stats;
  const EmbeddingTable h = vectors("2 3\ncat 1 2 3\ndog 4 5 6\n", 3, &stats);
  CHECK(h.vocab_size() == 2);
  CHECK(stats.had_header);
  CHECK(h.vocab_hash() == t.vocab_hash());

  VectorLoadStats skip;
  const EmbeddingTable s = vectors("cat 1 2 3\nbad 1 2\ndog 4 5 6\nnan x y z\n", 3, &skip);
  CHECK(s.vocab_size() == 2);
  CHECK(skip.skipped == 2);
  CHECK(skip.warnings.size() == 2);

  CHECK(vectors("cat 1 2\n", 0).dim() == 2);  // inferred
  CHECK_THROWS_AS(vectors("2 4\ncat 1 2 3 4\n", 3), DimensionError);
}

TEST_CASE("double embedding concatenation") {
  DoubleEmbedding emb{vectors("w 1 2\n", 2), vectors("w 9\n", 1)};
  const std::vector<std::string> toks = {"w"};
  const Tensor x = embed_sentence(toks, emb);
  CHECK(x == Tensor::from_rows({{1, 2, 9}}));

  const std::vector<std::string> three = {"w", "unknown", "unknown"};
  const Tensor y = embed_sentence(three, emb);
  CHECK(y.rows() == 3);
  CHECK(y.cols() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(y(1, j) == y(2, j));
  CHECK_THROWS(embed_sentence(std::vector<std::string>{}, emb));
}

TEST_CASE("oov vectors") {
  EmbeddingTable a(4, 99), b(4, 99);
  std::vector<double> x(4), y(4), z(4);
  a.lookup("zebra", x);
  a.lookup("apple", y);
  b.lookup("apple", z);  // other order, same vector
  CHECK(y == z);
  b.lookup("zebra", z);
  CHECK(x == z);
  CHECK(a.oov_cache_size() == 2);
  for (double v : x) CHECK(std::abs(v) <= 0.25 / 2.0);

  EmbeddingTable other(4, 100);
  other.lookup("zebra", z);
  CHECK(x != z);
}

TEST_CASE("case fallback and frozen rows") {
  const EmbeddingTable t = vectors("Apple 1 1\napple 2 2\nbanana 3 3\n", 2);
  std::vector<double> v(2);
  t.lookup("Apple", v);
  CHECK(v[0] == 1.0);
  t.lookup("BANANA", v);  // lowercase fallback
  CHECK(v[0] == 3.0);
  CHECK(t.oov_cache_size() == 0);
}
