#include "doer/synthetic.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "doer/rng.hpp"

namespace doer {

namespace {

const std::vector<std::vector<std::string>> kTerms = {
    {"screen"},  {"keyboard"}, {"price"},          {"service"},   {"food"},
    {"staff"},   {"design"},   {"battery", "life"}, {"operating", "system"},
    {"hard", "drive"}, {"customer", "service"}};
const std::vector<std::string> kPositive = {"great", "excellent", "amazing", "good", "nice", "fantastic", "superb",
                                            "lovely"};
const std::vector<std::string> kNegative = {"bad", "awful", "terrible", "poor", "horrible", "slow", "broken",
                                            "disappointing"};
const std::vector<std::string> kNeutral = {"okay", "average", "standard", "typical"};
const std::vector<std::string> kLinks = {"is", "was", "seems", "felt"};
const std::vector<std::string> kJoins = {"and", "but", "while", "although"};
const std::vector<std::string> kFillers = {"i", "think", "overall", "honestly", "the", "really", "my",
                                           "friend", "said", "today", "this", "place", "laptop", "here", "we",
                                           "ordered", "bought", "last", "week", "again", "new", "also"};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

void push(Sentence& s, const std::string& tok, AspectTag a, PolarityTag p) {
  s.tokens.push_back(tok);
  s.aspect_tags.push_back(a);
  s.polarity_tags.push_back(p);
}

void push_clause(Sentence& s, Rng& rng) {
  const auto& term = pick(kTerms, rng);
  const std::uint64_t kind = rng.below(5);  // 2/5 positive, 2/5 negative, 1/5 neutral
  PolarityTag pol;
  std::string opinion;
  if (kind < 2) {
    pol = PolarityTag::PO;
    opinion = pick(kPositive, rng);
  } else if (kind < 4) {
    pol = PolarityTag::NG;
    opinion = pick(kNegative, rng);
  } else {
    pol = PolarityTag::NT;
    opinion = pick(kNeutral, rng);
  }
  push(s, "the", AspectTag::O, PolarityTag::O);
  for (std::size_t i = 0; i < term.size(); ++i) push(s, term[i], i == 0 ? AspectTag::B : AspectTag::I, pol);
  push(s, pick(kLinks, rng), AspectTag::O, PolarityTag::O);
  push(s, opinion, AspectTag::O, PolarityTag::O);
}

Lexicon synthetic_lexicon() {
  std::ostringstream os;
  for (const auto& w : kPositive) os << w << "\tpositive\n";
  for (const auto& w : kNegative) os << w << "\tnegative\n";
  std::istringstream is(os.str());
  return parse_lexicon(is);
}

std::vector<std::string> collect_vocabulary(const std::vector<Sentence>& sentences) {
  std::set<std::string> seen;
  std::vector<std::string> vocab;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens)
      if (seen.insert(t).second) vocab.push_back(t);
  return vocab;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng = Rng(seed).split("synthetic-corpus");
  SyntheticCorpus c;
  for (std::size_t k = 0; k < count; ++k) {
    Sentence s;
    const std::uint64_t prefix = rng.below(3);
    for (std::uint64_t i = 0; i < prefix; ++i) push(s, pick(kFillers, rng), AspectTag::O, PolarityTag::O);
    push_clause(s, rng);
    if (rng.below(2) == 1) {
      push(s, pick(kJoins, rng), AspectTag::O, PolarityTag::O);
      push_clause(s, rng);
    }
    c.sentences.push_back(std::move(s));
  }
  c.lexicon = synthetic_lexicon();
  std::vector<std::string> all;
  for (const auto& t : kTerms) all.insert(all.end(), t.begin(), t.end());
  for (const auto* list : {&kPositive, &kNegative, &kNeutral, &kLinks, &kJoins, &kFillers})
    all.insert(all.end(), list->begin(), list->end());
  std::set<std::string> seen;
  for (const auto& w : all)
    if (seen.insert(w).second) c.vocabulary.push_back(w);
  return c;
}

SyntheticCorpus toy_batch() {
  SyntheticCorpus c;
  Sentence a;
  push(a, "the", AspectTag::O, PolarityTag::O);
  push(a, "screen", AspectTag::B, PolarityTag::PO);
  push(a, "is", AspectTag::O, PolarityTag::O);
  push(a, "great", AspectTag::O, PolarityTag::O);
  Sentence b;
  push(b, "battery", AspectTag::B, PolarityTag::NG);
  push(b, "life", AspectTag::I, PolarityTag::NG);
  push(b, "was", AspectTag::O, PolarityTag::O);
  push(b, "bad", AspectTag::O, PolarityTag::O);
  push(b, "but", AspectTag::O, PolarityTag::O);
  push(b, "keyboard", AspectTag::B, PolarityTag::PO);
  push(b, "feels", AspectTag::O, PolarityTag::O);
  push(b, "nice", AspectTag::O, PolarityTag::O);
  c.sentences = {a, b};
  std::istringstream lex("great\tpositive\nnice\tpositive\nbad\tnegative\n");
  c.lexicon = parse_lexicon(lex);
  c.vocabulary = collect_vocabulary(c.sentences);
  return c;
}

DoubleEmbedding random_embedding(const std::vector<std::string>& vocabulary, std::size_t general_dim,
                                 std::size_t domain_dim, std::uint64_t seed) {
  const Rng root(seed);
  return {EmbeddingTable::random(vocabulary, general_dim, root.split("general").next_u64()),
          EmbeddingTable::random(vocabulary, domain_dim, root.split("domain").next_u64())};
}

}  // namespace doer
