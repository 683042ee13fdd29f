#include <sstream>

#include "doctest.h"
#include "doer/corpus.hpp"
#include "doer/decode.hpp"
#include "doer/synthetic.hpp"

using namespace doer;
using doctest::Approx;

namespace {

std::vector<Sentence> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

Lexicon lexicon(const std::string& text) {
  std::istringstream in(text);
  return parse_lexicon(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("labeling example with a two-token term") {
  const auto s = parse("I O O\nlove O O\nthe O O\noperating B PO\nsystem I PO");
  REQUIRE(s.size() == 1);
  CHECK(s[0].tokens == std::vector<std::string>{"I", "love", "the", "operating", "system"});
  using A = AspectTag;
  using P = PolarityTag;
  CHECK(s[0].aspect_tags == std::vector<A>{A::O, A::O, A::O, A::B, A::I});
  CHECK(s[0].polarity_tags == std::vector<P>{P::O, P::O, P::O, P::PO, P::PO});

  const auto pairs = extract_gold_pairs(s[0]);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].start == 3);
  CHECK(pairs[0].end == 4);
  CHECK(pairs[0].term == "operating system");
  CHECK(pairs[0].polarity == P::PO);
}

TEST_CASE("corpus parsing edge cases") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n# only a comment\n").empty());

  const auto two = parse("a\tO\tO\nb\tB\tNG\n\n\nc\tB\tNT\n");
  REQUIRE(two.size() == 2);
  CHECK(two[1].tokens == std::vector<std::string>{"c"});

  const auto unlabeled = parse("hello\nworld\n\nagain\n");
  REQUIRE(unlabeled.size() == 2);
  CHECK_FALSE(unlabeled[0].labeled());

  CHECK(error_line("I O O\nsystem I") == 2);
  CHECK(error_line("x Q O") == 1);       // unknown aspect tag
  CHECK(error_line("x B XX") == 1);      // unknown polarity tag
  CHECK(error_line("a O O\nb I PO") == 2);  // I after O
  CHECK(error_line("b I PO") == 1);      // sentence-initial I
  CHECK(error_line("b B O") == 1);       // aspect token without polarity
  CHECK(error_line("b O PO") == 1);      // polarity outside an aspect
  CHECK(error_line("a O O\n\nb I PO") == 3);  // BIO restarts per sentence
}

TEST_CASE("parse and write round trip") {
  const std::string text = "the\tO\tO\nbattery\tB\tNG\nlife\tI\tNG\n\ngood\tO\tO\nfood\tB\tPO\n";
  const auto s = parse(text);
  std::ostringstream out;
  write_corpus(out, s);
  CHECK(parse(out.str())[1].tokens == s[1].tokens);
  CHECK(out.str() == text + "\n");  // every block ends with a blank line
}

TEST_CASE("gold pair extraction") {
  using A = AspectTag;
  using P = PolarityTag;
  Sentence s;
  s.tokens = {"a", "b", "c"};
  s.aspect_tags = {A::O, A::O, A::O};
  s.polarity_tags = {P::O, P::O, P::O};
  CHECK(extract_gold_pairs(s).empty());

  s.aspect_tags = {A::B, A::O, A::B};
  s.polarity_tags = {P::NG, P::O, P::NT};
  const auto pairs = extract_gold_pairs(s);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == AspectPair{0, 0, "a", P::NG});
  CHECK(pairs[1] == AspectPair{2, 2, "c", P::NT});

  // adjacent terms split at B
  s.aspect_tags = {A::B, A::B, A::I};
  s.polarity_tags = {P::PO, P::NG, P::NG};
  CHECK(extract_gold_pairs(s).size() == 2);

  // extraction and the decoder agree on every synthetic sentence
  for (const auto& sent : make_synthetic_corpus(40, 3).sentences) {
    CHECK(extract_gold_pairs(sent) == assemble_pairs(sent.tokens, sent.aspect_tags, sent.polarity_tags));
  }
}

TEST_CASE("lexicon") {
  const Lexicon l = lexicon("love positive\nbad negative");
  CHECK(l.positive_count() == 1);
  CHECK(l.negative_count() == 1);

  const Lexicon dup = lexicon("love\tpositive\nlove\tnegative\n");
  REQUIRE(dup.entries.size() == 1);
  CHECK(dup.entries.at("love") == SentimentLabel::kNegative);
  CHECK(dup.warnings.size() == 1);

  CHECK(lexicon("").entries.empty());
  CHECK_THROWS_AS(lexicon("love great\n"), ParseError);
  CHECK(lexicon("Love positive\n").entries.count("love") == 1);
}

TEST_CASE("sentiment targets") {
  using L = SentimentLabel;
  Sentence s;
  s.tokens = {"I", "love", "the", "OS"};
  CHECK(sentiment_targets(s, lexicon("love positive")) == std::vector<L>{L::kNone, L::kPositive, L::kNone, L::kNone});
  CHECK(sentiment_targets(s, Lexicon{}) == std::vector<L>(4, L::kNone));
  s.tokens = {"bad", "BAD"};
  CHECK(sentiment_targets(s, lexicon("bad negative")) == std::vector<L>{L::kNegative, L::kNegative});
}

TEST_CASE("length targets and normalisation") {
  const auto s = parse(
      "the O O\nbattery B PO\nlife I PO\nand O O\nhard B NG\ndrive I NG\n\n"
      "no O O\nterms O O\n\n"
      "a B NT\nb I NT\nc I NT\n\n"
      "x B PO\ny O O\nz B PO\nw I PO\n");
  CHECK(length_target(s[0], 4.0) == 0.5);
  CHECK(length_target(s[1], 4.0) == 0.0);
  CHECK(length_target(s[2], 3.0) == 1.0);
  CHECK(length_target(s[2], 2.0) == 1.0);  // clamped
  CHECK_THROWS(length_target(s[0], 0.0));
  CHECK(mean_aspect_length(s[3]) == 1.5);

  const std::vector<Sentence> mixed = {s[0], s[3], s[2]};  // averages 2, 1.5, 3
  CHECK(compute_length_norm(mixed) == 3.0);
  CHECK(compute_length_norm(std::vector<Sentence>{s[1]}) == 1.0);
  CHECK(compute_length_norm(parse("a B PO\nb I PO\n")) == 2.0);
  CHECK_THROWS(compute_length_norm(std::vector<Sentence>{}));

  for (const auto& sent : make_synthetic_corpus(30, 4).sentences) {
    const double t = length_target(sent, 1.5);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
}
