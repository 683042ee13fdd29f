#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "doer/tags.hpp"

namespace doer {

/// Malformed corpus or lexicon input. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, const std::string& file = {})
      : std::runtime_error((file.empty() ? "" : file + ": ") + (line ? "line " + std::to_string(line) + ": " : "") +
                           message),
        line_(line),
        message_(message) {}
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<AspectTag> aspect_tags;      // empty when unlabeled
  std::vector<PolarityTag> polarity_tags;  // empty when unlabeled

  std::size_t size() const { return tokens.size(); }
  bool labeled() const { return !aspect_tags.empty(); }
};

/// Empty string when the sentence satisfies the gold-data invariants,
/// otherwise a description of the first violation.
std::string check_sentence(const Sentence& s);

/// Reads one token per line ("token aspect polarity", tab or space
/// separated, or a bare token for unlabeled input). Blank lines end
/// sentences and lines starting with '#' are skipped. The first data row
/// fixes the column count for the whole stream.
std::vector<Sentence> parse_corpus(std::istream& in);
std::vector<Sentence> read_corpus_file(const std::filesystem::path& path);

/// Writes the tab-separated form that `parse_corpus` reads.
void write_corpus(std::ostream& out, std::span<const Sentence> sentences);

/// Gold pairs of a labeled sentence, voted with the decoder's rule.
std::vector<AspectPair> extract_gold_pairs(const Sentence& s);

struct Lexicon {
  std::unordered_map<std::string, SentimentLabel> entries;
  std::vector<std::string> warnings;

  std::size_t positive_count() const;
  std::size_t negative_count() const;
};

Lexicon parse_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);

/// Per-token lexicon label on the lowercased token.
std::vector<SentimentLabel> sentiment_targets(const Sentence& s, const Lexicon& lex);

/// Mean token length of the sentence's gold aspect terms, 0 if none.
double mean_aspect_length(const Sentence& s);

/// mean_aspect_length / norm, clamped to [0, 1].
double length_target(const Sentence& s, double norm);

/// Max over sentences of the per-sentence mean aspect length; 1 when no
/// sentence has an aspect term.
double compute_length_norm(std::span<const Sentence> train);

std::string to_lower(std::string_view s);

}  // namespace doer
