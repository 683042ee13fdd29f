#include "doer/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "doer/decode.hpp"

namespace doer {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  if (line.find('\t') != std::string::npos) {
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, '\t')) {
      // Trim stray spaces around tab-separated fields.
      const auto b = field.find_first_not_of(' ');
      const auto e = field.find_last_not_of(' ');
      fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return fields;
  }
  std::istringstream is(line);
  std::string field;
  while (is >> field) fields.push_back(field);
  return fields;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(AspectTag t) { return kAspectTagNames[index_of(t)]; }
std::string_view to_string(PolarityTag t) { return kPolarityTagNames[index_of(t)]; }

std::optional<AspectTag> parse_aspect_tag(std::string_view s) {
  for (std::size_t i = 0; i < kAspectTagNames.size(); ++i) {
    if (kAspectTagNames[i] == s) return static_cast<AspectTag>(i);
  }
  return std::nullopt;
}

std::optional<PolarityTag> parse_polarity_tag(std::string_view s) {
  for (std::size_t i = 0; i < kPolarityTagNames.size(); ++i) {
    if (kPolarityTagNames[i] == s) return static_cast<PolarityTag>(i);
  }
  return std::nullopt;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

// Empty when token i is consistent with its predecessors.
std::string check_token(const Sentence& s, std::size_t i) {
  const AspectTag a = s.aspect_tags[i];
  const PolarityTag p = s.polarity_tags[i];
  if (a == AspectTag::I && (i == 0 || s.aspect_tags[i - 1] == AspectTag::O)) {
    return "aspect tag I must follow B or I";
  }
  if (a == AspectTag::O && p != PolarityTag::O) return "polarity tag must be O outside an aspect term";
  if (a != AspectTag::O && p == PolarityTag::O) return "aspect term token needs a polarity in {PO,NT,NG,CF}";
  return {};
}

}  // namespace

std::string check_sentence(const Sentence& s) {
  if (s.tokens.empty()) return "sentence has no tokens";
  if (!s.labeled() && s.polarity_tags.empty()) return {};
  if (s.aspect_tags.size() != s.size() || s.polarity_tags.size() != s.size()) {
    return "tag sequences do not match the token count";
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (auto msg = check_token(s, i); !msg.empty()) return "token " + std::to_string(i) + ": " + msg;
  }
  return {};
}

std::vector<Sentence> parse_corpus(std::istream& in) {
  std::vector<Sentence> out;
  Sentence current;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  std::string line;

  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(std::move(current));
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    const auto fields = split_fields(line);
    if (columns == 0) {
      if (fields.size() != 1 && fields.size() != 3) {
        throw ParseError("expected 1 or 3 columns, got " + std::to_string(fields.size()), line_no);
      }
      columns = fields.size();
    } else if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()),
                       line_no);
    }
    if (fields[0].empty()) throw ParseError("empty token", line_no);

    current.tokens.push_back(fields[0]);
    if (columns == 3) {
      const auto a = parse_aspect_tag(fields[1]);
      if (!a) throw ParseError("unknown aspect tag '" + fields[1] + "'", line_no);
      const auto p = parse_polarity_tag(fields[2]);
      if (!p) throw ParseError("unknown polarity tag '" + fields[2] + "'", line_no);
      current.aspect_tags.push_back(*a);
      current.polarity_tags.push_back(*p);
      if (auto msg = check_token(current, current.size() - 1); !msg.empty()) throw ParseError(msg, line_no);
    }
  }
  flush();
  return out;
}

std::vector<Sentence> read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  try {
    return parse_corpus(in);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

void write_corpus(std::ostream& out, std::span<const Sentence> sentences) {
  for (const Sentence& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i];
      if (s.labeled()) out << '\t' << to_string(s.aspect_tags[i]) << '\t' << to_string(s.polarity_tags[i]);
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<AspectPair> extract_gold_pairs(const Sentence& s) {
  if (!s.labeled()) return {};
  return assemble_pairs(s.tokens, s.aspect_tags, s.polarity_tags);
}

std::size_t Lexicon::positive_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& kv) {
    return kv.second == SentimentLabel::kPositive;
  }));
}

std::size_t Lexicon::negative_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& kv) {
    return kv.second == SentimentLabel::kNegative;
  }));
}

Lexicon parse_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw ParseError("expected 'word<TAB>label'", line_no);
    const std::string label = to_lower(fields[1]);
    SentimentLabel value;
    if (label == "positive") {
      value = SentimentLabel::kPositive;
    } else if (label == "negative") {
      value = SentimentLabel::kNegative;
    } else {
      throw ParseError("unknown lexicon label '" + fields[1] + "'", line_no);
    }
    const std::string word = to_lower(fields[0]);
    auto [it, inserted] = lex.entries.try_emplace(word, value);
    if (!inserted) {
      lex.warnings.push_back("line " + std::to_string(line_no) + ": duplicate lexicon entry '" + word +
                             "', keeping the later label");
      it->second = value;
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file " + path.string());
  return parse_lexicon(in);
}

std::vector<SentimentLabel> sentiment_targets(const Sentence& s, const Lexicon& lex) {
  std::vector<SentimentLabel> out;
  out.reserve(s.size());
  for (const auto& tok : s.tokens) {
    auto it = lex.entries.find(to_lower(tok));
    out.push_back(it == lex.entries.end() ? SentimentLabel::kNone : it->second);
  }
  return out;
}

double mean_aspect_length(const Sentence& s) {
  if (!s.labeled()) return 0.0;
  std::size_t terms = 0;
  std::size_t tokens = 0;
  for (AspectTag t : s.aspect_tags) {
    if (t == AspectTag::B) ++terms;
    if (t != AspectTag::O) ++tokens;
  }
  return terms == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(terms);
}

double length_target(const Sentence& s, double norm) {
  if (!(norm > 0)) throw std::invalid_argument("length_target: norm must be positive");
  return std::clamp(mean_aspect_length(s) / norm, 0.0, 1.0);
}

double compute_length_norm(std::span<const Sentence> train) {
  if (train.empty()) throw std::invalid_argument("compute_length_norm: empty training set");
  double best = 0.0;
  for (const Sentence& s : train) best = std::max(best, mean_aspect_length(s));
  return best > 0.0 ? best : 1.0;
}

}  // namespace doer
