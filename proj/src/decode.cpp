#include "doer/decode.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "doer/corpus.hpp"

namespace doer {

std::vector<AspectTag> repair_aspect_tags(std::span<const AspectTag> tags) {
  std::vector<AspectTag> out(tags.begin(), tags.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == AspectTag::I && (i == 0 || out[i - 1] == AspectTag::O)) out[i] = AspectTag::B;
  }
  return out;
}

namespace {

PolarityTag vote(std::span<const PolarityTag> labels, AssembleStats* stats) {
  std::array<std::size_t, kNumPolarityTags> counts{};
  for (PolarityTag p : labels) ++counts[index_of(p)];
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumPolarityTags; ++k) best = std::max(best, counts[k]);
  if (best == 0) {
    if (stats) ++stats->polarity_fallbacks;
    return PolarityTag::NT;
  }
  for (PolarityTag p : labels) {
    if (p != PolarityTag::O && counts[index_of(p)] == best) return p;
  }
  return PolarityTag::NT;  // unreachable
}

}  // namespace

std::vector<AspectPair> assemble_pairs(std::span<const std::string> tokens, std::span<const AspectTag> aspect_tags,
                                       std::span<const PolarityTag> polarity_tags, AssembleStats* stats) {
  if (aspect_tags.size() != tokens.size() || polarity_tags.size() != tokens.size()) {
    throw std::invalid_argument("assemble_pairs: tag sequences do not match the token count");
  }
  std::vector<AspectPair> pairs;
  std::size_t i = 0;
  const std::size_t n = tokens.size();
  while (i < n) {
    if (aspect_tags[i] == AspectTag::O) {
      ++i;
      continue;
    }
    // A stray I (unrepaired input) starts a span like B does.
    std::size_t j = i + 1;
    while (j < n && aspect_tags[j] == AspectTag::I) ++j;
    AspectPair pair;
    pair.start = i;
    pair.end = j - 1;
    for (std::size_t t = i; t < j; ++t) {
      if (t > i) pair.term += ' ';
      pair.term += tokens[t];
    }
    pair.polarity = vote(polarity_tags.subspan(i, j - i), stats);
    pairs.push_back(std::move(pair));
    i = j;
  }
  return pairs;
}

double EvalCounts::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(predicted);
}

double EvalCounts::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(gold);
}

double EvalCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

EvalReport pair_f1(std::span<const std::vector<AspectPair>> gold, std::span<const std::vector<AspectPair>> pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("pair_f1: " + std::to_string(gold.size()) + " gold sentences but " +
                                std::to_string(pred.size()) + " predicted");
  }
  EvalReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    r.pairs.gold += gold[s].size();
    r.spans.gold += gold[s].size();
    r.pairs.predicted += pred[s].size();
    r.spans.predicted += pred[s].size();
    std::vector<bool> pair_used(gold[s].size(), false);
    std::vector<bool> span_used(gold[s].size(), false);
    for (const AspectPair& p : pred[s]) {
      for (std::size_t g = 0; g < gold[s].size(); ++g) {
        const AspectPair& q = gold[s][g];
        if (span_used[g] || q.start != p.start || q.end != p.end) continue;
        span_used[g] = true;
        ++r.spans.true_positives;
        if (!pair_used[g] && q.polarity == p.polarity) {
          pair_used[g] = true;
          ++r.pairs.true_positives;
        }
        break;
      }
    }
  }
  return r;
}

void write_pairs(std::ostream& out, std::span<const std::vector<AspectPair>> pairs) {
  for (const auto& sentence : pairs) {
    for (const AspectPair& p : sentence) {
      out << p.start << '\t' << p.end << '\t' << p.term << '\t' << to_string(p.polarity) << '\n';
    }
    out << '\n';
  }
}

std::vector<std::vector<AspectPair>> read_pairs(std::istream& in) {
  std::vector<std::vector<AspectPair>> out;
  std::vector<AspectPair> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      out.push_back(std::move(current));
      current.clear();
      continue;
    }
    std::istringstream is(line);
    std::string start, end, term, pol;
    if (!std::getline(is, start, '\t') || !std::getline(is, end, '\t') || !std::getline(is, term, '\t') ||
        !std::getline(is, pol)) {
      throw ParseError("expected 'start<TAB>end<TAB>term<TAB>polarity'", line_no);
    }
    AspectPair p;
    try {
      p.start = std::stoul(start);
      p.end = std::stoul(end);
    } catch (const std::exception&) {
      throw ParseError("span indices must be integers", line_no);
    }
    const auto tag = parse_polarity_tag(pol);
    if (!tag || *tag == PolarityTag::O) throw ParseError("bad polarity '" + pol + "'", line_no);
    if (p.end < p.start) throw ParseError("span end precedes start", line_no);
    p.term = term;
    p.polarity = *tag;
    current.push_back(std::move(p));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

namespace {

nlohmann::json counts_json(const EvalCounts& c) {
  return {{"true_positives", c.true_positives}, {"predicted", c.predicted}, {"gold", c.gold},
          {"precision", c.precision()},         {"recall", c.recall()},       {"f1", c.f1()}};
}

}  // namespace

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j{{"pairs", counts_json(report.pairs)}, {"ate", counts_json(report.spans)}};
  return j.dump();
}

}  // namespace doer
