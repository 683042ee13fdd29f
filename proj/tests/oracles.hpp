#pragma once

// Naive reference implementations used as test oracles. Nothing here calls
// the library's own numerics; inputs are plain nested vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Path = std::vector<std::size_t>;

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), Vec(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Chain {
  Mat trans;  // [from][to]
  Vec start, stop;
};

inline double path_score(const Mat& em, const Chain& c, const Path& y) {
  double s = c.start[y[0]] + c.stop[y.back()];
  for (std::size_t t = 0; t < y.size(); ++t) s += em[t][y[t]];
  for (std::size_t t = 1; t < y.size(); ++t) s += c.trans[y[t - 1]][y[t]];
  return s;
}

// Calls f(path) for every tag sequence of length n over `tags` labels.
template <typename F>
void for_each_path(std::size_t n, std::size_t tags, F&& f) {
  Path y(n, 0);
  while (true) {
    f(y);
    std::size_t t = 0;
    while (t < n && ++y[t] == tags) y[t++] = 0;
    if (t == n) return;
  }
}

inline double brute_log_z(const Mat& em, const Chain& c) {
  Vec scores;
  for_each_path(em.size(), c.start.size(), [&](const Path& y) { scores.push_back(path_score(em, c, y)); });
  const double m = *std::max_element(scores.begin(), scores.end());
  double s = 0.0;
  for (double v : scores) s += std::exp(v - m);
  return m + std::log(s);
}

// Exhaustive argmax. Among equal scores the path that is smaller when read
// from the last position backwards wins, which is what lowest-index
// tie-breaking in a forward max-product pass followed by backtracking gives.
inline Path brute_viterbi(const Mat& em, const Chain& c) {
  Path best;
  double best_score = -std::numeric_limits<double>::infinity();
  for_each_path(em.size(), c.start.size(), [&](const Path& y) {
    const double s = path_score(em, c, y);
    const bool better = s > best_score ||
                        (s == best_score && std::lexicographical_compare(y.rbegin(), y.rend(), best.rbegin(),
                                                                         best.rend()));
    if (better) {
      best = y;
      best_score = s;
    }
  });
  return best;
}

struct Cell {
  Mat W_i, W_f, W_o, U_f, U_o, W_x;  // W_x empty when input and hidden widths agree
  Vec b_i, b_f, b_o;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Step {
  Vec c, h;
};

inline Step regu_step(const Vec& x, const Vec& c_prev, const Cell& w) {
  const std::size_t d = c_prev.size();
  Step s{Vec(d), Vec(d)};
  for (std::size_t j = 0; j < d; ++j) {
    const double f = logistic(dot(w.W_f[j], x) + dot(w.U_f[j], c_prev) + w.b_f[j]);
    const double o = logistic(dot(w.W_o[j], x) + dot(w.U_o[j], c_prev) + w.b_o[j]);
    s.c[j] = (1.0 - f) * c_prev[j] + f * std::tanh(dot(w.W_i[j], x) + w.b_i[j]);
    const double skip = w.W_x.empty() ? x[j] : std::tanh(dot(w.W_x[j], x));
    s.h[j] = (1.0 - o) * s.c[j] + o * skip;
  }
  return s;
}

// S[i][j] = sum_k v[k] tanh(h_self_i^T G[k] h_other_j)
inline Mat attention_scores(const Mat& h_self, const Mat& h_other, const std::vector<Mat>& G, const Vec& v) {
  Mat s(h_self.size(), Vec(h_other.size(), 0.0));
  for (std::size_t i = 0; i < h_self.size(); ++i)
    for (std::size_t j = 0; j < h_other.size(); ++j)
      for (std::size_t k = 0; k < G.size(); ++k) {
        double b = 0.0;
        for (std::size_t p = 0; p < h_self[i].size(); ++p)
          for (std::size_t q = 0; q < h_other[j].size(); ++q) b += h_self[i][p] * G[k][p][q] * h_other[j][q];
        s[i][j] += v[k] * std::tanh(b);
      }
  return s;
}

inline Mat softmax_rows(Mat m) {
  for (auto& row : m) {
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& x : row) z += (x = std::exp(x - mx));
    for (double& x : row) x /= z;
  }
  return m;
}

}  // namespace oracle
