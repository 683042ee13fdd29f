#pragma once

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doer/rng.hpp"
#include "doer/tensor.hpp"
#include "oracles.hpp"

namespace testing {

inline oracle::Mat to_mat(const doer::Tensor& t) {
  oracle::Mat m(t.rows(), oracle::Vec(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  return m;
}

inline oracle::Vec to_vec(const doer::Tensor& t) { return {t.values().begin(), t.values().end()}; }

inline void fill_uniform(doer::Tensor& t, doer::Rng& rng, double lo, double hi) {
  for (double& v : t.values()) v = rng.uniform(lo, hi);
}

inline doer::Tensor random_matrix(std::size_t r, std::size_t c, doer::Rng& rng, double scale = 1.0) {
  doer::Tensor t = doer::Tensor::matrix(r, c);
  fill_uniform(t, rng, -scale, scale);
  return t;
}

inline bool bitwise_equal(const doer::Tensor& a, const doer::Tensor& b) {
  return a.shape() == b.shape() &&
         (a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("doer-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
