#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "doer/model.hpp"
#include "doer/train.hpp"

namespace doer::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kNumericError = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a subcommand may read. Keys in the JSON config file use the
/// member names below.
struct RunConfig {
  std::string train_path;
  std::string dev_path;
  std::string test_path;  // input of predict / eval / attention
  std::string general_embeddings;
  std::string domain_embeddings;
  std::string lexicon_path;
  std::string checkpoint_path;
  std::string output_path;
  std::string log_path;
  std::string predictions_path;  // eval: score this pair file instead of running the model

  ModelConfig model;
  TrainConfig train;
  int threads = 0;  // 0 = OpenMP default

  double gradcheck_eps = 1e-5;
  std::string gradcheck_corrupt;

  std::set<std::string> explicit_keys;  // keys set by the file or the command line
};

/// Applies one key. Throws ConfigError for unknown keys or bad values.
void set_key(RunConfig& cfg, const std::string& key, const nlohmann::json& value);

/// File keys first, then `--set` overrides in order.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

void validate(const RunConfig& cfg);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doer::cli
