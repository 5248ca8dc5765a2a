#pragma once

// Independent checks shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csent/classifier.hpp"
#include "csent/embeddings.hpp"

namespace csent::testing {

std::filesystem::path data_path(const std::string& relative);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// gradient is zero from dividing round-off by round-off.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // which entry produced the maximum
};

/// dim-10, 8-word model with random input and output vectors; compares
/// cbow_gradient against central differences of cbow_loss.
GradCheck cbow_gradient_check(std::uint64_t seed, double eps = 1e-5);

/// Same model, but the analytic gradient is read back from the parameter
/// change made by one cbow_step: grad = (before - after) / lr.
GradCheck cbow_step_check(std::uint64_t seed, double eps = 1e-5);

/// 3 bidirectional layers, hidden 4, embedding dim 8, sequence length 5,
/// batch 2 (one row with leading PAD and an UNK), dropout off.
GradCheck bilstm_gradient_check(std::uint64_t seed, double eps = 1e-5);

/// Largest |empirical - count^0.75 / sum| over the vocabulary.
double negative_sampling_deviation(const std::vector<std::uint64_t>& counts, std::size_t draws, std::uint64_t seed);

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs the CLI in-process.
CliResult run_cli(const std::vector<std::string>& args);

/// Trains a BiLSTM on `train_tsv` with the settings in `config_file` and
/// returns the training-set accuracy of the returned model.
struct OverfitResult {
  double accuracy = 0.0;
  int epochs = 0;
  std::size_t vocabulary = 0;
};
OverfitResult overfit(const std::filesystem::path& train_tsv, const std::filesystem::path& config_file);

}  // namespace csent::testing
