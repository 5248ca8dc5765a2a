#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csent/preprocess.hpp"
#include "csent/random.hpp"

// Code-switched word embeddings: CBOW with negative sampling, neighbour
// queries, word2vec text format.
namespace csent::embeddings {

using WordIndex = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Words must be unique; counts are kept parallel to words.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts, std::uint64_t min_count);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordIndex i) const { return words_[i]; }
  std::uint64_t count(WordIndex i) const { return counts_[i]; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t min_count() const { return min_count_; }
  std::uint64_t total_count() const;

  bool contains(const std::string& word) const { return index_.contains(word); }
  /// Throws LookupError for unknown words.
  WordIndex index(const std::string& word) const;
  /// -1 when absent.
  std::int64_t find(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordIndex> index_;
  std::uint64_t min_count_ = 0;
};

/// Words with frequency >= min_count, most frequent first, ties broken by
/// byte-wise lexicographic order. Throws DataError if nothing survives.
Vocabulary build_vocabulary(const std::vector<preprocess::ProcessedDocument>& corpus, std::uint64_t min_count);

/// Unigram^power sampler built with Walker's alias method, so every word
/// keeps its exact probability regardless of vocabulary size.
class NegativeTable {
 public:
  static constexpr double kDefaultPower = 0.75;

  explicit NegativeTable(const Vocabulary& vocab, double power = kDefaultPower);

  WordIndex sample(Rng& rng) const;
  double probability(WordIndex i) const { return probability_[i]; }
  std::size_t size() const { return probability_.size(); }

 private:
  std::vector<double> probability_;
  std::vector<double> accept_;
  std::vector<WordIndex> alias_;
};

/// Row-major |V| x dim matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EmbeddingMatrix {
  Vocabulary vocab;
  Matrix input_vectors;   // the published embeddings
  Matrix output_vectors;  // negative-sampling context weights (training state)

  std::size_t dim() const { return input_vectors.cols(); }
  std::span<const double> vector(const std::string& word) const { return input_vectors.row(vocab.index(word)); }
};

struct CbowConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t epochs = 20;
  std::size_t workers = 10;
  std::size_t negatives = 5;
  std::uint64_t min_count = 5;
  double initial_lr = 0.025;
  bool subsample = false;
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 1;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

// --- single CBOW update -----------------------------------------------------

inline constexpr double kSigmoidClamp = 30.0;

/// Negative-sampling loss for predicting `center` from the mean of the
/// context input vectors. Does not modify the model.
double cbow_loss(const EmbeddingMatrix& model, WordIndex center, std::span<const WordIndex> context,
                 std::span<const WordIndex> negatives);

/// Analytic gradient of cbow_loss. Rows are listed once each, in first-seen
/// order (context rows for input vectors; center then negatives for output
/// vectors), with the gradient for repeated indices summed.
struct CbowGradient {
  double loss = 0.0;
  std::vector<WordIndex> input_rows;
  std::vector<std::vector<double>> input_grads;
  std::vector<WordIndex> output_rows;
  std::vector<std::vector<double>> output_grads;
};

CbowGradient cbow_gradient(const EmbeddingMatrix& model, WordIndex center,
                           std::span<const WordIndex> context, std::span<const WordIndex> negatives);

/// One SGD step at rate lr; returns the loss before the update. Output
/// vectors are updated with the pre-update hidden state and the context rows
/// receive 1/|context| of the hidden-state gradient each.
/// Preconditions: context non-empty, center not among the negatives.
double cbow_step(EmbeddingMatrix& model, WordIndex center, std::span<const WordIndex> context,
                 std::span<const WordIndex> negatives, double lr);

// --- training ---------------------------------------------------------------

struct TrainingLog {
  std::vector<double> epoch_mean_loss;
  std::uint64_t updates = 0;
};

/// Initial weights: input uniform in [-0.5/dim, 0.5/dim] from `seed`,
/// output all zero.
EmbeddingMatrix initialize_model(Vocabulary vocab, std::size_t dim, std::uint64_t seed);

/// Trains on the corpus. With workers == 1 the result is bit-identical for a
/// given seed; with more workers the shared matrices are updated without
/// locks.
EmbeddingMatrix train_cbow(const std::vector<preprocess::ProcessedDocument>& corpus,
                           const CbowConfig& config, TrainingLog* log = nullptr);

// --- queries ----------------------------------------------------------------

/// a.b / (|a||b|), clamped to [-1, 1]. Throws DomainError for zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::string word;
  double score;
};

/// k most cosine-similar words by input vector, excluding the query itself;
/// equal scores ordered by vocabulary index. Zero-norm rows score 0.
std::vector<Neighbor> top_k_neighbors(const EmbeddingMatrix& model, const std::string& word, std::size_t k);

// --- word2vec text format ---------------------------------------------------

void write_text(const EmbeddingMatrix& model, std::ostream& out);
void save_text(const EmbeddingMatrix& model, const std::filesystem::path& path);
EmbeddingMatrix read_text(std::istream& in, const std::string& source);
EmbeddingMatrix load_text(const std::filesystem::path& path);

}  // namespace csent::embeddings
