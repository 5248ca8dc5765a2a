#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csent/config.hpp"
#include "csent/embeddings.hpp"
#include "csent/labels.hpp"
#include "csent/lstm.hpp"
#include "csent/preprocess.hpp"
#include "csent/random.hpp"

// Three-class BiLSTM sentiment classifier.
namespace csent::classifier {

using Eigen::MatrixXd;

struct ClassifierConfig {
  int lstm_layers = 3;
  int lstm_hidden = 64;
  double lstm_dropout = 0.2;
  int dense1_dim = 100;
  double dense1_dropout = 0.3;
  int output_dim = kNumClasses;
  double lr = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double early_stop_min_delta = 0.0002;
  int early_stop_patience = 5;
  int max_seq_len = 40;
  int batch_size = 32;
  int max_epochs = 100;
  bool freeze_embeddings = false;
  bool drop_mentions = false;
  bool drop_urls = false;
  std::uint64_t seed = 1;

  void validate() const;

  /// Declares every key above with its default value.
  static void declare(KeyValueConfig& kv);
  static ClassifierConfig from(const KeyValueConfig& kv);
};

inline constexpr int kPadIndex = 0;
inline constexpr int kUnkIndex = 1;
inline constexpr int kReservedRows = 2;

/// In-vocabulary tokens map to index + 2, unknown ones to UNK. The result is
/// left-padded with PAD to max_seq_len; longer inputs keep their last
/// max_seq_len tokens.
std::vector<int> encode_sequence(std::span<const std::string> tokens, const embeddings::Vocabulary& vocab,
                                 std::size_t max_seq_len);

/// All trainable tensors. Biases are 1 x n matrices.
struct Parameters {
  MatrixXd embedding;                                  // (|V| + 2) x dim
  std::vector<std::array<lstm::LstmParams, 2>> lstm;  // [layer][forward, backward]
  MatrixXd dense1_w, dense1_b;
  MatrixXd output_w, output_b;

  /// Canonical order: embedding, then per layer/direction W, U, b, then the
  /// dense weights. Used for serialization and optimizer bookkeeping.
  std::vector<MatrixXd*> tensors();
  std::vector<const MatrixXd*> tensors() const;

  /// Same shapes, all zero.
  Parameters zeros_like() const;
};

struct AdamaxState {
  Parameters m;  // first moment
  Parameters u;  // exponentially weighted infinity norm
  std::uint64_t step = 0;
};

struct BiLstmModel {
  ClassifierConfig config;
  embeddings::Vocabulary vocab;
  Parameters params;
  AdamaxState optimizer;
  preprocess::PreprocessConfig preprocessing = preprocess::PreprocessConfig::builtin();

  std::size_t embedding_dim() const { return static_cast<std::size_t>(params.embedding.cols()); }
};

/// Xavier-uniform input and dense weights, orthogonal recurrent weights,
/// forget-gate bias 1, zero PAD row. Embedding rows for vocabulary words
/// are copied from `pretrained`; the UNK row is uniform in [-0.05, 0.05].
BiLstmModel create_model(const ClassifierConfig& config, const embeddings::EmbeddingMatrix& pretrained,
                         preprocess::PreprocessConfig preprocessing = preprocess::PreprocessConfig::builtin());

/// As above with every embedding row (except PAD) uniform in [-0.05, 0.05].
BiLstmModel create_model(const ClassifierConfig& config, embeddings::Vocabulary vocab, std::size_t embedding_dim,
                         preprocess::PreprocessConfig preprocessing = preprocess::PreprocessConfig::builtin());

/// Equal-length index sequences.
using Batch = std::vector<std::vector<int>>;

/// Class probabilities, one row per sequence. Dropout only in train_mode.
MatrixXd forward(const BiLstmModel& model, const Batch& batch, bool train_mode, Rng& rng);

struct Gradients {
  Parameters dense;                  // `embedding` is left empty
  std::vector<int> embedding_rows;   // ascending, PAD never present
  MatrixXd embedding_values;         // one row per entry of embedding_rows
};

struct LossAndGradients {
  double loss = 0.0;
  MatrixXd probabilities;
  Gradients gradients;
};

/// Mean cross-entropy and its gradient by backpropagation through time.
/// Throws NumericalError naming `batch_id` if the loss is not finite.
LossAndGradients loss_and_gradients(const BiLstmModel& model, const Batch& batch,
                                    std::span<const SentimentLabel> labels, bool train_mode, Rng& rng,
                                    std::size_t batch_id = 0);

struct AdamaxHyper {
  double lr = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Elementwise Adamax update for step number `step` (already incremented):
/// m = b1 m + (1 - b1) g; u = max(b2 u, |g|); theta -= lr / (1 - b1^step) * m / (u + eps).
void adamax_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                   std::span<double> u, std::uint64_t step, const AdamaxHyper& hyper);

/// Advances the model's optimizer state by one step. Dense tensors update
/// every element; embedding rows update only where the batch touched them.
void adamax_step(BiLstmModel& model, const Gradients& grads);

/// Stops after `patience` consecutive epochs whose loss fails to beat the
/// best so far by more than min_delta.
class EarlyStopping {
 public:
  EarlyStopping(double min_delta, int patience);

  /// Feeds one epoch's validation loss; returns true when training should stop.
  bool update(double loss);

  bool last_improved() const { return last_improved_; }
  int best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_loss() const { return best_loss_; }
  int epochs() const { return epochs_; }
  int wait() const { return wait_; }

 private:
  double min_delta_;
  int patience_;
  double best_loss_;
  int best_epoch_ = 0;
  int epochs_ = 0;
  int wait_ = 0;
  bool last_improved_ = false;
};

struct StoppingTrace {
  int stop_epoch = 0;  // 0 if the sequence never triggered a stop
  int best_epoch = 0;
};

StoppingTrace trace_early_stopping(std::span<const double> validation_losses, double min_delta, int patience);

struct EncodedExample {
  std::string id;
  std::vector<int> indices;
  SentimentLabel label = SentimentLabel::neutral;
  bool empty = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
};

struct TrainResult {
  BiLstmModel model;  // parameters from the best validation epoch
  TrainingLog log;
};

/// Per-epoch shuffled mini-batch training with early stopping on validation
/// loss. `progress` (optional) receives one line per epoch.
TrainResult train(BiLstmModel model, const std::vector<EncodedExample>& train_set,
                  const std::vector<EncodedExample>& validation_set, std::ostream* progress = nullptr);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<SentimentLabel> predictions;
};

Evaluation evaluate(const BiLstmModel& model, const std::vector<EncodedExample>& examples);

/// Token texts fed to the encoder, after the mention/URL filters.
std::vector<std::string> select_tokens(const std::vector<preprocess::Token>& tokens, const ClassifierConfig& config);

/// Preprocesses and encodes with the model's own vocabulary and resources.
EncodedExample encode_text(const BiLstmModel& model, std::string id, std::string_view text, SentimentLabel label);
EncodedExample encode_tokens(const BiLstmModel& model, std::string id, const std::vector<preprocess::Token>& tokens,
                             SentimentLabel label);

/// Argmax with ties to the lowest class index.
SentimentLabel argmax_label(std::span<const double> probabilities);

struct Prediction {
  SentimentLabel label = SentimentLabel::positive;
  std::array<double, kNumClasses> probabilities{};
  bool flagged_empty = false;
};

Prediction predict(const BiLstmModel& model, std::string_view text);

// --- labeled data -----------------------------------------------------------

struct LabeledRecord {
  std::string id;
  SentimentLabel label = SentimentLabel::neutral;
  std::string text;                                   // raw text (TSV input)
  std::optional<std::vector<preprocess::Token>> tokens;  // pre-tokenized (JSONL input)
};

/// `id<TAB>label<TAB>text`; further tab-separated columns are joined to the
/// text with single spaces. A first line whose label column is not a label
/// (e.g. a header) is skipped; any later bad line is a ParseError.
std::vector<LabeledRecord> read_labeled_tsv(const std::filesystem::path& path);

/// `{"id": ..., "label": ..., "tokens": [...]}` per line.
std::vector<LabeledRecord> read_labeled_jsonl(const std::filesystem::path& path);

std::vector<EncodedExample> encode_records(const BiLstmModel& model, const std::vector<LabeledRecord>& records);

// --- binary model format (see docs/model_format.md) ----------------------------

inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(const BiLstmModel& model, std::ostream& out);
BiLstmModel read_model(std::istream& in, const std::string& source);
void save_model(const BiLstmModel& model, const std::filesystem::path& path);
BiLstmModel load_model(const std::filesystem::path& path);

}  // namespace csent::classifier
