#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csent/labels.hpp"

// Confusion matrices and precision/recall/F1 reports.
namespace csent::evaluation {

struct OneVsRest {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

/// 3x3 counts indexed [gold][predicted].
class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts) : counts_(counts) {}

  std::uint64_t at(SentimentLabel gold, SentimentLabel predicted) const {
    return counts_[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
  }
  std::uint64_t& at(SentimentLabel gold, SentimentLabel predicted) {
    return counts_[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
  }
  const Counts& counts() const { return counts_; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  OneVsRest one_vs_rest(SentimentLabel label) const;
  ConfusionMatrix transposed() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  Counts counts_{};
};

/// Throws DataError for length mismatch or empty input.
ConfusionMatrix confusion(std::span<const SentimentLabel> golds, std::span<const SentimentLabel> preds);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> classes{};
  Averages macro;
  Averages weighted;
  double accuracy = 0.0;
  std::uint64_t total = 0;
  ConfusionMatrix matrix;
  /// Undefined ratios (0/0) are reported as 0 and noted here.
  std::vector<std::string> warnings;

  const ClassMetrics& operator[](SentimentLabel label) const { return classes[static_cast<std::size_t>(label)]; }
};

/// Throws DomainError if the matrix is empty.
MetricsReport metrics(const ConfusionMatrix& matrix);

/// Half-up rounding as used for display (0.655 -> 0.66).
double round_half_up(double value, int decimals);

/// Table layout: one row per class, then macro and weighted averages and
/// accuracy, followed by the per-class one-vs-rest confusion views.
std::string render_text(const MetricsReport& report);

/// Stable schema, full precision:
/// {"classes": {"positive": {"precision","recall","f1","support"}, ...},
///  "macro": {...}, "weighted": {...}, "accuracy", "total",
///  "confusion": [[...],[...],[...]], "warnings": [...]}
std::string render_json(const MetricsReport& report);
MetricsReport parse_json(const std::string& json_text);

// --- inputs -----------------------------------------------------------------

/// Two-column `gold<TAB>predicted` file. A header row is skipped.
std::vector<std::pair<SentimentLabel, SentimentLabel>> read_pairs_tsv(const std::filesystem::path& path);

/// First two columns `id<TAB>label` (labeled-data TSV and prediction TSV
/// both qualify). A header row is skipped.
std::vector<std::pair<std::string, SentimentLabel>> read_id_labels(const std::filesystem::path& path);

/// Aligns predictions to golds by id. Throws DataError for a gold id with no
/// prediction or a duplicated id.
std::pair<std::vector<SentimentLabel>, std::vector<SentimentLabel>> join_by_id(
    const std::vector<std::pair<std::string, SentimentLabel>>& golds,
    const std::vector<std::pair<std::string, SentimentLabel>>& preds);

}  // namespace csent::evaluation
