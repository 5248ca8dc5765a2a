#include "csent/embeddings.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "csent/error.hpp"
#include "csent/io.hpp"

namespace csent::embeddings {

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                       std::uint64_t min_count)
    : words_(std::move(words)), counts_(std::move(counts)), min_count_(min_count) {
  if (counts_.size() != words_.size()) throw Error("vocabulary words/counts size mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<WordIndex>(i)).second)
      throw DataError("duplicate vocabulary word '" + words_[i] + "'");
  }
}

std::uint64_t Vocabulary::total_count() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

WordIndex Vocabulary::index(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) throw LookupError(word);
  return it->second;
}

std::int64_t Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocabulary(const std::vector<preprocess::ProcessedDocument>& corpus,
                            std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : corpus)
    for (const auto& token : doc.tokens) ++freq[token.text];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : freq)
    if (count >= min_count) kept.emplace_back(word, count);
  if (kept.empty())
    throw DataError("vocabulary is empty after applying min_count=" + std::to_string(min_count));

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [word, count] : kept) {
    words.push_back(std::move(word));
    counts.push_back(count);
  }
  return Vocabulary(std::move(words), std::move(counts), min_count);
}

NegativeTable::NegativeTable(const Vocabulary& vocab, double power) {
  const std::size_t n = vocab.size();
  if (n == 0) throw DomainError("negative table needs a non-empty vocabulary");
  probability_.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Loaded models carry zero counts; treat them as uniform.
    const double c = std::max<double>(1.0, static_cast<double>(vocab.count(static_cast<WordIndex>(i))));
    probability_[i] = std::pow(c, power);
    total += probability_[i];
  }
  for (double& p : probability_) p /= total;

  // Vose's variant of the alias method.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), WordIndex{0});
  std::vector<double> scaled(n);
  std::vector<WordIndex> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probability_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<WordIndex>(i));
  }
  while (!small.empty() && !large.empty()) {
    const WordIndex s = small.back();
    small.pop_back();
    const WordIndex l = large.back();
    large.pop_back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (WordIndex i : small) accept_[i] = 1.0;
  for (WordIndex i : large) accept_[i] = 1.0;
}

WordIndex NegativeTable::sample(Rng& rng) const {
  const auto column = static_cast<WordIndex>(rng.below(accept_.size()));
  return rng.uniform() < accept_[column] ? column : alias_[column];
}

void CbowConfig::validate() const {
  if (dim == 0) throw DomainError("dim must be positive");
  if (window < 1) throw DomainError("window must be >= 1");
  if (epochs < 1) throw DomainError("epochs must be >= 1");
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (negatives < 1) throw DomainError("negatives must be >= 1");
  if (min_count < 1) throw DomainError("min_count must be >= 1");
  if (!(initial_lr > 0.0)) throw DomainError("initial_lr must be positive");
  if (subsample && !(subsample_threshold > 0.0)) throw DomainError("subsample threshold must be positive");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<Neighbor> top_k_neighbors(const EmbeddingMatrix& model, const std::string& word, std::size_t k) {
  const auto& vocab = model.vocab;
  const WordIndex query = vocab.index(word);
  if (k < 1 || k >= vocab.size())
    throw DomainError("k must be in [1, " + std::to_string(vocab.size() - 1) + "], got " + std::to_string(k));

  const auto q = model.input_vectors.row(query);
  std::vector<std::pair<double, WordIndex>> scored;
  scored.reserve(vocab.size() - 1);
  for (WordIndex i = 0; i < vocab.size(); ++i) {
    if (i == query) continue;
    const auto v = model.input_vectors.row(i);
    const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    // Operands ordered by index so that score(a, b) == score(b, a) bit for bit.
    const double s = zero ? 0.0 : (i < query ? cosine_similarity(v, q) : cosine_similarity(q, v));
    scored.emplace_back(s, i);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({vocab.word(scored[i].second), scored[i].first});
  return out;
}

void write_text(const EmbeddingMatrix& model, std::ostream& out) {
  const auto& vocab = model.vocab;
  out << vocab.size() << ' ' << model.dim() << '\n';
  char buf[64];
  for (WordIndex i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i);
    for (double x : model.input_vectors.row(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", x);
      out << buf;
    }
    out << '\n';
  }
}

void save_text(const EmbeddingMatrix& model, const std::filesystem::path& path) {
  io::AtomicFile file(path, /*binary=*/true);
  write_text(model, file.stream());
  file.commit();
}

namespace {

double parse_component(std::string_view field, const std::string& source, std::size_t line) {
  std::string text(field);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE || !std::isfinite(value))
    throw ParseError(source, line, "bad vector component '" + text + "'");
  return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

EmbeddingMatrix read_text(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_spaces(line);
  std::size_t rows = 0, dim = 0;
  {
    std::istringstream hs{std::string(line)};
    if (header.size() != 2 || !(hs >> rows >> dim) || dim == 0)
      throw ParseError(source, 1, "header must be '<vocab size> <dim>'");
  }
  std::vector<std::string> words;
  words.reserve(rows);
  Matrix input(rows, dim);
  std::size_t number = 1;
  for (std::size_t r = 0; r < rows; ++r) {
    ++number;
    if (!std::getline(in, line)) throw ParseError(source, number, "expected " + std::to_string(rows) + " rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1)
      throw ParseError(source, number,
                       "expected word and " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.empty() ? 0 : fields.size() - 1) + " values");
    words.emplace_back(fields[0]);
    for (std::size_t c = 0; c < dim; ++c) input.at(r, c) = parse_component(fields[c + 1], source, number);
  }
  while (std::getline(in, line)) {
    ++number;
    if (!io::trim(line).empty()) throw ParseError(source, number, "more rows than the header declares");
  }
  EmbeddingMatrix model;
  try {
    model.vocab = Vocabulary(std::move(words), std::vector<std::uint64_t>(rows, 0), 0);
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
  model.input_vectors = std::move(input);
  model.output_vectors = Matrix(rows, dim);
  return model;
}

EmbeddingMatrix load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_text(in, path.string());
}

}  // namespace csent::embeddings
