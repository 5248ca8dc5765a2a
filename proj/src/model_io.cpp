#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "csent/classifier.hpp"
#include "csent/error.hpp"
#include "csent/io.hpp"

namespace csent::classifier {

namespace {

constexpr std::array<char, 8> kMagic{'C', 'S', 'N', 'T', 'B', 'L', 'S', 'M'};
constexpr std::array<char, 4> kTrailer{'C', 'E', 'N', 'D'};

// Explicit little-endian encoding, independent of the host byte order.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void matrix(const MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }

 private:
  void le(std::uint64_t v, int n) {
    unsigned char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, static_cast<std::size_t>(n));
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("unexpected end of file");
    offset_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 24)) fail("string length out of range");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, const char* what) {
    const auto r = u64();
    const auto c = u64();
    if (r != static_cast<std::uint64_t>(rows) || c != static_cast<std::uint64_t>(cols))
      fail(std::string("tensor '") + what + "' has shape " + std::to_string(r) + "x" + std::to_string(c) +
           ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = f64();
        if (!std::isfinite(m(i, j))) fail(std::string("non-finite value in tensor '") + what + "'");
      }
    return m;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source_ + ": byte " + std::to_string(offset_) + ": " + what);
  }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::string source_;
  std::size_t offset_ = 0;
};

template <class Set>
std::vector<std::string> sorted(const Set& set) {
  std::vector<std::string> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

void write_tensors(Writer& w, const Parameters& p) {
  for (const MatrixXd* m : p.tensors()) w.matrix(*m);
}

// Shapes follow from the config and vocabulary; every tensor is checked.
Parameters read_tensors(Reader& r, const ClassifierConfig& cfg, Eigen::Index rows, Eigen::Index dim) {
  const Eigen::Index H = cfg.lstm_hidden;
  Parameters p;
  p.embedding = r.matrix(rows, dim, "embedding");
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const Eigen::Index in = l == 0 ? dim : 2 * H;
    std::array<lstm::LstmParams, 2> dirs;
    for (auto& d : dirs) {
      d.W = r.matrix(in, 4 * H, "lstm.W");
      d.U = r.matrix(H, 4 * H, "lstm.U");
      d.b = r.matrix(1, 4 * H, "lstm.b");
    }
    p.lstm.push_back(std::move(dirs));
  }
  p.dense1_w = r.matrix(2 * H, cfg.dense1_dim, "dense1.w");
  p.dense1_b = r.matrix(1, cfg.dense1_dim, "dense1.b");
  p.output_w = r.matrix(cfg.dense1_dim, kNumClasses, "output.w");
  p.output_b = r.matrix(1, kNumClasses, "output.b");
  return p;
}

}  // namespace

void write_model(const BiLstmModel& model, std::ostream& out) {
  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kModelFormatVersion);

  const auto& c = model.config;
  w.i32(c.lstm_layers);
  w.i32(c.lstm_hidden);
  w.f64(c.lstm_dropout);
  w.i32(c.dense1_dim);
  w.f64(c.dense1_dropout);
  w.i32(c.output_dim);
  w.f64(c.lr);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.f64(c.early_stop_min_delta);
  w.i32(c.early_stop_patience);
  w.i32(c.max_seq_len);
  w.i32(c.batch_size);
  w.i32(c.max_epochs);
  w.u8(c.freeze_embeddings);
  w.u8(c.drop_mentions);
  w.u8(c.drop_urls);
  w.u64(c.seed);

  w.u64(model.vocab.size());
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    w.str(model.vocab.word(static_cast<embeddings::WordIndex>(i)));
    w.u64(model.vocab.count(static_cast<embeddings::WordIndex>(i)));
  }
  w.u64(model.vocab.min_count());
  w.u64(static_cast<std::uint64_t>(model.params.embedding.cols()));

  for (const auto* set : {&model.preprocessing.en_stopwords(), &model.preprocessing.es_stopwords()}) {
    const auto words = sorted(*set);
    w.u64(words.size());
    for (const auto& word : words) w.str(word);
  }
  std::vector<std::pair<std::string, std::string>> table(model.preprocessing.contractions().begin(),
                                                         model.preprocessing.contractions().end());
  std::sort(table.begin(), table.end());
  w.u64(table.size());
  for (const auto& [from, to] : table) {
    w.str(from);
    w.str(to);
  }

  write_tensors(w, model.params);
  w.u64(model.optimizer.step);
  write_tensors(w, model.optimizer.m);
  write_tensors(w, model.optimizer.u);
  w.bytes(kTrailer.data(), kTrailer.size());
}

BiLstmModel read_model(std::istream& in, const std::string& source) {
  Reader r(in, source);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) r.fail("not a classifier model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) r.fail("unsupported model format version " + std::to_string(version));

  ClassifierConfig c;
  c.lstm_layers = r.i32();
  c.lstm_hidden = r.i32();
  c.lstm_dropout = r.f64();
  c.dense1_dim = r.i32();
  c.dense1_dropout = r.f64();
  c.output_dim = r.i32();
  c.lr = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  c.early_stop_min_delta = r.f64();
  c.early_stop_patience = r.i32();
  c.max_seq_len = r.i32();
  c.batch_size = r.i32();
  c.max_epochs = r.i32();
  c.freeze_embeddings = r.u8() != 0;
  c.drop_mentions = r.u8() != 0;
  c.drop_urls = r.u8() != 0;
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const DomainError& e) {
    r.fail(std::string("invalid config: ") + e.what());
  }

  const std::uint64_t n = r.u64();
  if (n > (1ull << 32)) r.fail("vocabulary size out of range");
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(n);
  counts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    words.push_back(r.str());
    counts.push_back(r.u64());
  }
  const std::uint64_t min_count = r.u64();
  const std::uint64_t dim = r.u64();
  if (dim == 0 || dim > (1u << 20)) r.fail("embedding dimension out of range");

  std::array<std::unordered_set<std::string>, 2> stopwords;
  for (auto& set : stopwords) {
    const std::uint64_t k = r.u64();
    for (std::uint64_t i = 0; i < k; ++i) set.insert(r.str());
  }
  std::unordered_map<std::string, std::string> table;
  const std::uint64_t k = r.u64();
  for (std::uint64_t i = 0; i < k; ++i) {
    std::string from = r.str();
    table[from] = r.str();
  }

  const auto rows = static_cast<Eigen::Index>(n) + kReservedRows;
  const auto cols = static_cast<Eigen::Index>(dim);
  BiLstmModel model{c,
                    embeddings::Vocabulary(std::move(words), std::move(counts), min_count),
                    read_tensors(r, c, rows, cols),
                    {},
                    preprocess::PreprocessConfig(std::move(stopwords[0]), std::move(stopwords[1]), std::move(table))};
  model.optimizer.step = r.u64();
  model.optimizer.m = read_tensors(r, c, rows, cols);
  model.optimizer.u = read_tensors(r, c, rows, cols);
  std::array<char, 4> trailer{};
  r.bytes(trailer.data(), trailer.size());
  if (trailer != kTrailer) r.fail("bad trailer");
  if (in.peek() != std::char_traits<char>::eof()) r.fail("trailing data after model");
  return model;
}

void save_model(const BiLstmModel& model, const std::filesystem::path& path) {
  io::AtomicFile file(path, /*binary=*/true);
  write_model(model, file.stream());
  file.commit();
}

BiLstmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_model(in, path.string());
}

}  // namespace csent::classifier
