#include "csent/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <ostream>

#include <json.hpp>

#include "csent/error.hpp"
#include "csent/io.hpp"
#include "csent/unicode.hpp"

namespace csent::classifier {

using lstm::LstmParams;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// config

void ClassifierConfig::validate() const {
  if (lstm_layers < 1) throw DomainError("lstm_layers must be >= 1");
  if (lstm_hidden < 1) throw DomainError("lstm_hidden must be >= 1");
  if (dense1_dim < 1) throw DomainError("dense1_dim must be >= 1");
  if (output_dim != kNumClasses) throw DomainError("output_dim must be 3");
  if (!(lstm_dropout >= 0.0 && lstm_dropout < 1.0)) throw DomainError("lstm_dropout must be in [0, 1)");
  if (!(dense1_dropout >= 0.0 && dense1_dropout < 1.0)) throw DomainError("dense1_dropout must be in [0, 1)");
  if (!(lr > 0.0)) throw DomainError("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw DomainError("betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(early_stop_min_delta >= 0.0)) throw DomainError("early_stop_min_delta must be >= 0");
  if (early_stop_patience < 1) throw DomainError("early_stop_patience must be >= 1");
  if (max_seq_len < 1) throw DomainError("max_seq_len must be >= 1");
  if (batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (max_epochs < 1) throw DomainError("max_epochs must be >= 1");
}

namespace {

// Shortest text that parses back to the same double.
std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void ClassifierConfig::declare(KeyValueConfig& kv) {
  const ClassifierConfig d;
  kv.declare("lstm_layers", std::to_string(d.lstm_layers));
  kv.declare("lstm_hidden", std::to_string(d.lstm_hidden));
  kv.declare("lstm_dropout", num(d.lstm_dropout));
  kv.declare("dense1_dim", std::to_string(d.dense1_dim));
  kv.declare("dense1_dropout", num(d.dense1_dropout));
  kv.declare("output_dim", std::to_string(d.output_dim));
  kv.declare("lr", num(d.lr));
  kv.declare("beta1", num(d.beta1));
  kv.declare("beta2", num(d.beta2));
  kv.declare("epsilon", num(d.epsilon));
  kv.declare("early_stop_min_delta", num(d.early_stop_min_delta));
  kv.declare("early_stop_patience", std::to_string(d.early_stop_patience));
  kv.declare("max_seq_len", std::to_string(d.max_seq_len));
  kv.declare("batch_size", std::to_string(d.batch_size));
  kv.declare("max_epochs", std::to_string(d.max_epochs));
  kv.declare("freeze_embeddings", d.freeze_embeddings ? "true" : "false");
  kv.declare("drop_mentions", d.drop_mentions ? "true" : "false");
  kv.declare("drop_urls", d.drop_urls ? "true" : "false");
  kv.declare("seed", std::to_string(d.seed));
}

ClassifierConfig ClassifierConfig::from(const KeyValueConfig& kv) {
  ClassifierConfig c;
  c.lstm_layers = static_cast<int>(kv.get_int("lstm_layers"));
  c.lstm_hidden = static_cast<int>(kv.get_int("lstm_hidden"));
  c.lstm_dropout = kv.get_double("lstm_dropout");
  c.dense1_dim = static_cast<int>(kv.get_int("dense1_dim"));
  c.dense1_dropout = kv.get_double("dense1_dropout");
  c.output_dim = static_cast<int>(kv.get_int("output_dim"));
  c.lr = kv.get_double("lr");
  c.beta1 = kv.get_double("beta1");
  c.beta2 = kv.get_double("beta2");
  c.epsilon = kv.get_double("epsilon");
  c.early_stop_min_delta = kv.get_double("early_stop_min_delta");
  c.early_stop_patience = static_cast<int>(kv.get_int("early_stop_patience"));
  c.max_seq_len = static_cast<int>(kv.get_int("max_seq_len"));
  c.batch_size = static_cast<int>(kv.get_int("batch_size"));
  c.max_epochs = static_cast<int>(kv.get_int("max_epochs"));
  c.freeze_embeddings = kv.get_bool("freeze_embeddings");
  c.drop_mentions = kv.get_bool("drop_mentions");
  c.drop_urls = kv.get_bool("drop_urls");
  c.seed = kv.get_u64("seed");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// encoding

std::vector<int> encode_sequence(std::span<const std::string> tokens, const embeddings::Vocabulary& vocab,
                                 std::size_t max_seq_len) {
  std::vector<int> out(max_seq_len, kPadIndex);
  const std::size_t n = std::min(tokens.size(), max_seq_len);
  const std::size_t skip = tokens.size() - n;
  const std::size_t offset = max_seq_len - n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = vocab.find(tokens[skip + i]);
    out[offset + i] = idx >= 0 ? static_cast<int>(idx) + kReservedRows : kUnkIndex;
  }
  return out;
}

// ---------------------------------------------------------------------------
// parameters

std::vector<MatrixXd*> Parameters::tensors() {
  std::vector<MatrixXd*> out{&embedding};
  for (auto& layer : lstm)
    for (auto& dir : layer) {
      out.push_back(&dir.W);
      out.push_back(&dir.U);
      out.push_back(&dir.b);
    }
  for (MatrixXd* m : {&dense1_w, &dense1_b, &output_w, &output_b}) out.push_back(m);
  return out;
}

std::vector<const MatrixXd*> Parameters::tensors() const {
  auto mutable_view = const_cast<Parameters*>(this)->tensors();
  return {mutable_view.begin(), mutable_view.end()};
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  for (MatrixXd* m : z.tensors()) m->setZero();
  return z;
}

namespace {

MatrixXd xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  MatrixXd m(fan_in, fan_out);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

// hidden x 4*hidden with orthonormal rows.
MatrixXd orthogonal(Eigen::Index hidden, Rng& rng) {
  MatrixXd a(4 * hidden, hidden);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), hidden);
  const MatrixXd r = qr.matrixQR().topRows(hidden).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < hidden; ++c)
    if (r(c, c) < 0) q.col(c) *= -1.0;
  return q.transpose();
}

Parameters init_parameters(const ClassifierConfig& cfg, Eigen::Index vocab_rows, Eigen::Index dim, Rng& rng) {
  const Eigen::Index H = cfg.lstm_hidden;
  Parameters p;
  p.embedding = MatrixXd::Zero(vocab_rows, dim);
  for (Eigen::Index r = kPadIndex + 1; r < vocab_rows; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) p.embedding(r, c) = rng.uniform(-0.05, 0.05);
  for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
    const Eigen::Index in = layer == 0 ? dim : 2 * H;
    std::array<LstmParams, 2> dirs;
    for (auto& d : dirs) {
      d.W = xavier_uniform(in, 4 * H, rng);
      d.U = orthogonal(H, rng);
      d.b = MatrixXd::Zero(1, 4 * H);
      d.b.middleCols(H, H).setOnes();
    }
    p.lstm.push_back(std::move(dirs));
  }
  p.dense1_w = xavier_uniform(2 * H, cfg.dense1_dim, rng);
  p.dense1_b = MatrixXd::Zero(1, cfg.dense1_dim);
  p.output_w = xavier_uniform(cfg.dense1_dim, kNumClasses, rng);
  p.output_b = MatrixXd::Zero(1, kNumClasses);
  return p;
}

BiLstmModel assemble(const ClassifierConfig& config, embeddings::Vocabulary vocab, Parameters params,
                     preprocess::PreprocessConfig preprocessing) {
  BiLstmModel model{config, std::move(vocab), std::move(params), {}, std::move(preprocessing)};
  model.optimizer.m = model.params.zeros_like();
  model.optimizer.u = model.params.zeros_like();
  return model;
}

}  // namespace

BiLstmModel create_model(const ClassifierConfig& config, const embeddings::EmbeddingMatrix& pretrained,
                         preprocess::PreprocessConfig preprocessing) {
  config.validate();
  const auto dim = static_cast<Eigen::Index>(pretrained.dim());
  const auto rows = static_cast<Eigen::Index>(pretrained.vocab.size()) + kReservedRows;
  Rng rng(mix_seed(config.seed, 0));
  Parameters params = init_parameters(config, rows, dim, rng);
  for (std::size_t i = 0; i < pretrained.vocab.size(); ++i) {
    const auto v = pretrained.input_vectors.row(i);
    for (Eigen::Index c = 0; c < dim; ++c)
      params.embedding(static_cast<Eigen::Index>(i) + kReservedRows, c) = v[static_cast<std::size_t>(c)];
  }
  return assemble(config, pretrained.vocab, std::move(params), std::move(preprocessing));
}

BiLstmModel create_model(const ClassifierConfig& config, embeddings::Vocabulary vocab, std::size_t embedding_dim,
                         preprocess::PreprocessConfig preprocessing) {
  config.validate();
  if (embedding_dim == 0) throw DomainError("embedding dimension must be positive");
  const auto rows = static_cast<Eigen::Index>(vocab.size()) + kReservedRows;
  Rng rng(mix_seed(config.seed, 0));
  Parameters params = init_parameters(config, rows, static_cast<Eigen::Index>(embedding_dim), rng);
  return assemble(config, std::move(vocab), std::move(params), std::move(preprocessing));
}

// ---------------------------------------------------------------------------
// forward / backward

namespace {

MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

struct LayerCache {
  std::vector<MatrixXd> inputs;  // layer input per position
  std::array<lstm::DirectionCache, 2> dirs;
  std::vector<MatrixXd> dropout;  // per position (intermediate layers), B x 2H; empty when off
};

struct ForwardCache {
  std::vector<VectorXd> mask;
  std::vector<LayerCache> layers;
  MatrixXd final_raw;     // B x 2H
  MatrixXd final_drop;    // mask, empty when off
  MatrixXd final_out;     // after dropout
  MatrixXd dense1_pre;    // B x D1
  MatrixXd dense1_drop;   // mask, empty when off
  MatrixXd dense1_out;    // after ReLU and dropout
  MatrixXd logits;
  MatrixXd probabilities;
};

void check_batch(const BiLstmModel& model, const Batch& batch) {
  if (batch.empty()) throw DomainError("empty batch");
  const std::size_t T = batch[0].size();
  if (T == 0) throw DomainError("zero-length sequences");
  const auto rows = model.params.embedding.rows();
  for (const auto& seq : batch) {
    if (seq.size() != T) throw DomainError("batch sequences differ in length");
    for (int idx : seq)
      if (idx < 0 || idx >= rows) throw DomainError("token index out of range: " + std::to_string(idx));
  }
}

MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double mx = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - mx).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

void run_forward(const BiLstmModel& model, const Batch& batch, bool train_mode, Rng& rng, ForwardCache& cache) {
  check_batch(model, batch);
  const auto& cfg = model.config;
  const auto& P = model.params;
  const std::size_t T = batch[0].size();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index H = cfg.lstm_hidden;
  const Eigen::Index dim = P.embedding.cols();
  const bool lstm_dropout = train_mode && cfg.lstm_dropout > 0.0;
  const bool dense_dropout = train_mode && cfg.dense1_dropout > 0.0;

  cache.mask.assign(T, VectorXd::Zero(B));
  std::vector<MatrixXd> inputs(T, MatrixXd(B, dim));
  for (std::size_t t = 0; t < T; ++t)
    for (Eigen::Index b = 0; b < B; ++b) {
      const int idx = batch[static_cast<std::size_t>(b)][t];
      inputs[t].row(b) = P.embedding.row(idx);
      cache.mask[t](b) = idx == kPadIndex ? 0.0 : 1.0;
    }

  const auto L = static_cast<std::size_t>(cfg.lstm_layers);
  cache.layers.assign(L, {});
  for (std::size_t l = 0; l < L; ++l) {
    LayerCache& lc = cache.layers[l];
    lc.inputs = std::move(inputs);
    lstm::run_direction(P.lstm[l][0], lc.inputs, cache.mask, false, lc.dirs[0]);
    lstm::run_direction(P.lstm[l][1], lc.inputs, cache.mask, true, lc.dirs[1]);
    if (l + 1 == L) break;
    inputs.assign(T, MatrixXd(B, 2 * H));
    for (std::size_t t = 0; t < T; ++t) {
      inputs[t].leftCols(H) = lc.dirs[0].h_out[t];
      inputs[t].rightCols(H) = lc.dirs[1].h_out[t];
      if (lstm_dropout) {
        lc.dropout.push_back(dropout_mask(B, 2 * H, cfg.lstm_dropout, rng));
        inputs[t] = inputs[t].cwiseProduct(lc.dropout.back());
      }
    }
  }

  const LayerCache& top = cache.layers.back();
  cache.final_raw.resize(B, 2 * H);
  cache.final_raw.leftCols(H) = top.dirs[0].h_out[T - 1];
  cache.final_raw.rightCols(H) = top.dirs[1].h_out[0];
  cache.final_drop.resize(0, 0);
  cache.final_out = cache.final_raw;
  if (lstm_dropout) {
    cache.final_drop = dropout_mask(B, 2 * H, cfg.lstm_dropout, rng);
    cache.final_out = cache.final_raw.cwiseProduct(cache.final_drop);
  }

  cache.dense1_pre = cache.final_out * P.dense1_w;
  cache.dense1_pre.rowwise() += P.dense1_b.row(0);
  cache.dense1_out = cache.dense1_pre.cwiseMax(0.0);
  cache.dense1_drop.resize(0, 0);
  if (dense_dropout) {
    cache.dense1_drop = dropout_mask(B, cfg.dense1_dim, cfg.dense1_dropout, rng);
    cache.dense1_out = cache.dense1_out.cwiseProduct(cache.dense1_drop);
  }
  cache.logits = cache.dense1_out * P.output_w;
  cache.logits.rowwise() += P.output_b.row(0);
  cache.probabilities = softmax_rows(cache.logits);
}

}  // namespace

MatrixXd forward(const BiLstmModel& model, const Batch& batch, bool train_mode, Rng& rng) {
  ForwardCache cache;
  run_forward(model, batch, train_mode, rng, cache);
  return std::move(cache.probabilities);
}

LossAndGradients loss_and_gradients(const BiLstmModel& model, const Batch& batch,
                                    std::span<const SentimentLabel> labels, bool train_mode, Rng& rng,
                                    std::size_t batch_id) {
  if (labels.size() != batch.size()) throw DomainError("labels and batch differ in size");
  ForwardCache cache;
  run_forward(model, batch, train_mode, rng, cache);

  const auto& cfg = model.config;
  const auto& P = model.params;
  const std::size_t T = batch[0].size();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index H = cfg.lstm_hidden;

  LossAndGradients out;
  double loss = 0.0;
  MatrixXd d_logits = cache.probabilities;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int y = static_cast<int>(labels[static_cast<std::size_t>(b)]);
    const auto row = cache.logits.row(b);
    const double mx = row.maxCoeff();
    const double log_z = mx + std::log((row.array() - mx).exp().sum());
    loss += log_z - row(y);
    d_logits(b, y) -= 1.0;
  }
  loss /= static_cast<double>(B);
  if (!std::isfinite(loss)) throw NumericalError("non-finite loss in batch " + std::to_string(batch_id));
  d_logits /= static_cast<double>(B);
  out.loss = loss;
  out.probabilities = cache.probabilities;

  Gradients& g = out.gradients;
  g.dense.lstm.resize(P.lstm.size());
  for (std::size_t l = 0; l < P.lstm.size(); ++l)
    for (int d = 0; d < 2; ++d) g.dense.lstm[l][d] = LstmParams::zeros(P.lstm[l][d].input_dim(), H);

  g.dense.output_w = cache.dense1_out.transpose() * d_logits;
  g.dense.output_b = d_logits.colwise().sum();
  MatrixXd d_dense1 = d_logits * P.output_w.transpose();
  if (cache.dense1_drop.size() != 0) d_dense1 = d_dense1.cwiseProduct(cache.dense1_drop);
  d_dense1 = (cache.dense1_pre.array() > 0.0).select(d_dense1, 0.0);
  g.dense.dense1_w = cache.final_out.transpose() * d_dense1;
  g.dense.dense1_b = d_dense1.colwise().sum();
  MatrixXd d_final = d_dense1 * P.dense1_w.transpose();
  if (cache.final_drop.size() != 0) d_final = d_final.cwiseProduct(cache.final_drop);

  // Gradient arriving at each direction's h_out, per layer.
  std::array<std::vector<MatrixXd>, 2> dh_out{std::vector<MatrixXd>(T), std::vector<MatrixXd>(T)};
  dh_out[0][T - 1] = d_final.leftCols(H);
  dh_out[1][0] = d_final.rightCols(H);

  std::vector<MatrixXd> d_inputs;
  for (std::size_t l = P.lstm.size(); l-- > 0;) {
    const LayerCache& lc = cache.layers[l];
    d_inputs.assign(T, MatrixXd());
    for (int d = 0; d < 2; ++d)
      lstm::backprop_direction(P.lstm[l][d], lc.inputs, cache.mask, lc.dirs[d], dh_out[d], g.dense.lstm[l][d],
                               d_inputs);
    if (l == 0) break;
    const LayerCache& below = cache.layers[l - 1];
    for (std::size_t t = 0; t < T; ++t) {
      MatrixXd dy = d_inputs[t];
      if (!below.dropout.empty()) dy = dy.cwiseProduct(below.dropout[t]);
      dh_out[0][t] = dy.leftCols(H);
      dh_out[1][t] = dy.rightCols(H);
    }
  }

  if (!cfg.freeze_embeddings) {
    std::map<int, VectorXd> rows;
    for (std::size_t t = 0; t < T; ++t)
      for (Eigen::Index b = 0; b < B; ++b) {
        const int idx = batch[static_cast<std::size_t>(b)][t];
        if (idx == kPadIndex) continue;
        auto [it, inserted] = rows.try_emplace(idx, VectorXd::Zero(P.embedding.cols()));
        it->second += d_inputs[t].row(b).transpose();
      }
    g.embedding_values.resize(static_cast<Eigen::Index>(rows.size()), P.embedding.cols());
    Eigen::Index r = 0;
    for (auto& [idx, v] : rows) {
      g.embedding_rows.push_back(idx);
      g.embedding_values.row(r++) = v.transpose();
    }
  } else {
    g.embedding_values.resize(0, P.embedding.cols());
  }
  return out;
}

// ---------------------------------------------------------------------------
// optimizer

void adamax_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                   std::span<double> u, std::uint64_t step, const AdamaxHyper& hyper) {
  if (grad.size() != theta.size() || m.size() != theta.size() || u.size() != theta.size())
    throw DomainError("adamax: shape mismatch");
  if (step == 0) throw DomainError("adamax: step counter must be incremented before the update");
  const double rate = hyper.lr / (1.0 - std::pow(hyper.beta1, static_cast<double>(step)));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
    u[i] = std::max(hyper.beta2 * u[i], std::abs(grad[i]));
    theta[i] -= rate * m[i] / (u[i] + hyper.epsilon);
  }
}

namespace {

std::span<double> span_of(MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<const double> span_of(const MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

}  // namespace

void adamax_step(BiLstmModel& model, const Gradients& grads) {
  const auto& cfg = model.config;
  const AdamaxHyper hyper{cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon};
  auto& state = model.optimizer;
  ++state.step;

  auto params = model.params.tensors();
  auto ms = state.m.tensors();
  auto us = state.u.tensors();
  const auto gs = grads.dense.tensors();
  for (std::size_t i = 1; i < params.size(); ++i)
    adamax_update(span_of(*params[i]), span_of(*gs[i]), span_of(*ms[i]), span_of(*us[i]), state.step, hyper);

  if (cfg.freeze_embeddings) return;
  // Row-wise update for the embedding: rows absent from the batch are left alone.
  Eigen::Matrix<double, 1, Eigen::Dynamic> theta_row, m_row, u_row, g_row;
  for (std::size_t k = 0; k < grads.embedding_rows.size(); ++k) {
    const int r = grads.embedding_rows[k];
    if (r == kPadIndex) continue;
    theta_row = model.params.embedding.row(r);
    m_row = state.m.embedding.row(r);
    u_row = state.u.embedding.row(r);
    g_row = grads.embedding_values.row(static_cast<Eigen::Index>(k));
    const auto n = static_cast<std::size_t>(theta_row.size());
    adamax_update({theta_row.data(), n}, {g_row.data(), n}, {m_row.data(), n}, {u_row.data(), n}, state.step,
                  hyper);
    model.params.embedding.row(r) = theta_row;
    state.m.embedding.row(r) = m_row;
    state.u.embedding.row(r) = u_row;
  }
}

// ---------------------------------------------------------------------------
// early stopping

EarlyStopping::EarlyStopping(double min_delta, int patience)
    : min_delta_(min_delta), patience_(patience), best_loss_(std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw DomainError("patience must be >= 1");
  if (min_delta < 0.0) throw DomainError("min_delta must be >= 0");
}

bool EarlyStopping::update(double loss) {
  ++epochs_;
  last_improved_ = loss < best_loss_ - min_delta_;
  if (last_improved_) {
    best_loss_ = loss;
    best_epoch_ = epochs_;
    wait_ = 0;
    return false;
  }
  ++wait_;
  return wait_ >= patience_;
}

StoppingTrace trace_early_stopping(std::span<const double> validation_losses, double min_delta, int patience) {
  EarlyStopping stopper(min_delta, patience);
  StoppingTrace trace;
  for (double loss : validation_losses) {
    if (stopper.update(loss)) {
      trace.stop_epoch = stopper.epochs();
      break;
    }
  }
  trace.best_epoch = stopper.best_epoch();
  return trace;
}

// ---------------------------------------------------------------------------
// training

namespace {

// Masked steps carry the state through unchanged, so columns that are PAD in
// every row can be dropped from the front without changing any output.
void trim_leading_padding(Batch& batch) {
  if (batch.empty()) return;
  std::size_t first = batch[0].size();
  for (const auto& row : batch) {
    const auto it = std::find_if(row.begin(), row.end(), [](int idx) { return idx != kPadIndex; });
    first = std::min(first, static_cast<std::size_t>(it - row.begin()));
  }
  first = std::min(first, batch[0].size() - 1);
  if (first == 0) return;
  for (auto& row : batch) row.erase(row.begin(), row.begin() + static_cast<long>(first));
}

Batch gather(const std::vector<EncodedExample>& examples, std::span<const std::size_t> order,
             std::vector<SentimentLabel>& labels) {
  Batch batch;
  batch.reserve(order.size());
  labels.clear();
  for (std::size_t i : order) {
    batch.push_back(examples[i].indices);
    labels.push_back(examples[i].label);
  }
  trim_leading_padding(batch);
  return batch;
}

}  // namespace

SentimentLabel argmax_label(std::span<const double> probabilities) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i)
    if (probabilities[i] > probabilities[best]) best = i;
  return static_cast<SentimentLabel>(best);
}

Evaluation evaluate(const BiLstmModel& model, const std::vector<EncodedExample>& examples) {
  Evaluation ev;
  if (examples.empty()) return ev;
  Rng unused(0);
  const auto batch_size = static_cast<std::size_t>(model.config.batch_size);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<SentimentLabel> labels;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, examples.size() - start);
    const Batch batch = gather(examples, std::span(order).subspan(start, n), labels);
    const MatrixXd probs = forward(model, batch, false, unused);
    for (std::size_t b = 0; b < n; ++b) {
      const auto row = probs.row(static_cast<Eigen::Index>(b));
      const double p = row(static_cast<int>(labels[b]));
      ev.loss -= std::log(std::max(p, std::numeric_limits<double>::min()));
      const std::array<double, kNumClasses> triple{row(0), row(1), row(2)};
      const SentimentLabel pred = argmax_label(triple);
      ev.predictions.push_back(pred);
      if (pred == labels[b]) ++correct;
    }
  }
  ev.loss /= static_cast<double>(examples.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
  return ev;
}

TrainResult train(BiLstmModel model, const std::vector<EncodedExample>& train_set,
                  const std::vector<EncodedExample>& validation_set, std::ostream* progress) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (validation_set.empty()) throw DataError("validation set is empty");
  const auto& cfg = model.config;
  cfg.validate();

  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  Rng dropout_rng(mix_seed(cfg.seed, 2));
  EarlyStopping stopper(cfg.early_stop_min_delta, cfg.early_stop_patience);
  TrainResult result{model, {}};

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<SentimentLabel> labels;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  std::size_t batch_id = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t n = std::min(batch_size, order.size() - start);
      const Batch batch = gather(train_set, std::span(order).subspan(start, n), labels);
      LossAndGradients lg = loss_and_gradients(model, batch, labels, true, dropout_rng, batch_id++);
      loss_sum += lg.loss * static_cast<double>(n);
      for (std::size_t b = 0; b < n; ++b) {
        const auto row = lg.probabilities.row(static_cast<Eigen::Index>(b));
        const std::array<double, kNumClasses> triple{row(0), row(1), row(2)};
        if (argmax_label(triple) == labels[b]) ++correct;
      }
      adamax_step(model, lg.gradients);
    }
    const Evaluation val = evaluate(model, validation_set);
    if (!std::isfinite(val.loss))
      throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch) +
                           " (train loss " + std::to_string(loss_sum / static_cast<double>(order.size())) + ")");
    EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()),
                       static_cast<double>(correct) / static_cast<double>(order.size()), val.loss, val.accuracy};
    result.log.epochs.push_back(record);
    const bool stop = stopper.update(val.loss);
    if (stopper.last_improved()) result.model = model;
    if (progress) {
      *progress << "epoch " << epoch << " train_loss=" << record.train_loss
                << " train_acc=" << record.train_accuracy << " val_loss=" << record.validation_loss
                << " val_acc=" << record.validation_accuracy << (stopper.last_improved() ? " *" : "") << '\n';
    }
    if (stop) {
      result.log.stopped_early = true;
      break;
    }
  }
  result.log.best_epoch = stopper.best_epoch();
  return result;
}

// ---------------------------------------------------------------------------
// inference

std::vector<std::string> select_tokens(const std::vector<preprocess::Token>& tokens, const ClassifierConfig& config) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (config.drop_mentions && t.kind == preprocess::TokenKind::mention) continue;
    if (config.drop_urls && t.kind == preprocess::TokenKind::url) continue;
    out.push_back(t.text);
  }
  return out;
}

EncodedExample encode_tokens(const BiLstmModel& model, std::string id, const std::vector<preprocess::Token>& tokens,
                             SentimentLabel label) {
  const auto texts = select_tokens(tokens, model.config);
  return EncodedExample{std::move(id),
                        encode_sequence(texts, model.vocab, static_cast<std::size_t>(model.config.max_seq_len)),
                        label, texts.empty()};
}

EncodedExample encode_text(const BiLstmModel& model, std::string id, std::string_view text, SentimentLabel label) {
  return encode_tokens(model, std::move(id), preprocess::preprocess_text(text, model.preprocessing), label);
}

Prediction predict(const BiLstmModel& model, std::string_view text) {
  const EncodedExample ex = encode_text(model, "", text, SentimentLabel::positive);
  Rng unused(0);
  Batch batch{ex.indices};
  trim_leading_padding(batch);
  const MatrixXd probs = forward(model, batch, false, unused);
  Prediction p;
  for (int c = 0; c < kNumClasses; ++c) p.probabilities[static_cast<std::size_t>(c)] = probs(0, c);
  p.label = argmax_label(p.probabilities);
  p.flagged_empty = ex.empty;
  return p;
}

// ---------------------------------------------------------------------------
// labeled data

std::vector<LabeledRecord> read_labeled_tsv(const std::filesystem::path& path) {
  std::vector<LabeledRecord> records;
  bool first = true;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    const bool was_first = first;
    first = false;
    if (io::trim(line).empty()) return;
    const auto fields = io::split(line, '\t');
    if (fields.size() < 3) {
      if (was_first) return;
      throw ParseError(path.string(), number, "expected 'id<TAB>label<TAB>text'");
    }
    const auto label = parse_label(fields[1]);
    if (!label) {
      if (was_first) return;  // header row
      throw ParseError(path.string(), number, "unknown label '" + std::string(fields[1]) + "'");
    }
    std::string text(fields[2]);
    for (std::size_t i = 3; i < fields.size(); ++i) (text += ' ') += fields[i];
    if (!unicode::is_valid_utf8(text)) throw ParseError(path.string(), number, "invalid UTF-8");
    records.push_back({std::string(io::trim(fields[0])), *label, std::move(text), std::nullopt});
  });
  return records;
}

std::vector<LabeledRecord> read_labeled_jsonl(const std::filesystem::path& path) {
  using nlohmann::json;
  std::vector<LabeledRecord> records;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    if (io::trim(line).empty()) return;
    json object = json::parse(line, nullptr, false);
    if (object.is_discarded() || !object.is_object()) throw ParseError(path.string(), number, "not a JSON object");
    auto label_it = object.find("label");
    auto tokens_it = object.find("tokens");
    if (label_it == object.end() || !label_it->is_string())
      throw ParseError(path.string(), number, "missing string 'label'");
    if (tokens_it == object.end() || !tokens_it->is_array())
      throw ParseError(path.string(), number, "missing 'tokens' array");
    const auto label = parse_label(label_it->get<std::string>());
    if (!label) throw ParseError(path.string(), number, "unknown label");
    LabeledRecord rec;
    if (auto id = object.find("id"); id != object.end() && id->is_string()) rec.id = id->get<std::string>();
    rec.label = *label;
    std::vector<preprocess::Token> tokens;
    for (const auto& t : *tokens_it) {
      if (!t.is_string()) throw ParseError(path.string(), number, "token is not a string");
      std::string text = t.get<std::string>();
      if (text.empty()) continue;
      const auto kind = preprocess::classify_token(text);
      tokens.push_back({std::move(text), kind});
    }
    rec.tokens = std::move(tokens);
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<EncodedExample> encode_records(const BiLstmModel& model, const std::vector<LabeledRecord>& records) {
  std::vector<EncodedExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(r.tokens ? encode_tokens(model, r.id, *r.tokens, r.label)
                           : encode_text(model, r.id, r.text, r.label));
  }
  return out;
}

}  // namespace csent::classifier
