#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "csent/embeddings.hpp"
#include "csent/error.hpp"

namespace csent::embeddings {

namespace {

double sigmoid(double x) {
  x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-x));
}

// -log(sigmoid(x)), with the same clamping as sigmoid().
double neg_log_sigmoid(double x) {
  x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  return std::log1p(std::exp(-x));
}

// Element access for the shared matrices. The multi-worker path goes through
// relaxed atomics: no ordering, but no torn values either.
template <bool Shared>
struct Cell {
  static double load(const double& x) {
    if constexpr (Shared) {
      return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void add(double& x, double delta) {
    if constexpr (Shared) {
      std::atomic_ref<double> ref(x);
      ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
    } else {
      x += delta;
    }
  }
};

struct Scratch {
  std::vector<double> hidden;
  std::vector<double> hidden_grad;  // negative gradient of the loss w.r.t. hidden
  std::vector<double> scores;
};

// Fused CBOW update; see cbow_step for the contract.
template <bool Shared>
double cbow_update(double* input, double* output, std::size_t dim, WordIndex center,
                   std::span<const WordIndex> context, std::span<const WordIndex> negatives,
                   double lr, Scratch& scratch) {
  using C = Cell<Shared>;
  auto& h = scratch.hidden;
  auto& eh = scratch.hidden_grad;
  h.assign(dim, 0.0);
  eh.assign(dim, 0.0);
  for (WordIndex c : context) {
    const double* row = input + static_cast<std::size_t>(c) * dim;
    for (std::size_t d = 0; d < dim; ++d) h[d] += C::load(row[d]);
  }
  const double inv = 1.0 / static_cast<double>(context.size());
  for (double& x : h) x *= inv;

  // Pass 1: scores against the pre-update output rows.
  const std::size_t targets = 1 + negatives.size();
  scratch.scores.resize(targets);
  double loss = 0.0;
  for (std::size_t t = 0; t < targets; ++t) {
    const WordIndex w = t == 0 ? center : negatives[t - 1];
    const double* row = output + static_cast<std::size_t>(w) * dim;
    double f = 0.0;
    for (std::size_t d = 0; d < dim; ++d) f += C::load(row[d]) * h[d];
    const double label = t == 0 ? 1.0 : 0.0;
    loss += t == 0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    const double g = label - sigmoid(f);
    scratch.scores[t] = g;
    for (std::size_t d = 0; d < dim; ++d) eh[d] += g * C::load(row[d]);
  }
  // Pass 2: apply.
  for (std::size_t t = 0; t < targets; ++t) {
    const WordIndex w = t == 0 ? center : negatives[t - 1];
    double* row = output + static_cast<std::size_t>(w) * dim;
    const double step = lr * scratch.scores[t];
    for (std::size_t d = 0; d < dim; ++d) C::add(row[d], step * h[d]);
  }
  const double share = lr * inv;
  for (WordIndex c : context) {
    double* row = input + static_cast<std::size_t>(c) * dim;
    for (std::size_t d = 0; d < dim; ++d) C::add(row[d], share * eh[d]);
  }
  return loss;
}

void check_step_args(const EmbeddingMatrix& model, WordIndex center, std::span<const WordIndex> context,
                     std::span<const WordIndex> negatives) {
  const std::size_t n = model.vocab.size();
  if (context.empty()) throw DomainError("cbow: empty context");
  if (center >= n) throw DomainError("cbow: center index out of range");
  for (WordIndex c : context)
    if (c >= n) throw DomainError("cbow: context index out of range");
  for (WordIndex w : negatives) {
    if (w >= n) throw DomainError("cbow: negative index out of range");
    if (w == center) throw DomainError("cbow: negatives must not include the center word");
  }
}

}  // namespace

double cbow_loss(const EmbeddingMatrix& model, WordIndex center, std::span<const WordIndex> context,
                 std::span<const WordIndex> negatives) {
  check_step_args(model, center, context, negatives);
  const std::size_t dim = model.dim();
  std::vector<double> h(dim, 0.0);
  for (WordIndex c : context) {
    const auto row = model.input_vectors.row(c);
    for (std::size_t d = 0; d < dim; ++d) h[d] += row[d];
  }
  for (double& x : h) x /= static_cast<double>(context.size());
  auto score = [&](WordIndex w) {
    const auto row = model.output_vectors.row(w);
    double f = 0.0;
    for (std::size_t d = 0; d < dim; ++d) f += row[d] * h[d];
    return f;
  };
  double loss = neg_log_sigmoid(score(center));
  for (WordIndex w : negatives) loss += neg_log_sigmoid(-score(w));
  return loss;
}

CbowGradient cbow_gradient(const EmbeddingMatrix& model, WordIndex center,
                           std::span<const WordIndex> context, std::span<const WordIndex> negatives) {
  check_step_args(model, center, context, negatives);
  const std::size_t dim = model.dim();
  const double inv = 1.0 / static_cast<double>(context.size());
  std::vector<double> h(dim, 0.0);
  for (WordIndex c : context) {
    const auto row = model.input_vectors.row(c);
    for (std::size_t d = 0; d < dim; ++d) h[d] += row[d] * inv;
  }

  CbowGradient grad;
  std::vector<double> dh(dim, 0.0);
  auto output_slot = [&](WordIndex w) -> std::vector<double>& {
    auto it = std::find(grad.output_rows.begin(), grad.output_rows.end(), w);
    if (it != grad.output_rows.end()) return grad.output_grads[static_cast<std::size_t>(it - grad.output_rows.begin())];
    grad.output_rows.push_back(w);
    grad.output_grads.emplace_back(dim, 0.0);
    return grad.output_grads.back();
  };
  auto add_target = [&](WordIndex w, double label) {
    const auto row = model.output_vectors.row(w);
    double f = 0.0;
    for (std::size_t d = 0; d < dim; ++d) f += row[d] * h[d];
    grad.loss += label > 0.0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    // d/df of the loss term is sigmoid(f) - label (zero where the clamp is active).
    const bool clamped = std::abs(f) > kSigmoidClamp;
    const double df = clamped ? 0.0 : sigmoid(f) - label;
    auto& g = output_slot(w);
    for (std::size_t d = 0; d < dim; ++d) {
      g[d] += df * h[d];
      dh[d] += df * row[d];
    }
  };
  add_target(center, 1.0);
  for (WordIndex w : negatives) add_target(w, 0.0);

  for (WordIndex c : context) {
    auto it = std::find(grad.input_rows.begin(), grad.input_rows.end(), c);
    std::vector<double>* g;
    if (it == grad.input_rows.end()) {
      grad.input_rows.push_back(c);
      grad.input_grads.emplace_back(dim, 0.0);
      g = &grad.input_grads.back();
    } else {
      g = &grad.input_grads[static_cast<std::size_t>(it - grad.input_rows.begin())];
    }
    for (std::size_t d = 0; d < dim; ++d) (*g)[d] += dh[d] * inv;
  }
  return grad;
}

double cbow_step(EmbeddingMatrix& model, WordIndex center, std::span<const WordIndex> context,
                 std::span<const WordIndex> negatives, double lr) {
  check_step_args(model, center, context, negatives);
  Scratch scratch;
  return cbow_update<false>(model.input_vectors.data().data(), model.output_vectors.data().data(),
                            model.dim(), center, context, negatives, lr, scratch);
}

EmbeddingMatrix initialize_model(Vocabulary vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingMatrix model;
  const std::size_t n = vocab.size();
  model.vocab = std::move(vocab);
  model.input_vectors = Matrix(n, dim);
  model.output_vectors = Matrix(n, dim);
  Rng rng(seed);
  const double bound = 0.5 / static_cast<double>(dim);
  for (double& x : model.input_vectors.data()) x = rng.uniform(-bound, bound);
  return model;
}

namespace {

struct WorkerResult {
  double loss = 0.0;
  std::uint64_t updates = 0;
};

struct TrainingState {
  const CbowConfig& config;
  const std::vector<std::vector<WordIndex>>& sequences;
  const NegativeTable& negatives;
  std::vector<double> keep_probability;  // empty when subsampling is off
  std::uint64_t planned_words;
  std::atomic<std::uint64_t> processed{0};
};

template <bool Shared>
WorkerResult run_worker(EmbeddingMatrix& model, TrainingState& state, std::size_t first, std::size_t last,
                        std::uint64_t seed) {
  const CbowConfig& cfg = state.config;
  Rng rng(seed);
  Scratch scratch;
  WorkerResult result;
  std::vector<WordIndex> sentence, context, negs;
  double* input = model.input_vectors.data().data();
  double* output = model.output_vectors.data().data();
  const std::size_t dim = model.dim();
  const bool can_sample_negatives = model.vocab.size() > 1;

  std::uint64_t local = 0;
  double lr = cfg.initial_lr;
  auto refresh_lr = [&] {
    const std::uint64_t done = state.processed.fetch_add(local, std::memory_order_relaxed) + local;
    local = 0;
    const double progress = static_cast<double>(done) / static_cast<double>(state.planned_words + 1);
    lr = cfg.initial_lr * std::max(1e-4, 1.0 - progress);
  };

  for (std::size_t doc = first; doc < last; ++doc) {
    const auto& seq = state.sequences[doc];
    sentence.clear();
    if (state.keep_probability.empty()) {
      sentence.assign(seq.begin(), seq.end());
    } else {
      for (WordIndex w : seq)
        if (rng.uniform() < state.keep_probability[w]) sentence.push_back(w);
    }
    local += seq.size();
    for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
      const std::size_t b = 1 + static_cast<std::size_t>(rng.below(cfg.window));
      context.clear();
      const std::size_t lo = pos >= b ? pos - b : 0;
      const std::size_t hi = std::min(sentence.size(), pos + b + 1);
      for (std::size_t j = lo; j < hi; ++j)
        if (j != pos) context.push_back(sentence[j]);
      if (context.empty()) continue;
      const WordIndex center = sentence[pos];
      negs.clear();
      if (can_sample_negatives) {
        while (negs.size() < cfg.negatives) {
          const WordIndex w = state.negatives.sample(rng);
          if (w != center) negs.push_back(w);
        }
      }
      result.loss += cbow_update<Shared>(input, output, dim, center, context, negs, lr, scratch);
      ++result.updates;
    }
    if (local >= 1024) refresh_lr();
  }
  refresh_lr();
  return result;
}

// Contiguous document ranges with roughly equal token counts.
std::vector<std::size_t> shard_bounds(const std::vector<std::vector<WordIndex>>& sequences, std::size_t workers) {
  std::uint64_t total = 0;
  for (const auto& s : sequences) total += s.size();
  std::vector<std::size_t> bounds{0};
  std::uint64_t acc = 0;
  std::size_t doc = 0;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::uint64_t target = total * w / workers;
    while (doc < sequences.size() && acc < target) acc += sequences[doc++].size();
    bounds.push_back(doc);
  }
  bounds.push_back(sequences.size());
  return bounds;
}

}  // namespace

EmbeddingMatrix train_cbow(const std::vector<preprocess::ProcessedDocument>& corpus,
                           const CbowConfig& config, TrainingLog* log) {
  config.validate();
  std::uint64_t raw_tokens = 0;
  for (const auto& doc : corpus) raw_tokens += doc.tokens.size();
  if (raw_tokens < 2) throw DataError("corpus has fewer than 2 tokens");

  EmbeddingMatrix model = initialize_model(build_vocabulary(corpus, config.min_count), config.dim, config.seed);
  const NegativeTable table(model.vocab);

  std::vector<std::vector<WordIndex>> sequences;
  sequences.reserve(corpus.size());
  std::uint64_t words_per_epoch = 0;
  for (const auto& doc : corpus) {
    std::vector<WordIndex> seq;
    seq.reserve(doc.tokens.size());
    for (const auto& token : doc.tokens) {
      const auto i = model.vocab.find(token.text);
      if (i >= 0) seq.push_back(static_cast<WordIndex>(i));
    }
    words_per_epoch += seq.size();
    sequences.push_back(std::move(seq));
  }

  TrainingState state{config, sequences, table, {}, words_per_epoch * config.epochs};
  if (config.subsample) {
    const double total = static_cast<double>(model.vocab.total_count());
    const double threshold = config.subsample_threshold * total;
    state.keep_probability.resize(model.vocab.size());
    for (WordIndex i = 0; i < model.vocab.size(); ++i) {
      const double f = static_cast<double>(model.vocab.count(i));
      state.keep_probability[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
    }
  }

  const std::size_t workers = std::min<std::size_t>(config.workers, std::max<std::size_t>(1, sequences.size()));
  const auto bounds = shard_bounds(sequences, workers);
  TrainingLog local_log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<WorkerResult> results(workers);
    if (workers == 1) {
      results[0] = run_worker<false>(model, state, bounds[0], bounds[1], mix_seed(config.seed, epoch + 1));
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          results[w] = run_worker<true>(model, state, bounds[w], bounds[w + 1],
                                        mix_seed(config.seed, (epoch + 1) * 1000003ULL + w));
        });
      }
      for (auto& t : threads) t.join();
    }
    double loss = 0.0;
    std::uint64_t updates = 0;
    for (const auto& r : results) {
      loss += r.loss;
      updates += r.updates;
    }
    if (!std::isfinite(loss)) throw NumericalError("non-finite CBOW loss in epoch " + std::to_string(epoch + 1));
    local_log.epoch_mean_loss.push_back(updates ? loss / static_cast<double>(updates) : 0.0);
    local_log.updates += updates;
  }
  if (log) *log = std::move(local_log);
  return model;
}

}  // namespace csent::embeddings
