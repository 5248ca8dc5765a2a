#include "csent/cli.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csent/classifier.hpp"
#include "csent/config.hpp"
#include "csent/corpus.hpp"
#include "csent/embeddings.hpp"
#include "csent/error.hpp"
#include "csent/evaluation.hpp"
#include "csent/io.hpp"
#include "csent/preprocess.hpp"
#include "csent/unicode.hpp"

#ifndef CSENT_VERSION
#define CSENT_VERSION "0.0.0"
#endif
#ifndef CSENT_BUILD_TYPE
#define CSENT_BUILD_TYPE "unknown"
#endif

namespace csent::cli {

namespace {

namespace fs = std::filesystem;

// Pipeline-wide settings. Classifier keys come from ClassifierConfig; the
// embedding trainer's keys are prefixed with cbow_.
KeyValueConfig pipeline_config() {
  KeyValueConfig kv;
  classifier::ClassifierConfig::declare(kv);
  const embeddings::CbowConfig d;
  kv.declare("workers", std::to_string(d.workers));
  kv.declare("cbow_dim", std::to_string(d.dim));
  kv.declare("cbow_window", std::to_string(d.window));
  kv.declare("cbow_epochs", std::to_string(d.epochs));
  kv.declare("cbow_negatives", std::to_string(d.negatives));
  kv.declare("cbow_min_count", std::to_string(d.min_count));
  kv.declare("cbow_lr", "0.025");
  kv.declare("cbow_subsample", d.subsample ? "true" : "false");
  kv.declare("cbow_subsample_threshold", "0.001");
  return kv;
}

embeddings::CbowConfig cbow_config(const KeyValueConfig& kv) {
  embeddings::CbowConfig c;
  c.dim = kv.get_u64("cbow_dim");
  c.window = kv.get_u64("cbow_window");
  c.epochs = kv.get_u64("cbow_epochs");
  c.workers = kv.get_u64("workers");
  c.negatives = kv.get_u64("cbow_negatives");
  c.min_count = kv.get_u64("cbow_min_count");
  c.initial_lr = kv.get_double("cbow_lr");
  c.subsample = kv.get_bool("cbow_subsample");
  c.subsample_threshold = kv.get_double("cbow_subsample_threshold");
  c.seed = kv.get_u64("seed");
  c.validate();
  return c;
}

// Command-line values that override config keys, applied after parsing.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> bound;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    bound.emplace_back(app->add_option(flag, values[key], help), key);
  }
  void apply(KeyValueConfig& kv) const {
    for (const auto& [opt, key] : bound)
      if (opt->count() > 0) kv.set_override(key, values.at(key));
  }
};

std::string format_probabilities(const std::array<double, kNumClasses>& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f", p[0], p[1], p[2]);
  return buf;
}

preprocess::PreprocessConfig preprocessing(const std::string& en, const std::string& es,
                                           const std::string& contractions) {
  return preprocess::PreprocessConfig::from_files(en, es, contractions);
}

std::vector<classifier::LabeledRecord> read_labeled(const fs::path& path) {
  if (path.extension() == ".jsonl") return classifier::read_labeled_jsonl(path);
  return classifier::read_labeled_tsv(path);
}

// Prediction input: `id<TAB>text` or a labeled `id<TAB>label<TAB>text`.
std::vector<std::pair<std::string, std::string>> read_prediction_input(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> rows;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    if (io::trim(line).empty()) return;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(path.string(), number, "expected 'id<TAB>text'");
    std::string_view id = line.substr(0, tab);
    std::string_view rest = line.substr(tab + 1);
    const auto tab2 = rest.find('\t');
    if (tab2 != std::string_view::npos && parse_label(rest.substr(0, tab2))) rest = rest.substr(tab2 + 1);
    else if (number == 1 && io::trim(id) == "id") return;  // header
    if (!unicode::is_valid_utf8(rest)) throw ParseError(path.string(), number, "text is not valid UTF-8");
    rows.emplace_back(std::string(io::trim(id)), std::string(rest));
  });
  return rows;
}

struct Context {
  Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  KeyValueConfig kv = pipeline_config();
  std::string config_path;
  Overrides overrides;

  void resolve() {
    if (!config_path.empty()) kv.load_file(config_path);
    overrides.apply(kv);
  }
  void echo() {
    err << "# resolved configuration\n";
    kv.echo(err);
  }
};

// --- subcommands ----------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string keywords, spanglish, portuguese, proper_nouns, output;
};

void run_ingest(Context& ctx, const IngestArgs& a) {
  auto load = [](const std::string& p) { return p.empty() ? std::vector<std::string>{} : io::read_word_list(p); };
  const corpus::KeywordList keywords =
      corpus::build_keyword_list(load(a.keywords), load(a.spanglish), load(a.portuguese), load(a.proper_nouns));
  ctx.err << "keywords: " << keywords.size() << "\n";

  io::AtomicFile file(a.output);
  corpus::CodeSwitchFilter filter(keywords);
  std::size_t kept = 0;
  for (const auto& input : a.inputs) {
    std::size_t reported = 0;
    const auto summary = corpus::ingest_jsonl(
        input,
        [&](corpus::RawTweet&& tweet) {
          if (!filter.accept(tweet)) return;
          file.stream() << corpus::tweet_to_json(tweet) << '\n';
          ++kept;
        },
        [&](const corpus::SkipRecord& skip) {
          if (++reported <= 20) ctx.err << input << ":" << skip.line << ": skipped: " << skip.reason << "\n";
        });
    ctx.err << input << ": " << summary.lines << " lines, " << summary.accepted << " parsed, " << summary.skipped
            << " skipped\n";
  }
  file.commit();
  ctx.err << "kept " << kept << " code-switched tweets\n";
}

struct PreprocessArgs {
  std::string input, output, en, es, contractions;
};

void run_preprocess(Context& ctx, const PreprocessArgs& a) {
  const auto config = preprocessing(a.en, a.es, a.contractions);
  io::AtomicFile file(a.output);
  std::size_t docs = 0, empty = 0;
  corpus::ingest_jsonl(a.input, [&](corpus::RawTweet&& tweet) {
    const auto doc = preprocess::preprocess_document(tweet, config);
    empty += doc.flagged_empty() ? 1 : 0;
    ++docs;
    file.stream() << preprocess::document_to_json(doc) << '\n';
  });
  file.commit();
  ctx.err << docs << " documents, " << empty << " empty after preprocessing\n";
}

struct EmbedArgs {
  std::string input, output;
};

void run_train_embeddings(Context& ctx, const EmbedArgs& a) {
  ctx.echo();
  const auto config = cbow_config(ctx.kv);
  const auto corpus = preprocess::read_documents(a.input);
  embeddings::TrainingLog log;
  const auto model = embeddings::train_cbow(corpus, config, &log);
  for (std::size_t e = 0; e < log.epoch_mean_loss.size(); ++e)
    ctx.err << "epoch " << e + 1 << " mean loss " << log.epoch_mean_loss[e] << "\n";
  embeddings::save_text(model, a.output);
  ctx.err << "vocabulary " << model.vocab.size() << ", dim " << model.dim() << ", " << log.updates
          << " updates\n";
}

struct ExploreArgs {
  std::string model, word;
  std::size_t k = 10;
};

void run_explore(Context& ctx, const ExploreArgs& a) {
  const auto model = embeddings::load_text(a.model);
  // Vocabulary entries are normalized, but exact matches win so that
  // corpora built outside `preprocess` stay queryable.
  const std::string word = model.vocab.contains(a.word) ? a.word : unicode::normalize_word(a.word);
  for (const auto& n : embeddings::top_k_neighbors(model, word, a.k)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", n.score);
    ctx.out << n.word << '\t' << buf << '\n';
  }
}

struct TrainClassifierArgs {
  std::string embeddings, train, dev, output, report, en, es, contractions;
};

void run_train_classifier(Context& ctx, const TrainClassifierArgs& a) {
  ctx.echo();
  const auto config = classifier::ClassifierConfig::from(ctx.kv);
  const auto pretrained = embeddings::load_text(a.embeddings);
  auto model = classifier::create_model(config, pretrained, preprocessing(a.en, a.es, a.contractions));
  const auto train_set = classifier::encode_records(model, read_labeled(a.train));
  const auto dev_set = classifier::encode_records(model, read_labeled(a.dev));
  ctx.err << "train " << train_set.size() << " examples, dev " << dev_set.size() << " examples\n";

  auto result = classifier::train(std::move(model), train_set, dev_set, &ctx.err);
  ctx.err << "best epoch " << result.log.best_epoch << (result.log.stopped_early ? " (stopped early)" : "")
          << "\n";
  classifier::save_model(result.model, a.output);

  const auto dev_eval = classifier::evaluate(result.model, dev_set);
  std::vector<SentimentLabel> golds;
  for (const auto& ex : dev_set) golds.push_back(ex.label);
  const auto report = evaluation::metrics(evaluation::confusion(golds, dev_eval.predictions));
  ctx.err << "dev metrics\n" << evaluation::render_text(report);
  if (!a.report.empty()) {
    io::AtomicFile file(a.report);
    file.stream() << evaluation::render_json(report) << '\n';
    file.commit();
  }
}

struct PredictArgs {
  std::string model, text, input, output;
};

void run_predict(Context& ctx, const PredictArgs& a) {
  if (a.text.empty() == a.input.empty()) throw UsageError("predict needs exactly one of --text or --input");
  const auto model = classifier::load_model(a.model);
  if (!a.text.empty()) {
    if (!a.input.empty() || !a.output.empty()) throw UsageError("--text cannot be combined with --input/--output");
    if (!unicode::is_valid_utf8(a.text)) throw DataError("--text is not valid UTF-8");
    const auto p = classifier::predict(model, a.text);
    if (p.flagged_empty) ctx.err << "warning: no tokens left after preprocessing\n";
    ctx.out << to_string(p.label) << '\t' << format_probabilities(p.probabilities) << '\n';
    return;
  }
  if (a.output.empty()) throw UsageError("--input requires --output");
  const auto rows = read_prediction_input(a.input);
  io::AtomicFile file(a.output);
  file.stream() << "id\tlabel\tpositive\tneutral\tnegative\n";
  std::size_t empty = 0;
  for (const auto& [id, text] : rows) {
    const auto p = classifier::predict(model, text);
    empty += p.flagged_empty ? 1 : 0;
    file.stream() << id << '\t' << to_string(p.label) << '\t' << format_probabilities(p.probabilities) << '\n';
  }
  file.commit();
  ctx.err << rows.size() << " predictions";
  if (empty > 0) ctx.err << " (" << empty << " with no tokens after preprocessing)";
  ctx.err << "\n";
}

struct EvaluateArgs {
  std::string gold, pred, format = "text";
};

void run_evaluate(Context& ctx, const EvaluateArgs& a) {
  const auto [golds, preds] =
      evaluation::join_by_id(evaluation::read_id_labels(a.gold), evaluation::read_id_labels(a.pred));
  const auto report = evaluation::metrics(evaluation::confusion(golds, preds));
  for (const auto& w : report.warnings) ctx.err << "warning: " << w << "\n";
  if (a.format == "json") ctx.out << evaluation::render_json(report) << '\n';
  else ctx.out << evaluation::render_text(report);
}

void run_version(Context& ctx) {
  ctx.out << "csent " << CSENT_VERSION << " (" << CSENT_BUILD_TYPE << ", "
#if defined(__clang__)
          << "clang " << __clang_major__ << "." << __clang_minor__
#elif defined(__GNUC__)
          << "gcc " << __GNUC__ << "." << __GNUC_MINOR__
#else
          << "unknown compiler"
#endif
          << ", C++" << __cplusplus / 100 % 100 << ")\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Code-switched tweet sentiment pipeline", "csent"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx(out, err);
  app.add_option("--config", ctx.config_path, "key = value settings file")->check(CLI::ExistingFile);
  ctx.overrides.bind(&app, "--seed", "seed", "random seed for every stage");
  ctx.overrides.bind(&app, "--workers", "workers", "embedding training threads");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "select code-switched tweets from JSONL dumps");
  ingest_cmd->add_option("--input", ingest.inputs, "tweet JSONL files")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--keywords", ingest.keywords, "Spanish keyword candidates")->required();
  ingest_cmd->add_option("--spanglish", ingest.spanglish, "Spanglish keyword candidates (exempt from the Portuguese filter)");
  ingest_cmd->add_option("--portuguese-dict", ingest.portuguese, "Portuguese word list")->required();
  ingest_cmd->add_option("--proper-nouns", ingest.proper_nouns, "proper nouns to exclude")->required();
  ingest_cmd->add_option("--output", ingest.output, "selected tweets (JSONL)")->required();

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "tokenize and clean tweets");
  pre_cmd->add_option("--input", pre.input, "tweet JSONL")->required();
  pre_cmd->add_option("--output", pre.output, "token JSONL")->required();
  pre_cmd->add_option("--en-stopwords", pre.en, "English stopword list (default: built in)");
  pre_cmd->add_option("--es-stopwords", pre.es, "Spanish stopword list (default: built in)");
  pre_cmd->add_option("--contractions", pre.contractions, "contraction TSV (default: built in)");

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("train-embeddings", "train CBOW word vectors");
  embed_cmd->add_option("--input", embed.input, "token JSONL")->required();
  embed_cmd->add_option("--output", embed.output, "word2vec text file")->required();
  ctx.overrides.bind(embed_cmd, "--dim", "cbow_dim", "vector size");
  ctx.overrides.bind(embed_cmd, "--window", "cbow_window", "maximum context window");
  ctx.overrides.bind(embed_cmd, "--epochs", "cbow_epochs", "passes over the corpus");
  ctx.overrides.bind(embed_cmd, "--negatives", "cbow_negatives", "negative samples per update");
  ctx.overrides.bind(embed_cmd, "--min-count", "cbow_min_count", "minimum word frequency");
  ctx.overrides.bind(embed_cmd, "--lr", "cbow_lr", "initial learning rate");
  ctx.overrides.bind(embed_cmd, "--subsample", "cbow_subsample", "frequent-word subsampling (true/false)");

  ExploreArgs explore;
  auto* explore_cmd = app.add_subcommand("explore", "nearest neighbours of a word");
  explore_cmd->add_option("--model", explore.model, "word2vec text file")->required();
  explore_cmd->add_option("--word", explore.word, "query word")->required();
  explore_cmd->add_option("--k", explore.k, "number of neighbours")->check(CLI::PositiveNumber);

  TrainClassifierArgs tc;
  auto* tc_cmd = app.add_subcommand("train-classifier", "train the BiLSTM sentiment classifier");
  tc_cmd->add_option("--embeddings", tc.embeddings, "pretrained word2vec text file")->required();
  tc_cmd->add_option("--train", tc.train, "labeled TSV (or .jsonl)")->required();
  tc_cmd->add_option("--dev", tc.dev, "labeled TSV (or .jsonl) for early stopping")->required();
  tc_cmd->add_option("--output", tc.output, "model file")->required();
  tc_cmd->add_option("--report", tc.report, "write dev metrics as JSON");
  tc_cmd->add_option("--en-stopwords", tc.en, "English stopword list (default: built in)");
  tc_cmd->add_option("--es-stopwords", tc.es, "Spanish stopword list (default: built in)");
  tc_cmd->add_option("--contractions", tc.contractions, "contraction TSV (default: built in)");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "label text with a trained model");
  pred_cmd->add_option("--model", pred.model, "model file")->required();
  auto* text_opt = pred_cmd->add_option("--text", pred.text, "single text to label");
  auto* input_opt = pred_cmd->add_option("--input", pred.input, "TSV of id<TAB>text");
  pred_cmd->add_option("--output", pred.output, "prediction TSV");
  text_opt->excludes(input_opt);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "score predictions against gold labels");
  ev_cmd->add_option("--gold", ev.gold, "TSV with id<TAB>label")->required();
  ev_cmd->add_option("--pred", ev.pred, "TSV with id<TAB>label")->required();
  ev_cmd->add_option("--format", ev.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* version_cmd = app.add_subcommand("version", "print version and build information");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (version_cmd->parsed()) {
      run_version(ctx);
      return kExitOk;
    }
    ctx.resolve();
    if (ingest_cmd->parsed()) run_ingest(ctx, ingest);
    else if (pre_cmd->parsed()) run_preprocess(ctx, pre);
    else if (embed_cmd->parsed()) run_train_embeddings(ctx, embed);
    else if (explore_cmd->parsed()) run_explore(ctx, explore);
    else if (tc_cmd->parsed()) run_train_classifier(ctx, tc);
    else if (pred_cmd->parsed()) run_predict(ctx, pred);
    else if (ev_cmd->parsed()) run_evaluate(ctx, ev);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace csent::cli
