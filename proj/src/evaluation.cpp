#include "csent/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "csent/error.hpp"
#include "csent/io.hpp"

namespace csent::evaluation {

using nlohmann::json;

namespace {

constexpr std::array<SentimentLabel, kNumClasses> kLabels{SentimentLabel::positive, SentimentLabel::neutral,
                                                          SentimentLabel::negative};

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts_)
    for (auto c : row) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) n += counts_[i][i];
  return n;
}

OneVsRest ConfusionMatrix::one_vs_rest(SentimentLabel label) const {
  const auto c = static_cast<std::size_t>(label);
  OneVsRest v;
  v.tp = counts_[c][c];
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (k == c) continue;
    v.fn += counts_[c][k];
    v.fp += counts_[k][c];
  }
  v.tn = total() - v.tp - v.fn - v.fp;
  return v;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  Counts t{};
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t j = 0; j < kNumClasses; ++j) t[j][i] = counts_[i][j];
  return ConfusionMatrix(t);
}

ConfusionMatrix confusion(std::span<const SentimentLabel> golds, std::span<const SentimentLabel> preds) {
  if (golds.size() != preds.size())
    throw DataError("gold and predicted label counts differ (" + std::to_string(golds.size()) + " vs " +
                    std::to_string(preds.size()) + ")");
  if (golds.empty()) throw DataError("no labels to evaluate");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < golds.size(); ++i) ++m.at(golds[i], preds[i]);
  return m;
}

MetricsReport metrics(const ConfusionMatrix& matrix) {
  MetricsReport r;
  r.matrix = matrix;
  r.total = matrix.total();
  if (r.total == 0) throw DomainError("confusion matrix is empty");
  for (SentimentLabel label : kLabels) {
    const OneVsRest v = matrix.one_vs_rest(label);
    ClassMetrics& m = r.classes[static_cast<std::size_t>(label)];
    m.support = v.tp + v.fn;
    m.precision = ratio(v.tp, v.tp + v.fp);
    m.recall = ratio(v.tp, v.tp + v.fn);
    if (v.tp + v.fp == 0)
      r.warnings.push_back(std::string("precision undefined for ") + to_string(label) + " (no predictions); set to 0");
    if (v.tp + v.fn == 0)
      r.warnings.push_back(std::string("recall undefined for ") + to_string(label) + " (no gold examples); set to 0");
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  for (const ClassMetrics& m : r.classes) {
    r.macro.precision += m.precision / kNumClasses;
    r.macro.recall += m.recall / kNumClasses;
    r.macro.f1 += m.f1 / kNumClasses;
    const double w = static_cast<double>(m.support) / static_cast<double>(r.total);
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
  }
  r.accuracy = ratio(matrix.trace(), r.total);
  return r;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge absorbs representation error in values such as 0.655 that are
  // exactly on the boundary in decimal.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

namespace {

std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(x, 2));
  return buf;
}

std::string row(const std::string& name, const std::string& p, const std::string& r, const std::string& f,
                std::uint64_t support) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%12s %10s %10s %10s %10llu\n", name.c_str(), p.c_str(), r.c_str(), f.c_str(),
                static_cast<unsigned long long>(support));
  return buf;
}

}  // namespace

std::string render_text(const MetricsReport& report) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%12s %10s %10s %10s %10s\n", "", "precision", "recall", "f1-score", "support");
  out += buf;
  out += '\n';
  for (SentimentLabel label : kLabels) {
    const ClassMetrics& m = report[label];
    out += row(to_string(label), fixed2(m.precision), fixed2(m.recall), fixed2(m.f1), m.support);
  }
  out += '\n';
  out += row("macro avg", fixed2(report.macro.precision), fixed2(report.macro.recall), fixed2(report.macro.f1),
             report.total);
  out += row("weighted avg", fixed2(report.weighted.precision), fixed2(report.weighted.recall),
             fixed2(report.weighted.f1), report.total);
  out += row("accuracy", "", "", fixed2(report.accuracy), report.total);

  out += "\nconfusion (rows: actual, columns: predicted)\n";
  for (SentimentLabel label : kLabels) {
    const OneVsRest v = report.matrix.one_vs_rest(label);
    const std::string name = to_string(label);
    std::snprintf(buf, sizeof buf, "%-18s %12s %12s\n", "", ("Not " + name).c_str(), name.c_str());
    out += buf;
    std::snprintf(buf, sizeof buf, "%-18s %12llu %12llu\n", ("True Not " + name).c_str(),
                  static_cast<unsigned long long>(v.tn), static_cast<unsigned long long>(v.fp));
    out += buf;
    std::snprintf(buf, sizeof buf, "%-18s %12llu %12llu\n", ("True " + name).c_str(),
                  static_cast<unsigned long long>(v.fn), static_cast<unsigned long long>(v.tp));
    out += buf;
  }
  for (const auto& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string render_json(const MetricsReport& report) {
  json classes = json::object();
  for (SentimentLabel label : kLabels) {
    const ClassMetrics& m = report[label];
    classes[to_string(label)] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  json confusion = json::array();
  for (const auto& r : report.matrix.counts()) confusion.push_back(r);
  json out = {
      {"classes", classes},
      {"macro", {{"precision", report.macro.precision}, {"recall", report.macro.recall}, {"f1", report.macro.f1}}},
      {"weighted",
       {{"precision", report.weighted.precision}, {"recall", report.weighted.recall}, {"f1", report.weighted.f1}}},
      {"accuracy", report.accuracy},
      {"total", report.total},
      {"confusion", confusion},
      {"warnings", report.warnings},
  };
  return out.dump(2);
}

MetricsReport parse_json(const std::string& json_text) {
  const json in = json::parse(json_text, nullptr, false);
  if (in.is_discarded() || !in.is_object()) throw DataError("metrics report is not a JSON object");
  try {
    MetricsReport r;
    for (SentimentLabel label : kLabels) {
      const json& c = in.at("classes").at(to_string(label));
      r.classes[static_cast<std::size_t>(label)] = {c.at("precision").get<double>(), c.at("recall").get<double>(),
                                                    c.at("f1").get<double>(), c.at("support").get<std::uint64_t>()};
    }
    for (auto [key, avg] : {std::pair{"macro", &r.macro}, std::pair{"weighted", &r.weighted}}) {
      const json& a = in.at(key);
      *avg = {a.at("precision").get<double>(), a.at("recall").get<double>(), a.at("f1").get<double>()};
    }
    r.accuracy = in.at("accuracy").get<double>();
    r.total = in.at("total").get<std::uint64_t>();
    ConfusionMatrix::Counts counts{};
    const json& m = in.at("confusion");
    for (std::size_t i = 0; i < kNumClasses; ++i)
      for (std::size_t j = 0; j < kNumClasses; ++j) counts[i][j] = m.at(i).at(j).get<std::uint64_t>();
    r.matrix = ConfusionMatrix(counts);
    r.warnings = in.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

std::vector<std::pair<SentimentLabel, SentimentLabel>> read_pairs_tsv(const std::filesystem::path& path) {
  std::vector<std::pair<SentimentLabel, SentimentLabel>> pairs;
  bool first = true;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    const bool was_first = std::exchange(first, false);
    if (io::trim(line).empty()) return;
    const auto fields = io::split(line, '\t');
    const auto gold = fields.size() >= 2 ? parse_label(fields[0]) : std::nullopt;
    const auto pred = fields.size() >= 2 ? parse_label(fields[1]) : std::nullopt;
    if (!gold || !pred) {
      if (was_first) return;
      throw ParseError(path.string(), number, "expected 'gold<TAB>predicted' labels");
    }
    pairs.emplace_back(*gold, *pred);
  });
  return pairs;
}

std::vector<std::pair<std::string, SentimentLabel>> read_id_labels(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, SentimentLabel>> out;
  bool first = true;
  io::for_each_line(path, [&](std::size_t number, std::string_view line) {
    const bool was_first = std::exchange(first, false);
    if (io::trim(line).empty()) return;
    const auto fields = io::split(line, '\t');
    const auto label = fields.size() >= 2 ? parse_label(fields[1]) : std::nullopt;
    if (!label) {
      if (was_first) return;
      throw ParseError(path.string(), number, "expected 'id<TAB>label'");
    }
    out.emplace_back(std::string(io::trim(fields[0])), *label);
  });
  return out;
}

std::pair<std::vector<SentimentLabel>, std::vector<SentimentLabel>> join_by_id(
    const std::vector<std::pair<std::string, SentimentLabel>>& golds,
    const std::vector<std::pair<std::string, SentimentLabel>>& preds) {
  std::unordered_map<std::string, SentimentLabel> by_id;
  for (const auto& [id, label] : preds)
    if (!by_id.emplace(id, label).second) throw DataError("duplicate prediction id '" + id + "'");
  std::pair<std::vector<SentimentLabel>, std::vector<SentimentLabel>> out;
  std::unordered_map<std::string, bool> seen;
  for (const auto& [id, label] : golds) {
    if (!seen.emplace(id, true).second) throw DataError("duplicate gold id '" + id + "'");
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("no prediction for id '" + id + "'");
    out.first.push_back(label);
    out.second.push_back(it->second);
  }
  return out;
}

}  // namespace csent::evaluation
