#include <doctest.h>

#include "csent/error.hpp"
#include "csent/evaluation.hpp"
#include "csent/random.hpp"
#include "oracles.hpp"

using namespace csent;
using namespace csent::evaluation;

namespace {

constexpr auto P = SentimentLabel::positive;
constexpr auto U = SentimentLabel::neutral;
constexpr auto N = SentimentLabel::negative;

ConfusionMatrix table5() { return ConfusionMatrix({{{1042, 457, 0}, {639, 354, 0}, {0, 0, 506}}}); }

std::vector<SentimentLabel> random_labels(Rng& rng, std::size_t n) {
  std::vector<SentimentLabel> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<SentimentLabel>(rng.below(3)));
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("confusion matrix") {
    const std::vector<SentimentLabel> gold{P, P, U, N, N}, pred{P, U, U, N, P};
    const auto m = confusion(gold, pred);
    CHECK(m.at(P, U) == 1);
    CHECK(m.at(N, P) == 1);
    CHECK(m.total() == 5);
    CHECK(confusion(pred, gold) == m.transposed());
    CHECK(confusion(gold, gold).trace() == 5);
    const std::vector<SentimentLabel> shorter{P};
    CHECK_THROWS_AS(confusion(gold, shorter), DataError);
    CHECK_THROWS_AS(confusion({}, {}), DataError);
  }

  TEST_CASE("one-vs-rest views of the reference matrix") {
    const auto pos = table5().one_vs_rest(P);
    CHECK(pos.tp == 1042);
    CHECK(pos.fn == 457);
    CHECK(pos.fp == 639);
    CHECK(pos.tn == 860);
    const auto neu = table5().one_vs_rest(U);
    CHECK(neu.tp == 354);
    CHECK(neu.fn == 639);
    CHECK(neu.fp == 457);
    const auto neg = table5().one_vs_rest(N);
    CHECK(neg.tp == 506);
    CHECK(neg.fp + neg.fn == 0);
    CHECK(table5().total() == 2998);
  }

  TEST_CASE("reference metrics") {
    const auto r = metrics(table5());
    CHECK(r[P].precision == doctest::Approx(1042.0 / 1681.0));
    CHECK(r[P].recall == doctest::Approx(1042.0 / 1499.0));
    CHECK(round_half_up(r[P].precision, 2) == 0.62);
    CHECK(round_half_up(r[P].recall, 2) == 0.70);
    CHECK(round_half_up(r[P].f1, 2) == 0.66);
    CHECK(round_half_up(r[U].precision, 2) == 0.44);
    CHECK(round_half_up(r[U].recall, 2) == 0.36);
    CHECK(round_half_up(r[U].f1, 2) == 0.39);
    CHECK(r[N].f1 == 1.0);
    CHECK(round_half_up(r.macro.precision, 2) == 0.69);
    CHECK(round_half_up(r.macro.recall, 2) == 0.68);
    CHECK(round_half_up(r.macro.f1, 2) == 0.68);
    CHECK(r.warnings.empty());
    CHECK(render_text(r) == testing::read_file(testing::data_path("golden/table6_report.txt")));
  }

  TEST_CASE("rounding") {
    CHECK(round_half_up(0.655, 2) == 0.66);
    CHECK(round_half_up(0.645, 2) == 0.65);
    CHECK(round_half_up(0.6449, 2) == 0.64);
    CHECK(round_half_up(1.0, 2) == 1.0);
  }

  TEST_CASE("undefined ratios are zero with a warning") {
    const std::vector<SentimentLabel> gold{P, P, U}, pred{P, P, P};
    const auto r = metrics(confusion(gold, pred));
    CHECK(r[U].precision == 0.0);
    CHECK(r[N].recall == 0.0);
    CHECK(r.warnings.size() == 3);
    CHECK_THROWS_AS(metrics(ConfusionMatrix()), DomainError);
  }

  TEST_CASE("perfect predictions") {
    const std::vector<SentimentLabel> gold{P, U, N, N};
    const auto r = metrics(confusion(gold, gold));
    for (auto label : {P, U, N}) {
      CHECK(r[label].precision == 1.0);
      CHECK(r[label].f1 == 1.0);
    }
    CHECK(r.accuracy == 1.0);
    CHECK(render_text(r).find("0.") == std::string::npos);
  }

  TEST_CASE("invariants on random data") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng.below(200);
      auto gold = random_labels(rng, n), pred = random_labels(rng, n);
      const auto m = confusion(gold, pred);
      const auto r = metrics(m);
      std::uint64_t tp = 0;
      for (auto label : {P, U, N}) {
        const auto& c = r[label];
        CHECK((c.precision >= 0.0 && c.precision <= 1.0));
        CHECK((c.recall >= 0.0 && c.recall <= 1.0));
        CHECK(c.f1 <= std::min(2 * c.precision, 2 * c.recall) + 1e-12);
        tp += m.one_vs_rest(label).tp;
      }
      CHECK(r.accuracy == doctest::Approx(static_cast<double>(tp) / static_cast<double>(n)));
      CHECK(r.accuracy == doctest::Approx(static_cast<double>(m.trace()) / static_cast<double>(m.total())));

      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      rng.shuffle(order.begin(), order.end());
      std::vector<SentimentLabel> g2, p2;
      for (auto i : order) g2.push_back(gold[i]), p2.push_back(pred[i]);
      CHECK(confusion(g2, p2) == m);
    }
  }

  TEST_CASE("json schema round trip") {
    const auto r = metrics(table5());
    const auto back = parse_json(render_json(r));
    CHECK(back.matrix == r.matrix);
    CHECK(back[P].precision == r[P].precision);
    CHECK(back.weighted.f1 == r.weighted.f1);
    CHECK(render_text(back) == render_text(r));
    CHECK_THROWS_AS(parse_json("[]"), DataError);
    CHECK_THROWS_AS(parse_json("{\"classes\":{}}"), DataError);
  }

  TEST_CASE("label files") {
    const auto gold = read_id_labels(testing::data_path("fixtures/table5_gold.tsv"));
    const auto pred = read_id_labels(testing::data_path("fixtures/table5_pred.tsv"));
    CHECK(gold.size() == 2998);
    const auto [g, p] = join_by_id(gold, pred);
    CHECK(confusion(g, p) == table5());

    testing::TempDir dir;
    testing::write_file(dir / "pairs.tsv", "gold\tpred\npositive\tneutral\nnegative\tnegative\n");
    const auto pairs = read_pairs_tsv(dir / "pairs.tsv");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair{P, U});
    testing::write_file(dir / "bad.tsv", "positive\tneutral\nnope\tneutral\n");
    CHECK_THROWS_AS(read_pairs_tsv(dir / "bad.tsv"), ParseError);

    const std::vector<std::pair<std::string, SentimentLabel>> golds{{"a", P}, {"b", U}};
    const std::vector<std::pair<std::string, SentimentLabel>> missing{{"a", P}};
    CHECK_THROWS_AS(join_by_id(golds, missing), DataError);
    const std::vector<std::pair<std::string, SentimentLabel>> dup{{"a", P}, {"a", N}, {"b", U}};
    CHECK_THROWS_AS(join_by_id(golds, dup), DataError);
  }
}
