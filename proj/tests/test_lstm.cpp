#include <doctest.h>

#include "csent/lstm.hpp"
#include "csent/random.hpp"
#include "oracles.hpp"

using namespace csent;
using namespace csent::lstm;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 0.5) {
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

LstmParams random_params(Eigen::Index in, Eigen::Index h, Rng& rng, double scale = 0.5) {
  return {random_matrix(in, 4 * h, rng, scale), random_matrix(h, 4 * h, rng, scale),
          random_matrix(1, 4 * h, rng, scale)};
}

// Scalar objective over a direction's outputs: sum_t <w_t, h_out[t]>.
double objective(const LstmParams& p, const std::vector<MatrixXd>& inputs, const std::vector<VectorXd>& mask,
                 bool reverse, const std::vector<MatrixXd>& weights) {
  DirectionCache cache;
  run_direction(p, inputs, mask, reverse, cache);
  double s = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) s += (cache.h_out[t].array() * weights[t].array()).sum();
  return s;
}

}  // namespace

TEST_SUITE("lstm") {
  TEST_CASE("zero parameters and state give zero output") {
    const auto p = LstmParams::zeros(3, 2);
    const auto out = lstm_cell(MatrixXd::Zero(1, 3), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 2), p);
    CHECK(out.h.isZero(0.0));
    CHECK(out.c.isZero(0.0));
  }

  TEST_CASE("saturated forget gate keeps the cell") {
    Rng rng(3);
    auto p = random_params(3, 2, rng);
    p.b.block(0, 2, 1, 2).setConstant(30.0);  // forget block
    const MatrixXd x = random_matrix(1, 3, rng), h = random_matrix(1, 2, rng), c = random_matrix(1, 2, rng);
    const auto out = lstm_cell(x, h, c, p);
    // recompute i and g independently
    const MatrixXd z = x * p.W + h * p.U + p.b;
    for (int k = 0; k < 2; ++k) {
      const double i = 1.0 / (1.0 + std::exp(-z(0, k)));
      const double g = std::tanh(z(0, 4 + k));
      CHECK(std::abs(out.c(0, k) - (c(0, k) + i * g)) <= 1e-9);
    }
  }

  TEST_CASE("cell matches the textbook equations") {
    Rng rng(8);
    const auto p = random_params(4, 3, rng);
    const MatrixXd x = random_matrix(2, 4, rng), h = random_matrix(2, 3, rng), c = random_matrix(2, 3, rng);
    const auto out = lstm_cell(x, h, c, p);
    MatrixXd z = x * p.W + h * p.U;
    z.rowwise() += p.b.row(0);
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (int r = 0; r < 2; ++r)
      for (int k = 0; k < 3; ++k) {
        const double i = sig(z(r, k)), f = sig(z(r, 3 + k)), g = std::tanh(z(r, 6 + k)), o = sig(z(r, 9 + k));
        const double cn = f * c(r, k) + i * g;
        CHECK(out.c(r, k) == doctest::Approx(cn).epsilon(1e-14));
        CHECK(out.h(r, k) == doctest::Approx(o * std::tanh(cn)).epsilon(1e-14));
      }
  }

  TEST_CASE("masked steps carry state") {
    Rng rng(4);
    const auto p = random_params(2, 3, rng);
    std::vector<MatrixXd> inputs{random_matrix(1, 2, rng), random_matrix(1, 2, rng), random_matrix(1, 2, rng)};
    std::vector<VectorXd> mask{VectorXd::Ones(1), VectorXd::Zero(1), VectorXd::Ones(1)};
    DirectionCache with_gap;
    run_direction(p, inputs, mask, false, with_gap);
    CHECK(with_gap.h_out[1] == with_gap.h_out[0]);

    std::vector<MatrixXd> compact{inputs[0], inputs[2]};
    std::vector<VectorXd> ones{VectorXd::Ones(1), VectorXd::Ones(1)};
    DirectionCache dense;
    run_direction(p, compact, ones, false, dense);
    CHECK(dense.h_out[1].isApprox(with_gap.h_out[2], 1e-15));
  }

  TEST_CASE("direction backprop matches finite differences") {
    for (bool reverse : {false, true}) {
      Rng rng(reverse ? 11 : 12);
      auto p = random_params(3, 2, rng, 0.8);
      std::vector<MatrixXd> inputs, weights;
      for (int t = 0; t < 4; ++t) {
        inputs.push_back(random_matrix(2, 3, rng, 1.0));
        weights.push_back(random_matrix(2, 2, rng, 1.0));
      }
      VectorXd m0(2), m1(2);
      m0 << 0, 1;
      m1 << 1, 1;
      const std::vector<VectorXd> mask{m0, m1, m1, m0};

      DirectionCache cache;
      run_direction(p, inputs, mask, reverse, cache);
      auto grad = LstmParams::zeros(3, 2);
      std::vector<MatrixXd> d_inputs;
      backprop_direction(p, inputs, mask, cache, weights, grad, d_inputs);

      const double eps = 1e-6;
      double worst = 0.0;
      for (auto [param, g] : {std::pair{&p.W, &grad.W}, std::pair{&p.U, &grad.U}, std::pair{&p.b, &grad.b}})
        for (Eigen::Index i = 0; i < param->size(); ++i) {
          const double saved = param->data()[i];
          param->data()[i] = saved + eps;
          const double up = objective(p, inputs, mask, reverse, weights);
          param->data()[i] = saved - eps;
          const double down = objective(p, inputs, mask, reverse, weights);
          param->data()[i] = saved;
          worst = std::max(worst, testing::relative_error(g->data()[i], (up - down) / (2 * eps)));
        }
      for (std::size_t t = 0; t < inputs.size(); ++t)
        for (Eigen::Index i = 0; i < inputs[t].size(); ++i) {
          const double saved = inputs[t].data()[i];
          inputs[t].data()[i] = saved + eps;
          const double up = objective(p, inputs, mask, reverse, weights);
          inputs[t].data()[i] = saved - eps;
          const double down = objective(p, inputs, mask, reverse, weights);
          inputs[t].data()[i] = saved;
          worst = std::max(worst, testing::relative_error(d_inputs[t].data()[i], (up - down) / (2 * eps)));
        }
      CAPTURE(reverse);
      CHECK(worst <= 1e-4);
    }
  }
}
