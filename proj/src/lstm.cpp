#include "csent/lstm.hpp"

namespace csent::lstm {

namespace {

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

struct StepActivations {
  MatrixXd gates;
  MatrixXd c_new;
  MatrixXd tanh_c;
  MatrixXd h_new;
};

StepActivations step(const MatrixXd& x, const MatrixXd& h_prev, const MatrixXd& c_prev, const LstmParams& p) {
  const Eigen::Index H = p.hidden();
  const Eigen::Index B = x.rows();
  MatrixXd z = x * p.W + h_prev * p.U;
  z.rowwise() += p.b.row(0);

  StepActivations a;
  a.gates.resize(B, 4 * H);
  a.gates.leftCols(H) = sigmoid(z.leftCols(H));
  a.gates.middleCols(H, H) = sigmoid(z.middleCols(H, H));
  a.gates.middleCols(2 * H, H) = z.middleCols(2 * H, H).array().tanh().matrix();
  a.gates.rightCols(H) = sigmoid(z.rightCols(H));

  const auto i = a.gates.leftCols(H).array();
  const auto f = a.gates.middleCols(H, H).array();
  const auto g = a.gates.middleCols(2 * H, H).array();
  const auto o = a.gates.rightCols(H).array();
  a.c_new = (f * c_prev.array() + i * g).matrix();
  a.tanh_c = a.c_new.array().tanh().matrix();
  a.h_new = (o * a.tanh_c.array()).matrix();
  return a;
}

}  // namespace

LstmParams LstmParams::zeros(Eigen::Index input_dim, Eigen::Index hidden) {
  return {MatrixXd::Zero(input_dim, 4 * hidden), MatrixXd::Zero(hidden, 4 * hidden),
          MatrixXd::Zero(1, 4 * hidden)};
}

CellOutput lstm_cell(const MatrixXd& x, const MatrixXd& h_prev, const MatrixXd& c_prev, const LstmParams& p) {
  StepActivations a = step(x, h_prev, c_prev, p);
  return {std::move(a.h_new), std::move(a.c_new)};
}

void run_direction(const LstmParams& p, const std::vector<MatrixXd>& inputs, const std::vector<VectorXd>& mask,
                   bool reverse, DirectionCache& cache) {
  const std::size_t T = inputs.size();
  const Eigen::Index B = T ? inputs[0].rows() : 0;
  const Eigen::Index H = p.hidden();
  cache.reverse = reverse;
  cache.h_prev.assign(T, {});
  cache.c_prev.assign(T, {});
  cache.gates.assign(T, {});
  cache.tanh_c.assign(T, {});
  cache.h_out.assign(T, {});

  MatrixXd h = MatrixXd::Zero(B, H);
  MatrixXd c = MatrixXd::Zero(B, H);
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    StepActivations a = step(inputs[t], h, c, p);
    cache.h_prev[t] = h;
    cache.c_prev[t] = c;
    const auto m = mask[t].array();
    // Masked rows carry their previous state through this position.
    h = (a.h_new.array().colwise() * m + h.array().colwise() * (1.0 - m)).matrix();
    c = (a.c_new.array().colwise() * m + c.array().colwise() * (1.0 - m)).matrix();
    cache.gates[t] = std::move(a.gates);
    cache.tanh_c[t] = std::move(a.tanh_c);
    cache.h_out[t] = h;
  }
}

void backprop_direction(const LstmParams& p, const std::vector<MatrixXd>& inputs,
                        const std::vector<VectorXd>& mask, const DirectionCache& cache,
                        const std::vector<MatrixXd>& dh_out, LstmParams& grad,
                        std::vector<MatrixXd>& d_inputs) {
  const std::size_t T = inputs.size();
  if (T == 0) return;
  const Eigen::Index B = inputs[0].rows();
  const Eigen::Index H = p.hidden();

  if (d_inputs.size() < T) d_inputs.resize(T);

  MatrixXd dh = MatrixXd::Zero(B, H);
  MatrixXd dc = MatrixXd::Zero(B, H);
  MatrixXd dz(B, 4 * H);
  for (std::size_t s = T; s-- > 0;) {
    const std::size_t t = cache.reverse ? T - 1 - s : s;
    if (dh_out[t].size() != 0) dh += dh_out[t];

    const auto m = mask[t].array();
    const MatrixXd& gates = cache.gates[t];
    const auto i = gates.leftCols(H).array();
    const auto f = gates.middleCols(H, H).array();
    const auto g = gates.middleCols(2 * H, H).array();
    const auto o = gates.rightCols(H).array();
    const auto tc = cache.tanh_c[t].array();

    const Eigen::ArrayXXd dh_new = dh.array().colwise() * m;
    const Eigen::ArrayXXd dc_new = dc.array().colwise() * m + dh_new * o * (1.0 - tc.square());

    dz.leftCols(H) = (dc_new * g * i * (1.0 - i)).matrix();
    dz.middleCols(H, H) = (dc_new * cache.c_prev[t].array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * H, H) = (dc_new * i * (1.0 - g.square())).matrix();
    dz.rightCols(H) = (dh_new * tc * o * (1.0 - o)).matrix();

    grad.W.noalias() += inputs[t].transpose() * dz;
    grad.U.noalias() += cache.h_prev[t].transpose() * dz;
    grad.b += dz.colwise().sum();
    if (d_inputs[t].size() == 0) {
      d_inputs[t] = dz * p.W.transpose();
    } else {
      d_inputs[t].noalias() += dz * p.W.transpose();
    }

    const MatrixXd dh_carry = (dh.array().colwise() * (1.0 - m)).matrix();
    const MatrixXd dc_carry = (dc.array().colwise() * (1.0 - m)).matrix();
    dh = dz * p.U.transpose() + dh_carry;
    dc = (dc_new * f).matrix() + dc_carry;
  }
}

}  // namespace csent::lstm
