#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

// LSTM recurrence with hand-written backpropagation through time. Batches
// are row-major in the sense that each row of an input matrix is one example.
namespace csent::lstm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Gate blocks are laid out [input | forget | cell | output], each `hidden`
/// columns wide.
struct LstmParams {
  MatrixXd W;  // input_dim x 4H
  MatrixXd U;  // H x 4H
  MatrixXd b;  // 1 x 4H

  Eigen::Index hidden() const { return U.rows(); }
  Eigen::Index input_dim() const { return W.rows(); }

  static LstmParams zeros(Eigen::Index input_dim, Eigen::Index hidden);
};

struct CellOutput {
  MatrixXd h;
  MatrixXd c;
};

/// One step for a batch: i,f,o = sigmoid, g = tanh, c' = f*c + i*g,
/// h' = o*tanh(c').
CellOutput lstm_cell(const MatrixXd& x, const MatrixXd& h_prev, const MatrixXd& c_prev, const LstmParams& p);

/// Per-time-step activations of one direction over a sequence, indexed by
/// sequence position (not processing order).
struct DirectionCache {
  bool reverse = false;
  std::vector<MatrixXd> h_prev, c_prev;
  std::vector<MatrixXd> gates;   // B x 4H, post-activation
  std::vector<MatrixXd> tanh_c;  // tanh of the candidate cell state
  std::vector<MatrixXd> h_out;   // state after position t (carried through masked steps)
};

/// Runs the recurrence over `inputs` (one B x in matrix per position).
/// Rows with mask 0 at a position keep their state unchanged there.
/// `reverse` processes positions T-1..0.
void run_direction(const LstmParams& p, const std::vector<MatrixXd>& inputs, const std::vector<VectorXd>& mask,
                   bool reverse, DirectionCache& cache);

/// Backpropagates gradients arriving at each h_out[t] (`dh_out`, empty
/// matrices meaning zero) through the direction. Accumulates parameter
/// gradients into `grad` and input gradients into `d_inputs` (grown to one
/// entry per position if shorter; empty entries count as zero).
void backprop_direction(const LstmParams& p, const std::vector<MatrixXd>& inputs,
                        const std::vector<VectorXd>& mask, const DirectionCache& cache,
                        const std::vector<MatrixXd>& dh_out, LstmParams& grad,
                        std::vector<MatrixXd>& d_inputs);

}  // namespace csent::lstm
