#ifndef OASD_NN_HPP
#define OASD_NN_HPP

#include <cstddef>
#include <functional>
#include <span>

#include "oasd/rng.hpp"
#include "oasd/tensor.hpp"

// Minimal differentiable kernels: embedding rows, one LSTM cell, an affine
// head with softmax, cross-entropy, cosine similarity. Each kernel has an
// explicit backward; there is no general autodiff graph because only one
// architecture exists and explicit gradients are simpler to verify against
// finite differences.
namespace oasd::nn {

// ---------------------------------------------------------------------------
// Embedding

// Row copy from a [V x d] table.
Tensor embed(const Tensor& table, std::size_t token);
// Accumulates d_out into the token's row of the table gradient.
void embed_backward(Tensor& table_grad, std::size_t token, const Tensor& d_out);

// ---------------------------------------------------------------------------
// LSTM cell

// Gate blocks are stacked in the order input, forget, candidate, output.
struct LstmParams {
  Tensor w_x;   // [4*hidden, input]
  Tensor w_h;   // [4*hidden, hidden]
  Tensor bias;  // [4*hidden]
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  // Uniform init in [-scale, scale]; forget-gate bias starts at 1.0.
  static LstmParams init(std::size_t input, std::size_t hidden, Rng& rng,
                         double scale = 0.08);
  static LstmParams zeros(std::size_t input, std::size_t hidden);
};

struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t hidden);
};

// Forward intermediates needed by the backward pass.
struct LstmCache {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;
  Tensor gate_i;  // post-sigmoid
  Tensor gate_f;
  Tensor gate_g;  // post-tanh
  Tensor gate_o;
  Tensor c;
  Tensor tanh_c;
};

struct LstmGrads {
  Tensor w_x;
  Tensor w_h;
  Tensor bias;

  static LstmGrads zeros(const LstmParams& p);
};

// Standard cell: sigmoid gates, tanh candidate and output squashing.
LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& prev,
                    LstmCache* cache = nullptr);

// Backpropagates (d_h, d_c) through one cached step. Accumulates into
// `grads` and writes the upstream gradients for x, h_prev, c_prev.
void lstm_backward(const LstmParams& p, const LstmCache& cache, const Tensor& d_h,
                   const Tensor& d_c, LstmGrads& grads, Tensor& d_x,
                   Tensor& d_h_prev, Tensor& d_c_prev);

// ---------------------------------------------------------------------------
// Affine head, softmax, losses

Tensor linear(const Tensor& w, const Tensor& b, const Tensor& z);
// Max-subtracted softmax; output sums to 1 within 1e-12.
Tensor softmax(const Tensor& logits);
Tensor linear_softmax(const Tensor& w, const Tensor& b, const Tensor& z);

// d_logits -> (d_w, d_b accumulated; d_z written if non-null).
void linear_backward(const Tensor& w, const Tensor& z, const Tensor& d_logits,
                     Tensor& d_w, Tensor& d_b, Tensor* d_z);

// -ln(pred[label]); pred[label] clamped at 1e-12 before the log.
double cross_entropy(const Tensor& pred, std::size_t label);
// Gradient of cross_entropy w.r.t. the logits feeding softmax(pred):
// scale * (pred - onehot(label)).
Tensor softmax_ce_logit_grad(const Tensor& pred, std::size_t label, double scale);
// Gradient of ln pred[action] w.r.t. the logits: scale * (onehot - pred).
Tensor logprob_logit_grad(const Tensor& pred, std::size_t action, double scale);

// a.b / (|a||b|); returns 0 when either norm is below 1e-12.
double cosine(const Tensor& a, const Tensor& b);

// ---------------------------------------------------------------------------
// Finite-difference checker (the gradient oracle used by the tests)

// Central differences (f(p+h)-f(p-h))/2h per coordinate against
// `analytic`; returns the max relative error. Denominators are floored at
// 1e-4: coordinates where both gradients sit below the floor must agree
// absolutely to floor * tolerance, which keeps finite-difference noise on
// near-zero entries from drowning the signal while still flagging any
// error at gradient scale.
double finite_diff_check(const std::function<double()>& f, std::span<double> params,
                         std::span<const double> analytic, double h = 1e-5,
                         double denom_floor = 1e-4);

}  // namespace oasd::nn

#endif  // OASD_NN_HPP
