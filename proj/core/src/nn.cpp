#include "oasd/nn.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "oasd/error.hpp"

namespace oasd::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require(bool cond, const char* msg) {
  if (!cond) throw shape_error(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Embedding

Tensor embed(const Tensor& table, std::size_t token) {
  if (table.rank() != 2) throw shape_error("embedding table must be rank 2");
  if (token >= table.dim(0)) {
    throw Error("index", fmt::format("token {} out of range for table of {} rows", token,
                                     table.dim(0)));
  }
  auto src = table.row(token);
  Tensor out = Tensor::zeros({src.size()});
  std::copy(src.begin(), src.end(), out.span().begin());
  return out;
}

void embed_backward(Tensor& table_grad, std::size_t token, const Tensor& d_out) {
  require(table_grad.rank() == 2 && d_out.size() == table_grad.dim(1),
          "embed_backward shape mismatch");
  auto dst = table_grad.row(token);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += d_out[i];
}

// ---------------------------------------------------------------------------
// LSTM cell

LstmParams LstmParams::init(std::size_t input, std::size_t hidden, Rng& rng,
                            double scale) {
  LstmParams p;
  p.input_size = input;
  p.hidden_size = hidden;
  p.w_x = Tensor::uniform({4 * hidden, input}, -scale, scale, rng);
  p.w_h = Tensor::uniform({4 * hidden, hidden}, -scale, scale, rng);
  p.bias = Tensor::zeros({4 * hidden});
  // forget-gate block
  for (std::size_t i = hidden; i < 2 * hidden; ++i) p.bias[i] = 1.0;
  return p;
}

LstmParams LstmParams::zeros(std::size_t input, std::size_t hidden) {
  LstmParams p;
  p.input_size = input;
  p.hidden_size = hidden;
  p.w_x = Tensor::zeros({4 * hidden, input});
  p.w_h = Tensor::zeros({4 * hidden, hidden});
  p.bias = Tensor::zeros({4 * hidden});
  return p;
}

LstmState LstmState::zeros(std::size_t hidden) {
  return {Tensor::zeros({hidden}), Tensor::zeros({hidden})};
}

LstmGrads LstmGrads::zeros(const LstmParams& p) {
  return {Tensor::zeros(p.w_x.shape()), Tensor::zeros(p.w_h.shape()),
          Tensor::zeros(p.bias.shape())};
}

LstmState lstm_step(const LstmParams& p, const Tensor& x, const LstmState& prev,
                    LstmCache* cache) {
  const std::size_t dh = p.hidden_size;
  const std::size_t dx = p.input_size;
  require(x.size() == dx, "lstm_step: input size mismatch");
  require(prev.h.size() == dh && prev.c.size() == dh, "lstm_step: state size mismatch");

  // pre-activations for the 4 stacked gates
  Tensor pre = Tensor::zeros({4 * dh});
  for (std::size_t r = 0; r < 4 * dh; ++r) {
    double acc = p.bias[r];
    const double* wx = &p.w_x.span()[r * dx];
    for (std::size_t k = 0; k < dx; ++k) acc += wx[k] * x[k];
    const double* wh = &p.w_h.span()[r * dh];
    for (std::size_t k = 0; k < dh; ++k) acc += wh[k] * prev.h[k];
    pre[r] = acc;
  }

  Tensor gi = Tensor::zeros({dh}), gf = Tensor::zeros({dh}), gg = Tensor::zeros({dh}),
         go = Tensor::zeros({dh});
  for (std::size_t k = 0; k < dh; ++k) {
    gi[k] = sigmoid(pre[k]);
    gf[k] = sigmoid(pre[dh + k]);
    gg[k] = std::tanh(pre[2 * dh + k]);
    go[k] = sigmoid(pre[3 * dh + k]);
  }

  LstmState next = LstmState::zeros(dh);
  Tensor tanh_c = Tensor::zeros({dh});
  for (std::size_t k = 0; k < dh; ++k) {
    next.c[k] = gf[k] * prev.c[k] + gi[k] * gg[k];
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = go[k] * tanh_c[k];
  }

  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->gate_i = std::move(gi);
    cache->gate_f = std::move(gf);
    cache->gate_g = std::move(gg);
    cache->gate_o = std::move(go);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

void lstm_backward(const LstmParams& p, const LstmCache& cache, const Tensor& d_h,
                   const Tensor& d_c, LstmGrads& grads, Tensor& d_x,
                   Tensor& d_h_prev, Tensor& d_c_prev) {
  const std::size_t dh = p.hidden_size;
  const std::size_t dx = p.input_size;
  require(d_h.size() == dh && d_c.size() == dh, "lstm_backward: gradient size mismatch");

  Tensor d_pre = Tensor::zeros({4 * dh});
  d_x = Tensor::zeros({dx});
  d_h_prev = Tensor::zeros({dh});
  d_c_prev = Tensor::zeros({dh});

  for (std::size_t k = 0; k < dh; ++k) {
    const double go = cache.gate_o[k];
    const double tc = cache.tanh_c[k];
    // h = o * tanh(c); both d_h and the incoming d_c reach c
    const double dc_total = d_c[k] + d_h[k] * go * (1.0 - tc * tc);
    const double gi = cache.gate_i[k];
    const double gf = cache.gate_f[k];
    const double gg = cache.gate_g[k];

    d_c_prev[k] = dc_total * gf;
    const double d_gi = dc_total * gg;
    const double d_gf = dc_total * cache.c_prev[k];
    const double d_gg = dc_total * gi;
    const double d_go = d_h[k] * tc;

    d_pre[k] = d_gi * gi * (1.0 - gi);
    d_pre[dh + k] = d_gf * gf * (1.0 - gf);
    d_pre[2 * dh + k] = d_gg * (1.0 - gg * gg);
    d_pre[3 * dh + k] = d_go * go * (1.0 - go);
  }

  for (std::size_t r = 0; r < 4 * dh; ++r) {
    const double dp = d_pre[r];
    if (dp == 0.0) continue;
    double* gwx = &grads.w_x.span()[r * dx];
    for (std::size_t k = 0; k < dx; ++k) {
      gwx[k] += dp * cache.x[k];
      d_x[k] += dp * p.w_x.span()[r * dx + k];
    }
    double* gwh = &grads.w_h.span()[r * dh];
    for (std::size_t k = 0; k < dh; ++k) {
      gwh[k] += dp * cache.h_prev[k];
      d_h_prev[k] += dp * p.w_h.span()[r * dh + k];
    }
    grads.bias[r] += dp;
  }
}

// ---------------------------------------------------------------------------
// Affine head, softmax, losses

Tensor linear(const Tensor& w, const Tensor& b, const Tensor& z) {
  require(w.rank() == 2, "linear: weight must be rank 2");
  const std::size_t k = w.dim(0);
  const std::size_t d = w.dim(1);
  require(b.size() == k && z.size() == d, "linear: shape mismatch");
  Tensor out = Tensor::zeros({k});
  for (std::size_t r = 0; r < k; ++r) {
    double acc = b[r];
    const double* wr = &w.span()[r * d];
    for (std::size_t j = 0; j < d; ++j) acc += wr[j] * z[j];
    out[r] = acc;
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  Tensor out = Tensor::zeros(logits.shape());
  double mx = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
  return out;
}

Tensor linear_softmax(const Tensor& w, const Tensor& b, const Tensor& z) {
  return softmax(linear(w, b, z));
}

void linear_backward(const Tensor& w, const Tensor& z, const Tensor& d_logits,
                     Tensor& d_w, Tensor& d_b, Tensor* d_z) {
  const std::size_t k = w.dim(0);
  const std::size_t d = w.dim(1);
  require(d_logits.size() == k, "linear_backward: gradient size mismatch");
  for (std::size_t r = 0; r < k; ++r) {
    const double dl = d_logits[r];
    d_b[r] += dl;
    double* gw = &d_w.span()[r * d];
    for (std::size_t j = 0; j < d; ++j) gw[j] += dl * z[j];
  }
  if (d_z != nullptr) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < k; ++r) acc += d_logits[r] * w.span()[r * d + j];
      (*d_z)[j] += acc;
    }
  }
}

double cross_entropy(const Tensor& pred, std::size_t label) {
  if (label >= pred.size()) {
    throw Error("index", fmt::format("label {} out of range {}", label, pred.size()));
  }
  return -std::log(std::max(pred[label], 1e-12));
}

Tensor softmax_ce_logit_grad(const Tensor& pred, std::size_t label, double scale) {
  Tensor g = Tensor::zeros(pred.shape());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * pred[i];
  g[label] -= scale;
  return g;
}

Tensor logprob_logit_grad(const Tensor& pred, std::size_t action, double scale) {
  Tensor g = Tensor::zeros(pred.shape());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = -scale * pred[i];
  g[action] += scale;
  return g;
}

double cosine(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "cosine: size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot / (na * nb);
}

// ---------------------------------------------------------------------------
// Finite differences

double finite_diff_check(const std::function<double()>& f, std::span<double> params,
                         std::span<const double> analytic, double h,
                         double denom_floor) {
  if (params.size() != analytic.size()) {
    throw shape_error("finite_diff_check: gradient length mismatch");
  }
  double max_rel = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double fp = f();
    params[i] = saved - h;
    const double fm = f();
    params[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic[i]), denom_floor});
    max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) / denom);
  }
  return max_rel;
}

}  // namespace oasd::nn
