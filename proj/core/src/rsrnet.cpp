#include "oasd/rsrnet.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"

namespace oasd {

RsrParams RsrParams::init(std::size_t vocab, std::size_t embed_dim,
                          std::size_t hidden_dim, Rng& rng) {
  RsrParams p;
  p.embedding = Tensor::uniform({vocab, embed_dim}, -0.08, 0.08, rng);
  p.lstm = nn::LstmParams::init(embed_dim, hidden_dim, rng);
  p.head_w = Tensor::uniform({2, hidden_dim + 2}, -0.08, 0.08, rng);
  p.head_b = Tensor::zeros({2});
  return p;
}

RsrGrads RsrGrads::zeros(const RsrParams& p) {
  return {Tensor::zeros(p.embedding.shape()), nn::LstmGrads::zeros(p.lstm),
          Tensor::zeros(p.head_w.shape()), Tensor::zeros(p.head_b.shape())};
}

std::vector<ParamUpdate> RsrParams::bind(RsrGrads& grads) {
  return {
      {"rsr.embedding", &embedding, &grads.embedding},
      {"rsr.lstm.w_x", &lstm.w_x, &grads.lstm.w_x},
      {"rsr.lstm.w_h", &lstm.w_h, &grads.lstm.w_h},
      {"rsr.lstm.bias", &lstm.bias, &grads.lstm.bias},
      {"rsr.head_w", &head_w, &grads.head_w},
      {"rsr.head_b", &head_b, &grads.head_b},
  };
}

namespace {

Tensor make_z(const Tensor& h, int nrf_bit) {
  Tensor z = Tensor::zeros({h.size() + 2});
  for (std::size_t i = 0; i < h.size(); ++i) z[i] = h[i];
  z[h.size() + (nrf_bit != 0 ? 1 : 0)] = 1.0;
  return z;
}

}  // namespace

RsrStepOut rsr_forward_step(const RsrParams& p, SegIdx seg, int nrf_bit,
                            RsrState& state) {
  Tensor z = rsr_z_step(p, seg, nrf_bit, state);
  Tensor probs = nn::linear_softmax(p.head_w, p.head_b, z);
  return {std::move(z), std::move(probs)};
}

Tensor rsr_z_step(const RsrParams& p, SegIdx seg, int nrf_bit, RsrState& state) {
  Tensor x = nn::embed(p.embedding, seg);
  state.lstm = nn::lstm_step(p.lstm, x, state.lstm);
  return make_z(state.lstm.h, nrf_bit);
}

RsrForward rsr_forward(const RsrParams& p, std::span<const SegIdx> segments,
                       std::span<const std::uint8_t> nrf) {
  if (segments.size() != nrf.size()) {
    throw shape_error("rsr_forward: segments and nrf lengths differ");
  }
  RsrForward fwd;
  const std::size_t n = segments.size();
  fwd.z.reserve(n);
  fwd.probs.reserve(n);
  fwd.caches.resize(n);

  nn::LstmState state = nn::LstmState::zeros(p.hidden_dim());
  for (std::size_t i = 0; i < n; ++i) {
    Tensor x = nn::embed(p.embedding, segments[i]);
    state = nn::lstm_step(p.lstm, x, state, &fwd.caches[i]);
    fwd.z.push_back(make_z(state.h, nrf[i]));
    fwd.probs.push_back(nn::linear_softmax(p.head_w, p.head_b, fwd.z.back()));
  }
  return fwd;
}

double RsrForward::mean_loss(std::span<const std::uint8_t> labels) const {
  if (labels.size() != probs.size()) {
    throw shape_error("mean_loss: labels length mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += nn::cross_entropy(probs[i], labels[i]);
  }
  return total / static_cast<double>(probs.size());
}

double rsr_sequence_loss(const RsrParams& p, std::span<const SegIdx> segments,
                         std::span<const std::uint8_t> nrf,
                         std::span<const std::uint8_t> labels) {
  if (segments.size() != labels.size()) {
    throw shape_error("rsr_sequence_loss: labels length mismatch");
  }
  return rsr_forward(p, segments, nrf).mean_loss(labels);
}

void rsr_backward(const RsrParams& p, std::span<const SegIdx> segments,
                  const RsrForward& fwd, std::span<const std::uint8_t> labels,
                  RsrGrads& grads) {
  const std::size_t n = segments.size();
  if (labels.size() != n || fwd.z.size() != n) {
    throw shape_error("rsr_backward: length mismatch");
  }
  const std::size_t dh = p.hidden_dim();
  const double scale = 1.0 / static_cast<double>(n);

  Tensor d_h = Tensor::zeros({dh});
  Tensor d_c = Tensor::zeros({dh});
  for (std::size_t idx = n; idx-- > 0;) {
    // head: d logits = (probs - onehot)/n
    Tensor d_logits = nn::softmax_ce_logit_grad(fwd.probs[idx], labels[idx], scale);
    Tensor d_z = Tensor::zeros({p.z_dim()});
    nn::linear_backward(p.head_w, fwd.z[idx], d_logits, grads.head_w, grads.head_b,
                        &d_z);
    // z = [h ; onehot(nrf)]: only the h part backpropagates
    for (std::size_t k = 0; k < dh; ++k) d_h[k] += d_z[k];

    Tensor d_x, d_h_prev, d_c_prev;
    nn::lstm_backward(p.lstm, fwd.caches[idx], d_h, d_c, grads.lstm, d_x, d_h_prev,
                      d_c_prev);
    nn::embed_backward(grads.embedding, segments[idx], d_x);
    d_h = std::move(d_h_prev);
    d_c = std::move(d_c_prev);
  }
}

double rsr_train_step(RsrParams& p, AdamState& opt, std::span<const SegIdx> segments,
                      std::span<const std::uint8_t> nrf,
                      std::span<const std::uint8_t> labels) {
  RsrForward fwd = rsr_forward(p, segments, nrf);
  const double loss = fwd.mean_loss(labels);
  RsrGrads grads = RsrGrads::zeros(p);
  rsr_backward(p, segments, fwd, labels, grads);
  auto updates = p.bind(grads);
  opt.step(updates);
  return loss;
}

double rsr_train_epoch(RsrParams& p, AdamState& opt,
                       const std::vector<RsrExample>& dataset, Rng& shuffle_rng) {
  if (dataset.empty()) return 0.0;
  std::vector<std::size_t> order = shuffle_rng.permutation(dataset.size());
  double total = 0.0;
  for (std::size_t idx : order) {
    const RsrExample& ex = dataset[idx];
    total += rsr_train_step(p, opt, ex.segments, ex.nrf, ex.labels);
  }
  return total / static_cast<double>(dataset.size());
}

std::size_t load_embeddings(RsrParams& p, const RoadNetwork& net, std::istream& in) {
  using nlohmann::json;
  std::string line;
  std::size_t loaded = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error(fmt::format("embedding file line {}: {}", line_no, e.what()));
    }
    auto idx = net.find_segment(rec.at("id").get<std::string>());
    if (!idx) continue;
    const auto& vec = rec.at("vec");
    if (vec.size() != p.embed_dim()) {
      throw shape_error(fmt::format("embedding file line {}: expected {} dims, got {}",
                                    line_no, p.embed_dim(), vec.size()));
    }
    auto row = p.embedding.row(*idx);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = vec[i].get<double>();
    ++loaded;
  }
  p.embedding.check_finite("embedding file");
  return loaded;
}

}  // namespace oasd
