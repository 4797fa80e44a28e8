#ifndef OASD_RSRNET_HPP
#define OASD_RSRNET_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oasd/adam.hpp"
#include "oasd/nn.hpp"
#include "oasd/roadnet.hpp"

namespace oasd {

// Road segment representation network: learnable segment embeddings feed
// an LSTM; each position's hidden state is concatenated with a 2-dim
// one-hot of the normal-route feature to form z_i, and an affine+softmax
// head predicts the per-segment label from z_i. The NRF bit bypasses the
// LSTM so the feature survives unchanged at each position.
struct RsrParams {
  Tensor embedding;  // [V, embed_dim]
  nn::LstmParams lstm;
  Tensor head_w;  // [2, hidden+2]
  Tensor head_b;  // [2]

  static RsrParams init(std::size_t vocab, std::size_t embed_dim,
                        std::size_t hidden_dim, Rng& rng);

  std::size_t vocab() const { return embedding.dim(0); }
  std::size_t embed_dim() const { return embedding.dim(1); }
  std::size_t hidden_dim() const { return lstm.hidden_size; }
  std::size_t z_dim() const { return lstm.hidden_size + 2; }

  std::vector<ParamUpdate> bind(struct RsrGrads& grads);
};

struct RsrGrads {
  Tensor embedding;
  nn::LstmGrads lstm;
  Tensor head_w;
  Tensor head_b;

  static RsrGrads zeros(const RsrParams& p);
};

struct RsrState {
  nn::LstmState lstm;

  static RsrState zeros(const RsrParams& p) {
    return {nn::LstmState::zeros(p.hidden_dim())};
  }
};

struct RsrStepOut {
  Tensor z;      // [hidden+2]
  Tensor probs;  // [2]
};

// One online step: embeds the segment, advances the LSTM state in place,
// forms z = [h ; onehot(nrf)] and the label prediction.
RsrStepOut rsr_forward_step(const RsrParams& p, SegIdx seg, int nrf_bit,
                            RsrState& state);

// Same step without the classifier head; the detection path only needs z.
Tensor rsr_z_step(const RsrParams& p, SegIdx seg, int nrf_bit, RsrState& state);

// Full-sequence forward with the caches required for backprop. The
// per-position outputs agree bitwise with repeated rsr_forward_step calls.
struct RsrForward {
  std::vector<Tensor> z;
  std::vector<Tensor> probs;
  std::vector<nn::LstmCache> caches;

  double mean_loss(std::span<const std::uint8_t> labels) const;
};

RsrForward rsr_forward(const RsrParams& p, std::span<const SegIdx> segments,
                       std::span<const std::uint8_t> nrf);

// Mean cross-entropy over all positions (the training objective).
double rsr_sequence_loss(const RsrParams& p, std::span<const SegIdx> segments,
                         std::span<const std::uint8_t> nrf,
                         std::span<const std::uint8_t> labels);

// Backprop of the mean cross-entropy; gradients accumulate into `grads`.
void rsr_backward(const RsrParams& p, std::span<const SegIdx> segments,
                  const RsrForward& fwd, std::span<const std::uint8_t> labels,
                  RsrGrads& grads);

// Forward + backward + one Adam step; returns the pre-step loss.
double rsr_train_step(RsrParams& p, AdamState& opt, std::span<const SegIdx> segments,
                      std::span<const std::uint8_t> nrf,
                      std::span<const std::uint8_t> labels);

struct RsrExample {
  std::vector<SegIdx> segments;
  std::vector<std::uint8_t> nrf;
  std::vector<std::uint8_t> labels;
};

// One pass over the dataset in seeded shuffled order, one gradient step
// per trajectory; returns the mean pre-step loss.
double rsr_train_epoch(RsrParams& p, AdamState& opt,
                       const std::vector<RsrExample>& dataset, Rng& shuffle_rng);

// Optional external embedding file: JSONL {"id": segment, "vec": [...]}.
// Overwrites matching rows; returns the number of rows loaded. Unknown
// ids are skipped, a wrong vector length is a shape error.
std::size_t load_embeddings(RsrParams& p, const RoadNetwork& net, std::istream& in);

}  // namespace oasd

#endif  // OASD_RSRNET_HPP
