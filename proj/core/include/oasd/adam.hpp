#ifndef OASD_ADAM_HPP
#define OASD_ADAM_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "oasd/tensor.hpp"

namespace oasd {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // false selects plain (non-adaptive) gradient steps: param += -lr * g,
  // or +lr * g when maximizing. Rare-feature gradients then accumulate in
  // proportion to their magnitude instead of being flattened by the
  // per-coordinate normalization.
  bool adaptive = true;
};

struct ParamUpdate {
  std::string name;
  Tensor* param;
  const Tensor* grad;
};

// Adam with bias correction over a set of named parameters. Moment slots
// are created on first use and keyed by parameter name so they can ride
// along in model checkpoints.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const noexcept { return cfg_; }
  std::int64_t step_count() const noexcept { return step_; }

  // Serialization hooks for the checkpoint code.
  std::map<std::string, std::pair<Tensor, Tensor>>& moments() { return moments_; }
  const std::map<std::string, std::pair<Tensor, Tensor>>& moments() const {
    return moments_;
  }
  void restore(std::int64_t step, AdamConfig cfg) {
    step_ = step;
    cfg_ = cfg;
  }

  // One optimization step over all listed tensors. maximize=true ascends
  // (gradient ascent for REINFORCE).
  void step(std::span<const ParamUpdate> updates, bool maximize = false);

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> moments_;
};

// Single-tensor convenience; counts as one full optimization step.
void adam_step(AdamState& state, const std::string& name, Tensor& param,
               const Tensor& grad, bool maximize = false);

}  // namespace oasd

#endif  // OASD_ADAM_HPP
