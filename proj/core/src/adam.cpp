#include "oasd/adam.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "oasd/error.hpp"

namespace oasd {

void AdamState::step(std::span<const ParamUpdate> updates, bool maximize) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

  if (!cfg_.adaptive) {
    const double sign = maximize ? 1.0 : -1.0;
    for (const ParamUpdate& u : updates) {
      if (!u.param->same_shape(*u.grad)) {
        throw shape_error(fmt::format("sgd: gradient shape mismatch for '{}'", u.name));
      }
      for (std::size_t i = 0; i < u.param->size(); ++i) {
        (*u.param)[i] += sign * cfg_.lr * (*u.grad)[i];
      }
    }
    return;
  }

  for (const ParamUpdate& u : updates) {
    if (!u.param->same_shape(*u.grad)) {
      throw shape_error(fmt::format("adam: gradient shape mismatch for '{}'", u.name));
    }
    auto it = moments_.find(u.name);
    if (it == moments_.end()) {
      it = moments_
               .emplace(u.name, std::make_pair(Tensor::zeros(u.param->shape()),
                                               Tensor::zeros(u.param->shape())))
               .first;
    }
    Tensor& m = it->second.first;
    Tensor& v = it->second.second;
    if (!m.same_shape(*u.param)) {
      throw shape_error(fmt::format("adam: stale moment shape for '{}'", u.name));
    }

    const double sign = maximize ? 1.0 : -1.0;
    for (std::size_t i = 0; i < u.param->size(); ++i) {
      const double g = (*u.grad)[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      (*u.param)[i] += sign * cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void adam_step(AdamState& state, const std::string& name, Tensor& param,
               const Tensor& grad, bool maximize) {
  ParamUpdate u{name, &param, &grad};
  state.step(std::span<const ParamUpdate>(&u, 1), maximize);
}

}  // namespace oasd
