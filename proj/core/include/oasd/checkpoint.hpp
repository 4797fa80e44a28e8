#ifndef OASD_CHECKPOINT_HPP
#define OASD_CHECKPOINT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "oasd/adam.hpp"
#include "oasd/asdnet.hpp"
#include "oasd/rsrnet.hpp"

namespace oasd {

struct ModelConfig {
  std::size_t vocab = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t label_dim = 32;
  double alpha = 0.5;
  double delta = 0.4;
  std::size_t delay = 8;
  int slots_per_day = 24;
  double lr_rsr = 0.01;
  double lr_asd = 0.001;
  std::uint64_t seed = 1;
  std::string profile = "desk";  // "desk" (32) or "paper" (128)
};

// Everything learnable plus optimizer moments; one JSON checkpoint holds
// the whole model so a run can resume or be reproduced bit for bit.
struct ModelState {
  ModelConfig config;
  RsrParams rsr;
  PolicyParams policy;
  AdamState opt_rsr;
  AdamState opt_policy;

  // Fresh model with seeded init ("init" substream of config.seed).
  static ModelState init(const ModelConfig& cfg);
};

// Applies the dimension profile (desk: 32/32/32, paper: 128/128/128).
void apply_profile(ModelConfig& cfg, const std::string& profile);

void save_model(std::ostream& out, const ModelState& model);
void save_model_file(const std::string& path, const ModelState& model);
ModelState load_model(std::istream& in);
ModelState load_model_file(const std::string& path);

}  // namespace oasd

#endif  // OASD_CHECKPOINT_HPP
