#ifndef OASD_ASDNET_HPP
#define OASD_ASDNET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oasd/adam.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/rsrnet.hpp"

namespace oasd {

enum class Mode { Greedy, Sample };

// Policy network over the labeling MDP. A state is [z_i ; v(prev label)]
// where v embeds the previous label token; a single affine layer plus
// softmax produces the action distribution over {0,1}.
struct PolicyParams {
  Tensor label_embed;  // [2, label_dim]
  Tensor head_w;       // [2, z_dim + label_dim]
  Tensor head_b;       // [2]

  static PolicyParams init(std::size_t z_dim, std::size_t label_dim, Rng& rng);

  std::size_t label_dim() const { return label_embed.dim(1); }
  std::size_t state_dim() const { return head_w.dim(1); }

  std::vector<ParamUpdate> bind(struct PolicyGrads& grads);
};

struct PolicyGrads {
  Tensor label_embed;
  Tensor head_w;
  Tensor head_b;

  static PolicyGrads zeros(const PolicyParams& p);
};

Tensor make_state(const Tensor& z, int prev_label, const PolicyParams& p);

struct ActionOut {
  int action = 0;
  double log_prob = 0.0;
  Tensor probs;
};

// Greedy returns the argmax (ties break to 0, the fail-normal side);
// Sample draws from the softmax using the caller's generator.
ActionOut policy_action(const PolicyParams& p, const Tensor& state, Mode mode,
                        Rng* rng = nullptr);

// Continuity reward: +cos(z_prev, z_cur) when the labels agree,
// -cos(z_prev, z_cur) otherwise. Because z embeds the normal-route bit,
// the cosine gates the penalty: label flips at feature boundaries cost
// little, flips inside homogeneous stretches cost a lot.
double local_reward(int prev_label, int cur_label, const Tensor& z_prev,
                    const Tensor& z_cur);

// 1/(1+L) for the representation loss L on the refined labels.
double global_reward(double rsr_loss);

// Mean of the local rewards plus the global reward.
double episode_return(std::span<const double> locals, double global);

// One recorded policy decision. Rule-decided and endpoint positions never
// appear here; local rewards still cover every transition.
struct EpisodeStep {
  std::size_t pos = 0;
  Tensor state;
  Tensor probs;
  int action = 0;
  double log_prob = 0.0;
  int prev_label = 0;
};

struct Episode {
  std::vector<EpisodeStep> steps;
  std::vector<double> locals;  // n-1 entries, one per transition
  double global = 0.0;
  double ret = 0.0;
};

// REINFORCE: one gradient-ascent step on sum_i R * ln pi(a_i | s_i) with
// the single episode return weighting every step; z enters the state as a
// fixed input, so gradients reach only the policy parameters.
void reinforce_update(PolicyParams& p, AdamState& opt, const Episode& episode);

struct Rollout {
  std::vector<std::uint8_t> labels;  // pre-delay refined labels
  std::vector<Tensor> z;             // per-position representations
  Episode episode;
  bool cold_start = false;
};

// Produces labels exactly as the online detector does before delayed
// labeling: endpoints forced 0, network rules applied, the policy
// consulted otherwise. Records states/actions for the policy-decided
// positions; local rewards are filled for every transition. The episode
// return is left for the caller, which owns the global-reward loss.
Rollout rollout_refined_labels(const RsrParams& rsr, const PolicyParams& pol,
                               const StatsStore& store, const RoadNetwork& net,
                               const MapMatchedTrajectory& traj, Mode mode,
                               Rng* rng = nullptr);

struct PretrainConfig {
  std::size_t sample_count = 200;
  std::size_t epochs = 5;
  // the policy phase usually needs more passes than the representation
  // phase; 0 means "same as epochs"
  std::size_t policy_epochs = 0;
  std::uint64_t seed = 1;
};

// Warm start: the representation network trains supervised on the noisy
// labels; the policy network is driven with its actions forced to the
// noisy labels and updated by the same gradient-ascent step.
void pretrain(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
              AdamState& opt_pol, const RoadNetwork& net, const StatsStore& store,
              const std::vector<MapMatchedTrajectory>& dataset,
              const PretrainConfig& cfg);

struct TrainConfig {
  std::size_t epochs_per_traj = 5;
  std::size_t eval_every = 200;
  std::size_t delay = 8;  // D used when evaluating on the dev set
  std::uint64_t seed = 1;
};

struct TrainResult {
  double best_f1 = 0.0;
  double final_f1 = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> log_lines;  // JSONL: step, loss, mean_return, eval_f1
};

// Joint loop, per trajectory-epoch: sample a rollout with the current
// policy, take one representation step on the refined labels, recompute z
// and the loss to price the episode, then one policy step. The checkpoint
// with the best dev F1 wins and is restored into the in/out params.
TrainResult joint_train(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
                        AdamState& opt_pol, const RoadNetwork& net,
                        const StatsStore& store,
                        const std::vector<MapMatchedTrajectory>& train,
                        const std::vector<MapMatchedTrajectory>& dev,
                        const TrainConfig& cfg);

// Continues joint training on a newly recorded partition (its own store),
// the online-learning answer to concept drift.
TrainResult fine_tune(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
                      AdamState& opt_pol, const RoadNetwork& net,
                      const StatsStore& new_store,
                      const std::vector<MapMatchedTrajectory>& new_data,
                      const std::vector<MapMatchedTrajectory>& dev,
                      const TrainConfig& cfg);

}  // namespace oasd

#endif  // OASD_ASDNET_HPP
