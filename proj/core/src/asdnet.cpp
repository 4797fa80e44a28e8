#include "oasd/asdnet.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "labeler.hpp"
#include "oasd/detector.hpp"
#include "oasd/error.hpp"
#include "oasd/metrics.hpp"

namespace oasd {

PolicyParams PolicyParams::init(std::size_t z_dim, std::size_t label_dim, Rng& rng) {
  PolicyParams p;
  p.label_embed = Tensor::uniform({2, label_dim}, -0.08, 0.08, rng);
  p.head_w = Tensor::uniform({2, z_dim + label_dim}, -0.08, 0.08, rng);
  p.head_b = Tensor::zeros({2});
  return p;
}

PolicyGrads PolicyGrads::zeros(const PolicyParams& p) {
  return {Tensor::zeros(p.label_embed.shape()), Tensor::zeros(p.head_w.shape()),
          Tensor::zeros(p.head_b.shape())};
}

std::vector<ParamUpdate> PolicyParams::bind(PolicyGrads& grads) {
  return {
      {"pol.label_embed", &label_embed, &grads.label_embed},
      {"pol.head_w", &head_w, &grads.head_w},
      {"pol.head_b", &head_b, &grads.head_b},
  };
}

Tensor make_state(const Tensor& z, int prev_label, const PolicyParams& p) {
  if (prev_label != 0 && prev_label != 1) {
    throw contract_error("make_state: prev_label must be 0 or 1");
  }
  const std::size_t dl = p.label_dim();
  if (z.size() + dl != p.state_dim()) {
    throw shape_error(fmt::format("make_state: z dim {} + label dim {} != state dim {}",
                                  z.size(), dl, p.state_dim()));
  }
  Tensor s = Tensor::zeros({z.size() + dl});
  for (std::size_t i = 0; i < z.size(); ++i) s[i] = z[i];
  auto v = p.label_embed.row(static_cast<std::size_t>(prev_label));
  for (std::size_t i = 0; i < dl; ++i) s[z.size() + i] = v[i];
  return s;
}

ActionOut policy_action(const PolicyParams& p, const Tensor& state, Mode mode,
                        Rng* rng) {
  ActionOut out;
  out.probs = nn::linear_softmax(p.head_w, p.head_b, state);
  if (mode == Mode::Greedy) {
    // ties break to 0: the fail-normal side
    out.action = out.probs[1] > out.probs[0] ? 1 : 0;
  } else {
    if (rng == nullptr) throw contract_error("sample mode requires a generator");
    out.action = rng->uniform() < out.probs[0] ? 0 : 1;
  }
  out.log_prob = std::log(std::max(out.probs[out.action], 1e-12));
  return out;
}

double local_reward(int prev_label, int cur_label, const Tensor& z_prev,
                    const Tensor& z_cur) {
  const double sign = prev_label == cur_label ? 1.0 : -1.0;
  return sign * nn::cosine(z_prev, z_cur);
}

double global_reward(double rsr_loss) {
  if (rsr_loss < 0.0) {
    throw contract_error(fmt::format("global_reward: negative loss {}", rsr_loss));
  }
  return 1.0 / (1.0 + rsr_loss);
}

double episode_return(std::span<const double> locals, double global) {
  if (locals.empty()) {
    throw contract_error("episode_return: a trajectory has at least one transition");
  }
  double sum = 0.0;
  for (double r : locals) sum += r;
  return sum / static_cast<double>(locals.size()) + global;
}

void reinforce_update(PolicyParams& p, AdamState& opt, const Episode& episode) {
  if (episode.steps.empty() || episode.ret == 0.0) return;

  PolicyGrads grads = PolicyGrads::zeros(p);
  const std::size_t z_dim = p.state_dim() - p.label_dim();
  for (const EpisodeStep& step : episode.steps) {
    Tensor d_logits = nn::logprob_logit_grad(step.probs, step.action, episode.ret);
    Tensor d_state = Tensor::zeros({p.state_dim()});
    nn::linear_backward(p.head_w, step.state, d_logits, grads.head_w, grads.head_b,
                        &d_state);
    // the label-embedding slice of the state
    auto row = grads.label_embed.row(static_cast<std::size_t>(step.prev_label));
    for (std::size_t i = 0; i < p.label_dim(); ++i) row[i] += d_state[z_dim + i];
  }
  auto updates = p.bind(grads);
  opt.step(updates, /*maximize=*/true);
}

Rollout rollout_refined_labels(const RsrParams& rsr, const PolicyParams& pol,
                               const StatsStore& store, const RoadNetwork& net,
                               const MapMatchedTrajectory& traj, Mode mode, Rng* rng) {
  const GroupStats& group = store.require(store.key_for(traj));

  Rollout rollout;
  const std::size_t n = traj.length();
  detail::OnlineLabeler labeler(net, rsr, pol, &group, mode, rng);
  for (std::size_t i = 0; i < n; ++i) {
    detail::LabelStep step = labeler.push(traj.segments[i], i == n - 1);
    rollout.labels.push_back(static_cast<std::uint8_t>(step.label));
    rollout.z.push_back(std::move(step.z));
    if (step.policy_decided) {
      rollout.episode.steps.push_back({i, std::move(step.state),
                                       std::move(step.action.probs),
                                       step.action.action, step.action.log_prob,
                                       step.prev_label});
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    rollout.episode.locals.push_back(
        local_reward(rollout.labels[i - 1], rollout.labels[i], rollout.z[i - 1],
                     rollout.z[i]));
  }
  return rollout;
}

namespace {

// Policy forward with a forced action (pretraining drives the policy with
// the noisy labels as actions).
EpisodeStep forced_step(const PolicyParams& pol, std::size_t pos, const Tensor& z,
                        int prev_label, int action) {
  EpisodeStep step;
  step.pos = pos;
  step.state = make_state(z, prev_label, pol);
  step.probs = nn::linear_softmax(pol.head_w, pol.head_b, step.state);
  step.action = action;
  step.log_prob = std::log(std::max(step.probs[static_cast<std::size_t>(action)], 1e-12));
  step.prev_label = prev_label;
  return step;
}

Episode episode_for_labels(const RoadNetwork& net, const PolicyParams& pol,
                           const MapMatchedTrajectory& traj,
                           const std::vector<Tensor>& z,
                           const std::vector<std::uint8_t>& labels, double rsr_loss) {
  Episode ep;
  const std::size_t n = traj.length();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const int prev = labels[i - 1];
    if (rnel_decide(net, traj.segments[i - 1], traj.segments[i], prev) ==
        RnelDecision::NotDetermined) {
      ep.steps.push_back(forced_step(pol, i, z[i], prev, labels[i]));
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    ep.locals.push_back(local_reward(labels[i - 1], labels[i], z[i - 1], z[i]));
  }
  ep.global = global_reward(rsr_loss);
  ep.ret = episode_return(ep.locals, ep.global);
  return ep;
}

double evaluate_f1(const RoadNetwork& net, const StatsStore& store, const RsrParams& rsr,
                   const PolicyParams& pol, const std::vector<MapMatchedTrajectory>& dev,
                   std::size_t delay) {
  LabeledCorpus corpus;
  SessionConfig cfg;
  cfg.delay = delay;
  cfg.mode = Mode::Greedy;
  for (const MapMatchedTrajectory& traj : dev) {
    if (!traj.gt_labels) {
      throw validation_error(
          fmt::format("dev trajectory '{}' lacks ground-truth labels", traj.id));
    }
    DetectionResult res = detect_trajectory(net, store, rsr, pol, traj, cfg);
    corpus.push_back({traj.id, *traj.gt_labels, res.labels});
  }
  return evaluate(corpus).f1;
}

struct Snapshot {
  RsrParams rsr;
  PolicyParams pol;
  AdamState opt_rsr;
  AdamState opt_pol;
};

}  // namespace

void pretrain(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
              AdamState& opt_pol, const RoadNetwork& net, const StatsStore& store,
              const std::vector<MapMatchedTrajectory>& dataset,
              const PretrainConfig& cfg) {
  if (cfg.epochs == 0 || dataset.empty()) return;

  Rng sample_rng = Rng::substream(cfg.seed, "pretrain/sample");
  std::vector<std::size_t> order = sample_rng.permutation(dataset.size());
  order.resize(std::min(cfg.sample_count, order.size()));

  std::vector<const MapMatchedTrajectory*> sample;
  std::vector<RsrExample> examples;
  for (std::size_t idx : order) {
    const MapMatchedTrajectory& traj = dataset[idx];
    examples.push_back(
        {traj.segments, store.nrf(traj), store.noisy_labels(traj)});
    sample.push_back(&traj);
  }

  // representation network: supervised on the noisy labels
  Rng shuffle_rng = Rng::substream(cfg.seed, "pretrain/shuffle");
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    rsr_train_epoch(rsr, opt_rsr, examples, shuffle_rng);
  }

  // policy network: actions forced to the noisy labels, one ascent step per
  // trajectory
  const std::size_t policy_epochs =
      cfg.policy_epochs > 0 ? cfg.policy_epochs : cfg.epochs;
  Rng policy_rng = Rng::substream(cfg.seed, "pretrain/policy");
  for (std::size_t e = 0; e < policy_epochs; ++e) {
    std::vector<std::size_t> ord = policy_rng.permutation(sample.size());
    for (std::size_t k : ord) {
      const MapMatchedTrajectory& traj = *sample[k];
      const RsrExample& ex = examples[k];
      RsrForward fwd = rsr_forward(rsr, ex.segments, ex.nrf);
      const double loss = fwd.mean_loss(ex.labels);
      Episode ep = episode_for_labels(net, pol, traj, fwd.z, ex.labels, loss);
      reinforce_update(pol, opt_pol, ep);
    }
  }
}

TrainResult joint_train(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
                        AdamState& opt_pol, const RoadNetwork& net,
                        const StatsStore& store,
                        const std::vector<MapMatchedTrajectory>& train,
                        const std::vector<MapMatchedTrajectory>& dev,
                        const TrainConfig& cfg) {
  using nlohmann::json;
  TrainResult result;

  // without a dev set there is nothing to select on: train through and
  // keep the final parameters
  const bool select_best = !dev.empty();
  auto eval_now = [&]() {
    return select_best ? evaluate_f1(net, store, rsr, pol, dev, cfg.delay) : 0.0;
  };

  double best_f1 = eval_now();
  Snapshot best{rsr, pol, opt_rsr, opt_pol};
  result.log_lines.push_back(json({{"step", 0},
                                   {"loss", nullptr},
                                   {"mean_return", nullptr},
                                   {"eval_f1", best_f1}})
                                 .dump());

  Rng shuffle_rng = Rng::substream(cfg.seed, "joint/shuffle");
  Rng rollout_rng = Rng::substream(cfg.seed, "joint/rollout");

  std::vector<std::size_t> order = shuffle_rng.permutation(train.size());
  double window_loss = 0.0;
  double window_return = 0.0;
  std::size_t window_count = 0;
  std::size_t seen = 0;

  for (std::size_t idx : order) {
    const MapMatchedTrajectory& traj = train[idx];
    const std::vector<std::uint8_t> nrf = store.nrf(traj);

    for (std::size_t epoch = 0; epoch < cfg.epochs_per_traj; ++epoch) {
      // (1) refine labels with the current policy
      Rollout rollout = rollout_refined_labels(rsr, pol, store, net, traj,
                                               Mode::Sample, &rollout_rng);
      // (2) representation step on the refined labels; the loss evaluated
      // by this step prices the episode. Pricing with the pre-update loss
      // keeps the global reward anchored to beliefs learned from the rest
      // of the data: a post-update loss would let the representation fit
      // any rollout within the per-trajectory epochs and stop telling
      // good label sequences from degenerate ones.
      const double loss =
          rsr_train_step(rsr, opt_rsr, traj.segments, nrf, rollout.labels);
      // (3) recompute the representations, re-price the locals, then one
      // policy ascent step
      RsrForward fwd = rsr_forward(rsr, traj.segments, nrf);
      Episode& ep = rollout.episode;
      ep.locals.clear();
      for (std::size_t i = 1; i < traj.length(); ++i) {
        ep.locals.push_back(local_reward(rollout.labels[i - 1], rollout.labels[i],
                                         fwd.z[i - 1], fwd.z[i]));
      }
      ep.global = global_reward(loss);
      ep.ret = episode_return(ep.locals, ep.global);
      reinforce_update(pol, opt_pol, ep);

      window_loss += loss;
      window_return += ep.ret;
      ++window_count;
      ++result.steps;
    }

    ++seen;
    if (select_best && cfg.eval_every > 0 && seen % cfg.eval_every == 0) {
      const double f1 = eval_now();
      result.log_lines.push_back(
          json({{"step", result.steps},
                {"loss", window_loss / static_cast<double>(window_count)},
                {"mean_return", window_return / static_cast<double>(window_count)},
                {"eval_f1", f1}})
              .dump());
      window_loss = window_return = 0.0;
      window_count = 0;
      if (f1 > best_f1) {
        best_f1 = f1;
        best = Snapshot{rsr, pol, opt_rsr, opt_pol};
      }
    }
  }

  const double final_f1 = eval_now();
  result.log_lines.push_back(json({{"step", result.steps},
                                   {"loss", nullptr},
                                   {"mean_return", nullptr},
                                   {"eval_f1", final_f1}})
                                 .dump());
  if (select_best) {
    if (final_f1 > best_f1) {
      best_f1 = final_f1;
      best = Snapshot{rsr, pol, opt_rsr, opt_pol};
    }
    rsr = std::move(best.rsr);
    pol = std::move(best.pol);
    opt_rsr = std::move(best.opt_rsr);
    opt_pol = std::move(best.opt_pol);
  } else {
    best_f1 = final_f1;
  }
  result.best_f1 = best_f1;
  result.final_f1 = final_f1;
  return result;
}

TrainResult fine_tune(RsrParams& rsr, PolicyParams& pol, AdamState& opt_rsr,
                      AdamState& opt_pol, const RoadNetwork& net,
                      const StatsStore& new_store,
                      const std::vector<MapMatchedTrajectory>& new_data,
                      const std::vector<MapMatchedTrajectory>& dev,
                      const TrainConfig& cfg) {
  return joint_train(rsr, pol, opt_rsr, opt_pol, net, new_store, new_data, dev, cfg);
}

}  // namespace oasd
