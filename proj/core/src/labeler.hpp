// Internal: the per-point labeling core shared by the online detector and
// the training rollouts, so both produce identical pre-delay labels.
#ifndef OASD_SRC_LABELER_HPP
#define OASD_SRC_LABELER_HPP

#include "oasd/asdnet.hpp"
#include "oasd/detector.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/rsrnet.hpp"

namespace oasd::detail {

struct LabelStep {
  int label = 0;
  bool policy_decided = false;
  Tensor z;
  Tensor state;  // set only when the policy decided
  ActionOut action;
  int prev_label = 0;  // label of the previous position at decision time
};

class OnlineLabeler {
 public:
  // group == nullptr means cold start: the NRF defaults to 1 at interior
  // positions and the policy still runs.
  OnlineLabeler(const RoadNetwork& net, const RsrParams& rsr,
                const PolicyParams& pol, const GroupStats* group, Mode mode,
                Rng* rng)
      : net_(net),
        rsr_(rsr),
        pol_(pol),
        group_(group),
        mode_(mode),
        rng_(rng),
        state_(RsrState::zeros(rsr)) {}

  LabelStep push(SegIdx seg, bool is_last) {
    const std::size_t i = position_++;

    int nrf_bit = 0;
    if (i > 0 && !is_last) {
      if (group_ == nullptr) {
        nrf_bit = 1;
      } else {
        nrf_bit = group_->normal_transitions.contains({prev_seg_, seg}) ? 0 : 1;
      }
    }

    LabelStep step;
    step.prev_label = prev_label_;
    step.z = rsr_z_step(rsr_, seg, nrf_bit, state_);

    if (i == 0 || is_last) {
      step.label = 0;
    } else {
      RnelDecision d = rnel_decide(net_, prev_seg_, seg, prev_label_);
      if (d != RnelDecision::NotDetermined) {
        step.label = static_cast<int>(d);
      } else {
        step.state = make_state(step.z, prev_label_, pol_);
        step.action = policy_action(pol_, step.state, mode_, rng_);
        step.label = step.action.action;
        step.policy_decided = true;
      }
    }

    prev_label_ = step.label;
    prev_seg_ = seg;
    return step;
  }

  std::size_t position() const { return position_; }

 private:
  const RoadNetwork& net_;
  const RsrParams& rsr_;
  const PolicyParams& pol_;
  const GroupStats* group_;
  Mode mode_;
  Rng* rng_;
  RsrState state_;
  std::size_t position_ = 0;
  SegIdx prev_seg_ = 0;
  int prev_label_ = 0;
};

}  // namespace oasd::detail

#endif  // OASD_SRC_LABELER_HPP
