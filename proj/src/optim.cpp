#include "synthlab/optim.hpp"

#include <cmath>
#include <numbers>

namespace synthlab::tensor {

AdamState::AdamState(const std::vector<Tensor>& params, AdamConfig config)
    : config_(config) {
  if (!(config.beta1 >= 0 && config.beta1 < 1) ||
      !(config.beta2 >= 0 && config.beta2 < 1) || !(config.epsilon > 0))
    throw ArgumentError("AdamState: invalid beta/epsilon");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.push_back(ArrayXd::Zero(p->size()));
    v_.push_back(ArrayXd::Zero(p->size()));
  }
}

void adam_step(const std::vector<Tensor>& params, AdamState& state, double lr) {
  if (params.size() != state.m_.size())
    throw ArgumentError("adam_step: parameter list does not match state");
  if (!(lr >= 0)) throw ArgumentError("adam_step: lr must be nonnegative");

  const double b1 = state.config_.beta1;
  const double b2 = state.config_.beta2;
  const double eps = state.config_.epsilon;
  const long t = state.step_ + 1;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Node& p = *params[i];
    ArrayXd& g = p.ensure_grad();
    if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient");
    state.m_[i] = b1 * state.m_[i] + (1.0 - b1) * g;
    state.v_[i] = b2 * state.v_[i] + (1.0 - b2) * g.square();
    p.data -= lr * (state.m_[i] / corr1) /
              ((state.v_[i] / corr2).sqrt() + eps);
  }
  state.step_ = t;
}

double lr_at(const LrSchedule& schedule, long step) {
  if (schedule.warmup_steps < 0 || schedule.warmup_steps > schedule.total_steps)
    throw ArgumentError("lr_at: warmup_steps must lie in [0, total_steps]");
  if (step < 0 || step > schedule.total_steps)
    throw ArgumentError("lr_at: step out of range");
  if (step < schedule.warmup_steps)
    return schedule.base_lr * static_cast<double>(step) /
           static_cast<double>(schedule.warmup_steps);
  if (step >= schedule.total_steps) {
    // cosine terminal; also covers the degenerate all-warmup schedule
    if (schedule.warmup_steps == schedule.total_steps &&
        step == schedule.warmup_steps && schedule.total_steps > 0)
      return schedule.base_lr;
    if (schedule.total_steps == 0) return schedule.base_lr;
    return 0.0;
  }
  const double progress =
      static_cast<double>(step - schedule.warmup_steps) /
      static_cast<double>(schedule.total_steps - schedule.warmup_steps);
  return schedule.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace synthlab::tensor
