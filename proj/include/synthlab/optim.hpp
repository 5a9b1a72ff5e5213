#pragma once

#include <vector>

#include "synthlab/tensor.hpp"

namespace synthlab::tensor {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam moments for a fixed parameter list. The step counter
// increments exactly once per adam_step call.
class AdamState {
public:
  AdamState(const std::vector<Tensor>& params, AdamConfig config = {});

  long step() const { return step_; }
  const AdamConfig& config() const { return config_; }

  friend void adam_step(const std::vector<Tensor>& params, AdamState& state,
                        double lr);

private:
  AdamConfig config_;
  long step_ = 0;
  std::vector<ArrayXd> m_;
  std::vector<ArrayXd> v_;
};

// In-place bias-corrected update from the gradients currently on `params`.
// `params` must be the same list (same order) the state was built from.
void adam_step(const std::vector<Tensor>& params, AdamState& state, double lr);

// Linear warmup 0 -> base_lr over [0, warmup_steps], then cosine decay
// base_lr -> 0 over (warmup_steps, total_steps].
struct LrSchedule {
  double base_lr = 0.0;
  long warmup_steps = 0;
  long total_steps = 0;
};

double lr_at(const LrSchedule& schedule, long step);

}  // namespace synthlab::tensor
