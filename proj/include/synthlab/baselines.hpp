#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>

#include "synthlab/errors.hpp"

namespace synthlab::baselines {

using Eigen::ArrayXd;
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// forecast[t] = last observed value
ArrayXd last_value(const Eigen::Ref<const ArrayXd>& history, long horizon);

// forecast[t] = history[len - P + (t mod P)]; histories shorter than P fall
// back to last_value.
ArrayXd seasonal_naive(const Eigen::Ref<const ArrayXd>& history, long period,
                       long horizon);

// Direct multi-step linear map from length-L windows to length-H
// continuations, fitted by centered ridge normal equations so lambda
// penalizes slopes only (lambda -> inf drives weights to 0 and bias to the
// mean target).
struct LinearDirectModel {
  MatrixRM weight;  // H x L
  ArrayXd bias;     // H
  long look_back = 0;
  long horizon = 0;
};

LinearDirectModel fit_linear_direct(const Eigen::Ref<const ArrayXd>& train,
                                    long look_back, long horizon,
                                    double lambda = 1e-6);
ArrayXd predict(const LinearDirectModel& model,
                const Eigen::Ref<const ArrayXd>& window);

// Moving-average trend (edge-replicated padding) + remainder, one linear
// branch per component; prediction is the sum of branch outputs.
struct DecompLinearModel {
  long kernel = 25;
  LinearDirectModel trend_branch;
  LinearDirectModel remainder_branch;
};

// trend[i] = mean of x[i-h .. i+h] with replicate padding; remainder = x - trend
void decompose(const Eigen::Ref<const ArrayXd>& x, long kernel, ArrayXd& trend,
               ArrayXd& remainder);

DecompLinearModel fit_decomp_linear(const Eigen::Ref<const ArrayXd>& train,
                                    long look_back, long horizon,
                                    long kernel = 25, double lambda = 1e-6);
ArrayXd predict(const DecompLinearModel& model,
                const Eigen::Ref<const ArrayXd>& window);

// Tagged record for checkpointing any baseline kind.
struct BaselineModel {
  std::string kind;  // snaive | last | linear | dlinear
  long period = 0;   // snaive only
  std::optional<LinearDirectModel> linear;
  std::optional<DecompLinearModel> dlinear;
};

// For linear kinds the horizon must not exceed the fitted horizon; direct
// multi-step forecasts are truncated to `horizon`.
ArrayXd predict(const BaselineModel& model,
                const Eigen::Ref<const ArrayXd>& history, long horizon);

// Binary checkpoint, magic "BLN1", little-endian, 64-bit values.
void write_baseline(std::ostream& out, const BaselineModel& model);
BaselineModel read_baseline(std::istream& in);

}  // namespace synthlab::baselines
