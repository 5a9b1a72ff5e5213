#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>

#include "synthlab/errors.hpp"

namespace synthlab::scalers {

using Eigen::ArrayXd;

enum class ScalerKind { standard, minmax, iqr };

const char* scaler_kind_name(ScalerKind k);
ScalerKind scaler_kind_from_name(const std::string& name);

struct ClipBounds {
  double min = 0.0;
  double max = 0.0;
};

// Immutable after fit. stat_a/stat_b hold (mean, std), (min, max) or
// (median, IQR) depending on kind. A flat fit window sets `degenerate` and
// the effective denominator becomes 1 so transforms stay monotone.
struct FittedScaler {
  ScalerKind kind = ScalerKind::standard;
  double stat_a = 0.0;
  double stat_b = 0.0;
  std::optional<ClipBounds> clip;  // applied after transform (minmax study)
  bool degenerate = false;

  double denominator() const {
    if (degenerate) return 1.0;
    return kind == ScalerKind::minmax ? stat_b - stat_a : stat_b;
  }
};

// Statistics come from `data` alone (callers pass the look-back window only).
FittedScaler fit(ScalerKind kind, const Eigen::Ref<const ArrayXd>& data,
                 std::optional<ClipBounds> clip = std::nullopt);

double transform_value(const FittedScaler& s, double x);
double inverse_value(const FittedScaler& s, double y);
ArrayXd transform(const FittedScaler& s, const Eigen::Ref<const ArrayXd>& x);
ArrayXd inverse_transform(const FittedScaler& s, const Eigen::Ref<const ArrayXd>& y);

// Quantile by linear interpolation between closest ranks on a copy of `data`.
double quantile(const Eigen::Ref<const ArrayXd>& data, double q);

// Re-expresses x (target frame) in the source frame:
// source.inverse(target.transform(x)). `unalign` is the exact inverse.
ArrayXd align_target_to_source(const FittedScaler& target,
                               const FittedScaler& source,
                               const Eigen::Ref<const ArrayXd>& x);
ArrayXd unalign(const FittedScaler& target, const FittedScaler& source,
                const Eigen::Ref<const ArrayXd>& y);

// (kind, statistics) record for embedding in checkpoints/configs.
void write_scaler(std::ostream& out, const FittedScaler& s);
FittedScaler read_scaler(std::istream& in);

}  // namespace synthlab::scalers
