#include "synthlab/scalers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

namespace synthlab::scalers {

const char* scaler_kind_name(ScalerKind k) {
  switch (k) {
    case ScalerKind::standard: return "standard";
    case ScalerKind::minmax: return "minmax";
    case ScalerKind::iqr: return "iqr";
  }
  throw ArgumentError("scaler_kind_name: unknown kind");
}

ScalerKind scaler_kind_from_name(const std::string& name) {
  if (name == "standard") return ScalerKind::standard;
  if (name == "minmax") return ScalerKind::minmax;
  if (name == "iqr") return ScalerKind::iqr;
  throw ArgumentError("unknown scaler kind: " + name);
}

double quantile(const Eigen::Ref<const ArrayXd>& data, double q) {
  if (data.size() < 1) throw ArgumentError("quantile: empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q must lie in [0,1]");
  std::vector<double> x(data.data(), data.data() + data.size());
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 < x.size()) return x[lo] + frac * (x[lo + 1] - x[lo]);
  return x[lo];
}

FittedScaler fit(ScalerKind kind, const Eigen::Ref<const ArrayXd>& data,
                 std::optional<ClipBounds> clip) {
  if (data.size() < 2) throw ArgumentError("scaler fit: need at least 2 points");
  if (!data.allFinite()) throw NumericError("scaler fit: non-finite data");
  FittedScaler s;
  s.kind = kind;
  s.clip = clip;
  switch (kind) {
    case ScalerKind::standard: {
      s.stat_a = data.mean();
      s.stat_b = std::sqrt((data - s.stat_a).square().mean());  // population
      break;
    }
    case ScalerKind::minmax: {
      s.stat_a = data.minCoeff();
      s.stat_b = data.maxCoeff();
      break;
    }
    case ScalerKind::iqr: {
      s.stat_a = quantile(data, 0.5);
      s.stat_b = quantile(data, 0.75) - quantile(data, 0.25);
      break;
    }
  }
  const double denom =
      kind == ScalerKind::minmax ? s.stat_b - s.stat_a : s.stat_b;
  if (denom == 0.0) s.degenerate = true;  // flat window: scale by 1, flag it
  return s;
}

double transform_value(const FittedScaler& s, double x) {
  double y = (x - s.stat_a) / s.denominator();
  if (s.clip) y = std::clamp(y, s.clip->min, s.clip->max);
  return y;
}

double inverse_value(const FittedScaler& s, double y) {
  return y * s.denominator() + s.stat_a;
}

ArrayXd transform(const FittedScaler& s, const Eigen::Ref<const ArrayXd>& x) {
  ArrayXd y = (x - s.stat_a) / s.denominator();
  if (s.clip) y = y.cwiseMax(s.clip->min).cwiseMin(s.clip->max);
  return y;
}

ArrayXd inverse_transform(const FittedScaler& s,
                          const Eigen::Ref<const ArrayXd>& y) {
  return y * s.denominator() + s.stat_a;
}

ArrayXd align_target_to_source(const FittedScaler& target,
                               const FittedScaler& source,
                               const Eigen::Ref<const ArrayXd>& x) {
  if (target.kind != source.kind)
    throw ArgumentError("align_target_to_source: scaler kinds differ");
  return inverse_transform(source, transform(target, x));
}

ArrayXd unalign(const FittedScaler& target, const FittedScaler& source,
                const Eigen::Ref<const ArrayXd>& y) {
  if (target.kind != source.kind)
    throw ArgumentError("unalign: scaler kinds differ");
  return inverse_transform(target, transform(source, y));
}

void write_scaler(std::ostream& out, const FittedScaler& s) {
  const unsigned char kind = static_cast<unsigned char>(s.kind);
  const unsigned char degenerate = s.degenerate ? 1 : 0;
  const unsigned char has_clip = s.clip ? 1 : 0;
  out.put(static_cast<char>(kind));
  out.put(static_cast<char>(degenerate));
  out.put(static_cast<char>(has_clip));
  const double vals[4] = {s.stat_a, s.stat_b, s.clip ? s.clip->min : 0.0,
                          s.clip ? s.clip->max : 0.0};
  for (double v : vals) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i)
      out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

FittedScaler read_scaler(std::istream& in) {
  const int kind = in.get();
  const int degenerate = in.get();
  const int has_clip = in.get();
  if (kind < 0 || kind > 2 || degenerate < 0 || has_clip < 0)
    throw IoError("scaler record: truncated or invalid header");
  double vals[4];
  for (double& v : vals) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      const int c = in.get();
      if (c < 0) throw IoError("scaler record: truncated value");
      bits |= static_cast<std::uint64_t>(c) << (8 * i);
    }
    std::memcpy(&v, &bits, 8);
  }
  FittedScaler s;
  s.kind = static_cast<ScalerKind>(kind);
  s.degenerate = degenerate != 0;
  s.stat_a = vals[0];
  s.stat_b = vals[1];
  if (has_clip != 0) s.clip = ClipBounds{vals[2], vals[3]};
  return s;
}

}  // namespace synthlab::scalers
