#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "synthlab/errors.hpp"
#include "synthlab/rng.hpp"

namespace synthlab::prior {

using Eigen::ArrayXd;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, 1>;
using MaskMatrix =
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TrendKind { none, linear, log, log1p, quadratic, exponential };

const char* trend_kind_name(TrendKind k);
TrendKind trend_kind_from_name(const std::string& name);

struct IntInterval {
  long min = 0;
  long max = 0;
};

struct RealInterval {
  double min = 0.0;
  double max = 0.0;
};

// Sampling distribution for synthetic series. Defaults reproduce the
// generator described in the training recipe: 3–7 complex Fourier
// coefficients with parts in [-2,2], period uniform on {8..199}, five trend
// families with fixed probabilities, symmetric sharpness intervals, 2–7
// training periods, clipping to [-1,2].
struct PriorConfig {
  IntInterval coeff_count_range{3, 7};
  RealInterval coeff_range{-2.0, 2.0};
  IntInterval period_range{8, 199};
  IntInterval train_periods_range{2, 7};
  std::map<TrendKind, double> trend_probabilities{
      {TrendKind::linear, 0.18},      {TrendKind::log, 0.18},
      {TrendKind::log1p, 0.09},       {TrendKind::exponential, 0.09},
      {TrendKind::quadratic, 0.09},   {TrendKind::none, 0.37}};
  double pure_trend_probability = 0.02;
  // positive halves of the symmetric sharpness unions, per trend kind
  std::map<TrendKind, RealInterval> sharpness_ranges{
      {TrendKind::linear, {1e-4, 1e-2}},
      {TrendKind::log, {1e-2, 1.0}},
      {TrendKind::log1p, {1e-2, 1.0}},
      {TrendKind::exponential, {5e-4, 5e-3}},
      {TrendKind::quadratic, {1e-3, 1e-2}}};
  RealInterval clip_bounds{-1.0, 2.0};
  long target_length = 720;
  long max_history = 500;
};

void validate(const PriorConfig& config);  // throws ArgumentError

struct SeriesSpec {
  std::vector<std::complex<double>> coefficients;
  long period = 0;
  TrendKind trend_kind = TrendKind::none;
  double sharpness = 0.0;
  bool pure_trend = false;
  long train_start = 0;
  long n_train_periods = 0;
  long train_end = 0;  // == train_start + n_train_periods*period + r, r in [0, period)
};

// One scaled sample in fixed-width padded layout: history is left-padded to
// max_history, target right-padded to target_length, masks flag real slots.
struct SyntheticSample {
  ArrayXd history;
  ArrayXd target;
  MaskArray history_mask;
  MaskArray target_mask;
  long history_len = 0;
  long target_len = 0;
  double scale_min = 0.0;
  double scale_max = 0.0;
};

struct SampleBatch {
  MatrixRM history;  // n x max_history
  MatrixRM target;   // n x target_length
  MaskMatrix history_mask;
  MaskMatrix target_mask;
  std::vector<long> history_len;
  std::vector<long> target_len;
};

SeriesSpec sample_spec(const PriorConfig& config, rng::Engine& rng);

// Inverse DFT of a length-`period` spectrum with `coefficients` in bins
// 1..N_c (zero DC), real part, tiled to `total_length`.
ArrayXd render_seasonal(const std::vector<std::complex<double>>& coefficients,
                        long period, long total_length);

// sharpness * g(t) at t = 1..length; exponential uses exp(sharpness*t) - 1.
ArrayXd render_trend(TrendKind kind, double sharpness, long length);

ArrayXd compose(const ArrayXd& seasonal, const ArrayXd& trend, bool pure_trend);

// History/target split with min-max scaling fitted on the full train slice
// and clipping to config.clip_bounds. Throws DegenerateSampleError when the
// train slice is shorter than 2 points or flat.
SyntheticSample split_scale_clip(const ArrayXd& raw, const SeriesSpec& spec,
                                 const PriorConfig& config);

// Fully renders the sample for `seed`, resampling internally on degenerate
// draws. Pure in (config, seed).
SyntheticSample generate_sample(const PriorConfig& config, std::uint64_t seed);

// n independent samples with per-sample seeds derived from `seed` by the
// splittable counter scheme; identical output for any rendering order.
SampleBatch generate_batch(long n, const PriorConfig& config, std::uint64_t seed);

// --- persistence ---------------------------------------------------------

// CSV columns: sample_id, role (history|target), t (0-based within role,
// unpadded), value (max precision).
void write_samples_csv(std::ostream& out, const std::vector<SyntheticSample>& samples);

// Binary layout: magic "SPL1", u32 sample count, then per sample u32 history
// length, u32 target length, history doubles, target doubles. Everything
// little-endian, values 64-bit.
void write_samples_spl1(std::ostream& out, const std::vector<SyntheticSample>& samples);
std::vector<SyntheticSample> read_samples_spl1(std::istream& in,
                                               const PriorConfig& config);

}  // namespace synthlab::prior
