#include "synthlab/synth_prior.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

namespace synthlab::prior {

namespace {

constexpr int kMaxResampleAttempts = 100;

const TrendKind kAllKinds[] = {TrendKind::none,      TrendKind::linear,
                               TrendKind::log,       TrendKind::log1p,
                               TrendKind::quadratic, TrendKind::exponential};

// fixed categorical order for the trend draw (deterministic across platforms)
const TrendKind kDrawOrder[] = {TrendKind::linear, TrendKind::log,
                                TrendKind::log1p,  TrendKind::exponential,
                                TrendKind::quadratic, TrendKind::none};

double prob_of(const PriorConfig& c, TrendKind k) {
  auto it = c.trend_probabilities.find(k);
  return it == c.trend_probabilities.end() ? 0.0 : it->second;
}

}  // namespace

const char* trend_kind_name(TrendKind k) {
  switch (k) {
    case TrendKind::none: return "none";
    case TrendKind::linear: return "linear";
    case TrendKind::log: return "log";
    case TrendKind::log1p: return "log1p";
    case TrendKind::quadratic: return "quadratic";
    case TrendKind::exponential: return "exponential";
  }
  throw ArgumentError("trend_kind_name: unknown kind");
}

TrendKind trend_kind_from_name(const std::string& name) {
  for (TrendKind k : kAllKinds)
    if (name == trend_kind_name(k)) return k;
  throw ArgumentError("unknown trend kind: " + name);
}

void validate(const PriorConfig& c) {
  double total = 0.0;
  for (TrendKind k : kAllKinds) {
    double p = prob_of(c, k);
    if (p < 0) throw ArgumentError("prior config: negative trend probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ArgumentError("prior config: trend probabilities must sum to 1");
  if (c.period_range.min < 2 || c.period_range.max < c.period_range.min ||
      c.period_range.max >= c.max_history)
    throw ArgumentError("prior config: period_range must lie in [2, max_history)");
  if (c.coeff_count_range.min < 1 ||
      c.coeff_count_range.max < c.coeff_count_range.min)
    throw ArgumentError("prior config: bad coeff_count_range");
  if (c.coeff_count_range.min > c.period_range.min / 2)
    throw ArgumentError(
        "prior config: coeff_count_range.min exceeds period_range.min/2");
  if (!(c.coeff_range.min < c.coeff_range.max))
    throw ArgumentError("prior config: bad coeff_range");
  if (c.train_periods_range.min < 1 ||
      c.train_periods_range.max < c.train_periods_range.min)
    throw ArgumentError("prior config: bad train_periods_range");
  if (!(c.pure_trend_probability >= 0 && c.pure_trend_probability <= 1))
    throw ArgumentError("prior config: bad pure_trend_probability");
  if (!(c.clip_bounds.min < 0 && c.clip_bounds.max > 1))
    throw ArgumentError("prior config: clip_bounds must satisfy min < 0 < 1 < max");
  if (c.target_length < 1 || c.max_history < 1)
    throw ArgumentError("prior config: target_length and max_history must be >= 1");
  for (TrendKind k : kAllKinds) {
    if (k == TrendKind::none) continue;
    auto it = c.sharpness_ranges.find(k);
    if (it == c.sharpness_ranges.end())
      throw ArgumentError("prior config: missing sharpness range");
    if (!(it->second.min > 0 && it->second.max >= it->second.min))
      throw ArgumentError("prior config: sharpness interval must be positive");
  }
}

SeriesSpec sample_spec(const PriorConfig& config, rng::Engine& rng) {
  validate(config);
  SeriesSpec s;
  // Draw order is part of the determinism contract: period, coefficient
  // count, coefficient pairs, trend kind, sharpness sign and magnitude,
  // pure-trend flag, train start, train periods, remainder.
  s.period = rng.uniform_int(config.period_range.min, config.period_range.max);
  const long cap = std::min(config.coeff_count_range.max, s.period / 2);
  const long n_coeff = rng.uniform_int(config.coeff_count_range.min, cap);
  s.coefficients.reserve(static_cast<std::size_t>(n_coeff));
  for (long i = 0; i < n_coeff; ++i) {
    const double re = rng.uniform(config.coeff_range.min, config.coeff_range.max);
    const double im = rng.uniform(config.coeff_range.min, config.coeff_range.max);
    s.coefficients.emplace_back(re, im);
  }

  const double u = rng.uniform();
  double cum = 0.0;
  s.trend_kind = TrendKind::none;
  for (TrendKind k : kDrawOrder) {
    cum += prob_of(config, k);
    if (u < cum) {
      s.trend_kind = k;
      break;
    }
  }

  if (s.trend_kind != TrendKind::none) {
    const RealInterval r = config.sharpness_ranges.at(s.trend_kind);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    s.sharpness = sign * rng.uniform(r.min, r.max);
    s.pure_trend = rng.bernoulli(config.pure_trend_probability);
  }

  s.train_start = rng.uniform_int(0, s.period - 1);
  s.n_train_periods = rng.uniform_int(config.train_periods_range.min,
                                      config.train_periods_range.max);
  const long remainder = rng.uniform_int(0, s.period - 1);
  s.train_end = s.train_start + s.n_train_periods * s.period + remainder;
  return s;
}

ArrayXd render_seasonal(const std::vector<std::complex<double>>& coefficients,
                        long period, long total_length) {
  if (period < 1) throw ArgumentError("render_seasonal: period must be >= 1");
  if (total_length < 1)
    throw ArgumentError("render_seasonal: total_length must be >= 1");
  if (2 * static_cast<long>(coefficients.size()) > period)
    throw ArgumentError(
        "render_seasonal: coefficient count exceeds period/2 (aliasing)");

  // one period of Re(IDFT): (1/P) * sum_k [re_k cos(2πkt/P) - im_k sin(2πkt/P)]
  ArrayXd one(period);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(period);
  for (long t = 0; t < period; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      const double angle = step * static_cast<double>(t) *
                           static_cast<double>(k + 1);
      acc += coefficients[k].real() * std::cos(angle) -
             coefficients[k].imag() * std::sin(angle);
    }
    one[t] = acc / static_cast<double>(period);
  }

  ArrayXd out(total_length);
  for (long t = 0; t < total_length; ++t) out[t] = one[t % period];
  return out;
}

ArrayXd render_trend(TrendKind kind, double sharpness, long length) {
  if (length < 1) throw ArgumentError("render_trend: length must be >= 1");
  ArrayXd out(length);
  for (long i = 0; i < length; ++i) {
    const double t = static_cast<double>(i + 1);  // time base starts at 1
    switch (kind) {
      case TrendKind::none: out[i] = 0.0; break;
      case TrendKind::linear: out[i] = sharpness * t; break;
      case TrendKind::log: out[i] = sharpness * std::log(t); break;
      case TrendKind::log1p: out[i] = sharpness * std::log1p(t); break;
      case TrendKind::quadratic: out[i] = sharpness * t * t; break;
      case TrendKind::exponential: out[i] = std::exp(sharpness * t) - 1.0; break;
    }
  }
  if (!out.allFinite()) throw NumericError("render_trend: non-finite value");
  return out;
}

ArrayXd compose(const ArrayXd& seasonal, const ArrayXd& trend, bool pure_trend) {
  if (seasonal.size() != trend.size())
    throw ShapeError("compose: seasonal and trend lengths differ");
  if (pure_trend) return trend;
  return seasonal + trend;
}

SyntheticSample split_scale_clip(const ArrayXd& raw, const SeriesSpec& spec,
                                 const PriorConfig& config) {
  const long n = raw.size();
  if (spec.train_start < 0 || spec.train_end <= spec.train_start)
    throw ArgumentError("split_scale_clip: bad train window");
  if (n < spec.train_end + 1)
    throw ArgumentError("split_scale_clip: raw series shorter than train_end + 1");

  const long train_len = spec.train_end - spec.train_start;
  if (train_len < 2)
    throw DegenerateSampleError("split_scale_clip: train slice shorter than 2");
  const auto train = raw.segment(spec.train_start, train_len);
  const double lo = train.minCoeff();
  const double hi = train.maxCoeff();
  if (!(hi > lo))
    throw DegenerateSampleError("split_scale_clip: flat train slice");

  SyntheticSample s;
  s.scale_min = lo;
  s.scale_max = hi;
  s.history_len = std::min(train_len, config.max_history);
  s.target_len = std::min(n - spec.train_end, config.target_length);

  s.history = ArrayXd::Zero(config.max_history);
  s.history_mask = MaskArray::Constant(config.max_history, false);
  s.target = ArrayXd::Zero(config.target_length);
  s.target_mask = MaskArray::Constant(config.target_length, false);

  const double inv = 1.0 / (hi - lo);
  const auto clip = [&](double x) {
    return std::clamp((x - lo) * inv, config.clip_bounds.min,
                      config.clip_bounds.max);
  };

  // most recent history_len train points, left-padded
  const long pad = config.max_history - s.history_len;
  for (long i = 0; i < s.history_len; ++i) {
    s.history[pad + i] = clip(raw[spec.train_end - s.history_len + i]);
    s.history_mask[pad + i] = true;
  }
  for (long i = 0; i < s.target_len; ++i) {
    s.target[i] = clip(raw[spec.train_end + i]);
    s.target_mask[i] = true;
  }
  return s;
}

SyntheticSample generate_sample(const PriorConfig& config, std::uint64_t seed) {
  for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    const std::uint64_t s =
        attempt == 0 ? seed : rng::derive_seed(seed, "retry", attempt);
    rng::Engine eng(s);
    const SeriesSpec spec = sample_spec(config, eng);
    const long total = spec.train_end + config.target_length;
    const ArrayXd seasonal =
        render_seasonal(spec.coefficients, spec.period, total);
    const ArrayXd trend = render_trend(spec.trend_kind, spec.sharpness, total);
    const ArrayXd raw = compose(seasonal, trend, spec.pure_trend);
    try {
      return split_scale_clip(raw, spec, config);
    } catch (const DegenerateSampleError&) {
      continue;
    }
  }
  throw ArgumentError("generate_sample: config forces degenerate samples");
}

SampleBatch generate_batch(long n, const PriorConfig& config, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("generate_batch: n must be >= 1");
  validate(config);
  SampleBatch b;
  b.history = MatrixRM::Zero(n, config.max_history);
  b.target = MatrixRM::Zero(n, config.target_length);
  b.history_mask = MaskMatrix::Constant(n, config.max_history, false);
  b.target_mask = MaskMatrix::Constant(n, config.target_length, false);
  b.history_len.resize(static_cast<std::size_t>(n));
  b.target_len.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    SyntheticSample s =
        generate_sample(config, rng::derive_seed(seed, "sample", i));
    b.history.row(i) = s.history.matrix().transpose();
    b.target.row(i) = s.target.matrix().transpose();
    b.history_mask.row(i) = s.history_mask.transpose();
    b.target_mask.row(i) = s.target_mask.transpose();
    b.history_len[static_cast<std::size_t>(i)] = s.history_len;
    b.target_len[static_cast<std::size_t>(i)] = s.target_len;
  }
  return b;
}

// --- persistence --------------------------------------------------------------

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
  line.append(buf, res.ptr);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError("sample file: truncated u32");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double read_f64_le(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw IoError("sample file: truncated f64");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_samples_csv(std::ostream& out,
                       const std::vector<SyntheticSample>& samples) {
  out << "sample_id,role,t,value\n";
  std::string line;
  for (std::size_t id = 0; id < samples.size(); ++id) {
    const SyntheticSample& s = samples[id];
    const long pad = s.history.size() - s.history_len;
    for (long t = 0; t < s.history_len; ++t) {
      line.clear();
      line += std::to_string(id);
      line += ",history,";
      line += std::to_string(t);
      line += ',';
      append_double(line, s.history[pad + t]);
      line += '\n';
      out << line;
    }
    for (long t = 0; t < s.target_len; ++t) {
      line.clear();
      line += std::to_string(id);
      line += ",target,";
      line += std::to_string(t);
      line += ',';
      append_double(line, s.target[t]);
      line += '\n';
      out << line;
    }
  }
}

void write_samples_spl1(std::ostream& out,
                        const std::vector<SyntheticSample>& samples) {
  out.write("SPL1", 4);
  write_u32_le(out, static_cast<std::uint32_t>(samples.size()));
  for (const SyntheticSample& s : samples) {
    write_u32_le(out, static_cast<std::uint32_t>(s.history_len));
    write_u32_le(out, static_cast<std::uint32_t>(s.target_len));
    const long pad = s.history.size() - s.history_len;
    for (long t = 0; t < s.history_len; ++t) write_f64_le(out, s.history[pad + t]);
    for (long t = 0; t < s.target_len; ++t) write_f64_le(out, s.target[t]);
  }
}

std::vector<SyntheticSample> read_samples_spl1(std::istream& in,
                                               const PriorConfig& config) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SPL1", 4) != 0)
    throw IoError("sample file: bad magic");
  const std::uint32_t count = read_u32_le(in);
  std::vector<SyntheticSample> samples;
  samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t hlen = read_u32_le(in);
    const std::uint32_t tlen = read_u32_le(in);
    if (hlen > static_cast<std::uint32_t>(config.max_history) ||
        tlen > static_cast<std::uint32_t>(config.target_length))
      throw IoError("sample file: lengths exceed configured caps");
    SyntheticSample s;
    s.history = ArrayXd::Zero(config.max_history);
    s.history_mask = MaskArray::Constant(config.max_history, false);
    s.target = ArrayXd::Zero(config.target_length);
    s.target_mask = MaskArray::Constant(config.target_length, false);
    s.history_len = hlen;
    s.target_len = tlen;
    const long pad = config.max_history - s.history_len;
    for (std::uint32_t t = 0; t < hlen; ++t) {
      s.history[pad + t] = read_f64_le(in);
      s.history_mask[pad + t] = true;
    }
    for (std::uint32_t t = 0; t < tlen; ++t) {
      s.target[t] = read_f64_le(in);
      s.target_mask[t] = true;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace synthlab::prior
