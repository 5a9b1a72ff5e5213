#include "synthlab/baselines.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace synthlab::baselines {

namespace {

void write_u32_le(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32_le(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const int c = in.get();
    if (c < 0) throw IoError("baseline checkpoint: truncated u32");
    v |= static_cast<std::uint32_t>(c) << (8 * i);
  }
  return v;
}

void write_f64_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_f64_le(std::istream& in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c < 0) throw IoError("baseline checkpoint: truncated f64");
    bits |= static_cast<std::uint64_t>(c) << (8 * i);
  }
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_linear(std::ostream& out, const LinearDirectModel& m) {
  write_u32_le(out, static_cast<std::uint32_t>(m.horizon));
  write_u32_le(out, static_cast<std::uint32_t>(m.look_back));
  for (long i = 0; i < m.horizon; ++i)
    for (long j = 0; j < m.look_back; ++j) write_f64_le(out, m.weight(i, j));
  for (long i = 0; i < m.horizon; ++i) write_f64_le(out, m.bias[i]);
}

LinearDirectModel read_linear(std::istream& in) {
  LinearDirectModel m;
  m.horizon = read_u32_le(in);
  m.look_back = read_u32_le(in);
  if (m.horizon < 1 || m.look_back < 1)
    throw IoError("baseline checkpoint: bad linear dimensions");
  m.weight.resize(m.horizon, m.look_back);
  for (long i = 0; i < m.horizon; ++i)
    for (long j = 0; j < m.look_back; ++j) m.weight(i, j) = read_f64_le(in);
  m.bias.resize(m.horizon);
  for (long i = 0; i < m.horizon; ++i) m.bias[i] = read_f64_le(in);
  return m;
}

}  // namespace

ArrayXd last_value(const Eigen::Ref<const ArrayXd>& history, long horizon) {
  if (history.size() < 1) throw ArgumentError("last_value: empty history");
  if (horizon < 1) throw ArgumentError("last_value: horizon must be >= 1");
  return ArrayXd::Constant(horizon, history[history.size() - 1]);
}

ArrayXd seasonal_naive(const Eigen::Ref<const ArrayXd>& history, long period,
                       long horizon) {
  if (history.size() < 1) throw ArgumentError("seasonal_naive: empty history");
  if (period < 1) throw ArgumentError("seasonal_naive: period must be >= 1");
  if (horizon < 1) throw ArgumentError("seasonal_naive: horizon must be >= 1");
  const long n = history.size();
  if (n < period) return last_value(history, horizon);
  ArrayXd out(horizon);
  for (long t = 0; t < horizon; ++t) out[t] = history[n - period + (t % period)];
  return out;
}

LinearDirectModel fit_linear_direct(const Eigen::Ref<const ArrayXd>& train,
                                    long look_back, long horizon,
                                    double lambda) {
  if (look_back < 1 || horizon < 1)
    throw ArgumentError("fit_linear_direct: look_back and horizon must be >= 1");
  if (!(lambda >= 0)) throw ArgumentError("fit_linear_direct: lambda must be >= 0");
  const long n = train.size();
  const long n_windows = n - look_back - horizon + 1;
  if (n_windows < 1)
    throw InsufficientDataError(
        "fit_linear_direct: train series shorter than look_back + horizon");

  MatrixRM X(n_windows, look_back), Y(n_windows, horizon);
  for (long s = 0; s < n_windows; ++s) {
    X.row(s) = train.segment(s, look_back).matrix().transpose();
    Y.row(s) = train.segment(s + look_back, horizon).matrix().transpose();
  }

  // center so the ridge penalty never touches the bias
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const MatrixRM Xc = X.rowwise() - x_mean;
  const MatrixRM Yc = Y.rowwise() - y_mean;

  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd w_cols = gram.ldlt().solve(Xc.transpose() * Yc);  // L x H

  LinearDirectModel m;
  m.look_back = look_back;
  m.horizon = horizon;
  m.weight = w_cols.transpose();  // H x L
  m.bias = (y_mean - x_mean * w_cols).transpose().array();
  if (!m.weight.allFinite() || !m.bias.allFinite())
    throw NumericError("fit_linear_direct: singular system");
  return m;
}

ArrayXd predict(const LinearDirectModel& model,
                const Eigen::Ref<const ArrayXd>& window) {
  if (window.size() != model.look_back)
    throw ShapeError("linear predict: window length != look_back");
  return (model.weight * window.matrix()).array() + model.bias;
}

void decompose(const Eigen::Ref<const ArrayXd>& x, long kernel, ArrayXd& trend,
               ArrayXd& remainder) {
  if (kernel < 1 || kernel % 2 == 0)
    throw ArgumentError("decompose: kernel must be odd and positive");
  const long n = x.size();
  const long h = (kernel - 1) / 2;
  trend.resize(n);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = i - h; j <= i + h; ++j) {
      const long idx = std::clamp(j, 0L, n - 1);  // replicate padding
      acc += x[idx];
    }
    trend[i] = acc / static_cast<double>(kernel);
  }
  remainder = x - trend;
}

DecompLinearModel fit_decomp_linear(const Eigen::Ref<const ArrayXd>& train,
                                    long look_back, long horizon, long kernel,
                                    double lambda) {
  if (kernel < 1 || kernel % 2 == 0)
    throw ArgumentError("fit_decomp_linear: kernel must be odd and positive");
  const long n = train.size();
  const long n_windows = n - look_back - horizon + 1;
  if (n_windows < 1)
    throw InsufficientDataError(
        "fit_decomp_linear: train series shorter than look_back + horizon");

  // joint closed-form ridge over concatenated [trend ; remainder] features,
  // then split column-wise into the two branches (bias shared half-and-half)
  // so that branch-sum prediction reproduces the joint fit exactly
  MatrixRM X(n_windows, 2 * look_back), Y(n_windows, horizon);
  ArrayXd trend, remainder;
  for (long s = 0; s < n_windows; ++s) {
    decompose(train.segment(s, look_back), kernel, trend, remainder);
    X.row(s).head(look_back) = trend.matrix().transpose();
    X.row(s).tail(look_back) = remainder.matrix().transpose();
    Y.row(s) = train.segment(s + look_back, horizon).matrix().transpose();
  }

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const MatrixRM Xc = X.rowwise() - x_mean;
  const MatrixRM Yc = Y.rowwise() - y_mean;
  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd w_cols = gram.ldlt().solve(Xc.transpose() * Yc);
  const Eigen::VectorXd bias = (y_mean - x_mean * w_cols).transpose();
  if (!w_cols.allFinite() || !bias.allFinite())
    throw NumericError("fit_decomp_linear: singular system");

  DecompLinearModel m;
  m.kernel = kernel;
  m.trend_branch.look_back = look_back;
  m.trend_branch.horizon = horizon;
  m.trend_branch.weight = w_cols.topRows(look_back).transpose();
  m.trend_branch.bias = bias.array() / 2.0;
  m.remainder_branch.look_back = look_back;
  m.remainder_branch.horizon = horizon;
  m.remainder_branch.weight = w_cols.bottomRows(look_back).transpose();
  m.remainder_branch.bias = bias.array() / 2.0;
  return m;
}

ArrayXd predict(const DecompLinearModel& model,
                const Eigen::Ref<const ArrayXd>& window) {
  if (window.size() != model.trend_branch.look_back)
    throw ShapeError("decomp predict: window length != look_back");
  ArrayXd trend, remainder;
  decompose(window, model.kernel, trend, remainder);
  return predict(model.trend_branch, trend) +
         predict(model.remainder_branch, remainder);
}

ArrayXd predict(const BaselineModel& model,
                const Eigen::Ref<const ArrayXd>& history, long horizon) {
  if (horizon < 1) throw ArgumentError("baseline predict: horizon must be >= 1");
  if (model.kind == "last") return last_value(history, horizon);
  if (model.kind == "snaive") return seasonal_naive(history, model.period, horizon);
  if (model.kind == "linear") {
    if (!model.linear) throw ArgumentError("baseline predict: missing linear fit");
    if (horizon > model.linear->horizon)
      throw ArgumentError("baseline predict: horizon exceeds fitted horizon");
    const long L = model.linear->look_back;
    if (history.size() < L)
      throw InsufficientDataError("baseline predict: history shorter than look_back");
    return predict(*model.linear, history.tail(L)).head(horizon);
  }
  if (model.kind == "dlinear") {
    if (!model.dlinear) throw ArgumentError("baseline predict: missing dlinear fit");
    if (horizon > model.dlinear->trend_branch.horizon)
      throw ArgumentError("baseline predict: horizon exceeds fitted horizon");
    const long L = model.dlinear->trend_branch.look_back;
    if (history.size() < L)
      throw InsufficientDataError("baseline predict: history shorter than look_back");
    return predict(*model.dlinear, history.tail(L)).head(horizon);
  }
  throw ArgumentError("baseline predict: unknown kind " + model.kind);
}

void write_baseline(std::ostream& out, const BaselineModel& model) {
  out.write("BLN1", 4);
  std::uint32_t tag;
  if (model.kind == "snaive") tag = 0;
  else if (model.kind == "last") tag = 1;
  else if (model.kind == "linear") tag = 2;
  else if (model.kind == "dlinear") tag = 3;
  else throw ArgumentError("write_baseline: unknown kind " + model.kind);
  write_u32_le(out, tag);
  if (tag == 0) write_u32_le(out, static_cast<std::uint32_t>(model.period));
  if (tag == 2) {
    if (!model.linear) throw ArgumentError("write_baseline: missing linear fit");
    write_linear(out, *model.linear);
  }
  if (tag == 3) {
    if (!model.dlinear) throw ArgumentError("write_baseline: missing dlinear fit");
    write_u32_le(out, static_cast<std::uint32_t>(model.dlinear->kernel));
    write_linear(out, model.dlinear->trend_branch);
    write_linear(out, model.dlinear->remainder_branch);
  }
}

BaselineModel read_baseline(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "BLN1", 4) != 0)
    throw IoError("baseline checkpoint: bad magic");
  const std::uint32_t tag = read_u32_le(in);
  BaselineModel m;
  switch (tag) {
    case 0:
      m.kind = "snaive";
      m.period = read_u32_le(in);
      break;
    case 1:
      m.kind = "last";
      break;
    case 2:
      m.kind = "linear";
      m.linear = read_linear(in);
      break;
    case 3: {
      m.kind = "dlinear";
      DecompLinearModel d;
      d.kernel = read_u32_le(in);
      d.trend_branch = read_linear(in);
      d.remainder_branch = read_linear(in);
      m.dlinear = std::move(d);
      break;
    }
    default:
      throw IoError("baseline checkpoint: unknown kind tag");
  }
  return m;
}

}  // namespace synthlab::baselines
