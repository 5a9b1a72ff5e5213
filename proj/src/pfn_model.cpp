#include "synthlab/pfn_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "synthlab/io_bytes.hpp"
#include "synthlab/optim.hpp"
#include "synthlab/scalers.hpp"

namespace synthlab::pfn {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

Tensor uniform_tensor(std::vector<long> shape, double bound,
                      rng::Engine& eng) {
  long n = 1;
  for (const long d : shape) n *= d;
  Eigen::ArrayXd data(n);
  for (long i = 0; i < n; ++i) data[i] = eng.uniform(-bound, bound);
  return tensor::make_tensor(std::move(shape), std::move(data), true);
}

Tensor const_row(const Eigen::Ref<const ArrayXd>& v) {
  return tensor::make_tensor({1, v.size()}, v, false);
}

// x -> mask * x with mask entries 0 or 1/(1-p): inverted dropout recorded on
// the tape through an elementwise product with a constant tensor.
Tensor apply_dropout(const Tensor& x, double p, rng::Engine& eng) {
  ArrayXd mask(x->size());
  const double keep_scale = 1.0 / (1.0 - p);
  for (long i = 0; i < mask.size(); ++i)
    mask[i] = eng.uniform() < p ? 0.0 : keep_scale;
  return tensor::mul(x, tensor::make_tensor(x->shape, std::move(mask), false));
}

}  // namespace

void validate(const PfnConfig& config) {
  if (config.n_layers < 1 || config.n_heads < 1 || config.d_model < 1 ||
      config.d_ffn < 1 || config.max_history < 1 || config.head_width < 1)
    throw ArgumentError("pfn config: all dimensions must be >= 1");
  if (config.d_model % config.n_heads != 0)
    throw ArgumentError("pfn config: d_model must be divisible by n_heads");
  if (!(config.leaky_slope >= 0.0) || !std::isfinite(config.leaky_slope))
    throw ArgumentError("pfn config: leaky_slope must be finite and >= 0");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0))
    throw ArgumentError("pfn config: dropout must lie in [0, 1)");
}

long parameter_count(const PfnConfig& config) {
  const long d = config.d_model, f = config.d_ffn, w = config.head_width;
  const long input_proj = 2 * d;                  // 1 x d weight + bias
  const long cls = d;
  const long positions = (config.max_history + 1) * d;
  const long attention = 4 * (d * d + d);
  const long norms = 4 * d;                       // two gamma/beta pairs
  const long ffn = (d * f + f) + (f * d + d);
  const long head = d * w + w;
  return input_proj + cls + positions +
         config.n_layers * (attention + norms + ffn) + head;
}

MatrixRM sinusoidal_table(long rows, long dims) {
  if (rows < 1 || dims < 1)
    throw ArgumentError("sinusoidal_table: rows and dims must be >= 1");
  MatrixRM table(rows, dims);
  for (long p = 0; p < rows; ++p) {
    for (long i = 0; i < dims; i += 2) {
      const double freq =
          std::exp(-std::log(10000.0) * static_cast<double>(i) /
                   static_cast<double>(dims));
      const double angle = static_cast<double>(p) * freq;
      table(p, i) = std::sin(angle);
      if (i + 1 < dims) table(p, i + 1) = std::cos(angle);
    }
  }
  return table;
}

std::vector<Tensor> PfnModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::vector<std::pair<std::string, Tensor>> PfnModel::named_parameters()
    const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("input.weight", in_w);
  out.emplace_back("input.bias", in_b);
  out.emplace_back("cls", cls);
  out.emplace_back("pos", pos);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string base = "layers." + std::to_string(i) + ".";
    const LayerParams& l = layers[i];
    out.emplace_back(base + "attn.wq", l.wq);
    out.emplace_back(base + "attn.bq", l.bq);
    out.emplace_back(base + "attn.wk", l.wk);
    out.emplace_back(base + "attn.bk", l.bk);
    out.emplace_back(base + "attn.wv", l.wv);
    out.emplace_back(base + "attn.bv", l.bv);
    out.emplace_back(base + "attn.wo", l.wo);
    out.emplace_back(base + "attn.bo", l.bo);
    out.emplace_back(base + "ln1.gamma", l.ln1_gamma);
    out.emplace_back(base + "ln1.beta", l.ln1_beta);
    out.emplace_back(base + "ffn.w1", l.ffn_w1);
    out.emplace_back(base + "ffn.b1", l.ffn_b1);
    out.emplace_back(base + "ffn.w2", l.ffn_w2);
    out.emplace_back(base + "ffn.b2", l.ffn_b2);
    out.emplace_back(base + "ln2.gamma", l.ln2_gamma);
    out.emplace_back(base + "ln2.beta", l.ln2_beta);
  }
  out.emplace_back("head.weight", head_w);
  out.emplace_back("head.bias", head_b);
  return out;
}

long PfnModel::parameter_count() const {
  long n = 0;
  for (const auto& p : parameters()) n += p->size();
  return n;
}

PfnModel init(const PfnConfig& config, std::uint64_t seed) {
  validate(config);
  rng::Engine eng(seed);
  const long d = config.d_model, f = config.d_ffn;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double inv_sqrt_f = 1.0 / std::sqrt(static_cast<double>(f));

  PfnModel m;
  m.config = config;
  m.in_w = uniform_tensor({1, d}, 1.0, eng);  // fan_in of a scalar step is 1
  m.in_b = uniform_tensor({d}, 1.0, eng);
  m.cls = tensor::zeros({1, d}, true);

  const MatrixRM table = sinusoidal_table(config.max_history + 1, d);
  m.pos = tensor::from_matrix(table, true);

  m.layers.resize(config.n_layers);
  for (auto& l : m.layers) {
    l.wq = uniform_tensor({d, d}, inv_sqrt_d, eng);
    l.bq = uniform_tensor({d}, inv_sqrt_d, eng);
    l.wk = uniform_tensor({d, d}, inv_sqrt_d, eng);
    l.bk = uniform_tensor({d}, inv_sqrt_d, eng);
    l.wv = uniform_tensor({d, d}, inv_sqrt_d, eng);
    l.bv = uniform_tensor({d}, inv_sqrt_d, eng);
    l.wo = uniform_tensor({d, d}, inv_sqrt_d, eng);
    l.bo = uniform_tensor({d}, inv_sqrt_d, eng);
    l.ln1_gamma = tensor::make_tensor({d}, ArrayXd::Ones(d), true);
    l.ln1_beta = tensor::zeros({d}, true);
    l.ffn_w1 = uniform_tensor({d, f}, inv_sqrt_d, eng);
    l.ffn_b1 = uniform_tensor({f}, inv_sqrt_d, eng);
    l.ffn_w2 = uniform_tensor({f, d}, inv_sqrt_f, eng);
    l.ffn_b2 = uniform_tensor({d}, inv_sqrt_f, eng);
    l.ln2_gamma = tensor::make_tensor({d}, ArrayXd::Ones(d), true);
    l.ln2_beta = tensor::zeros({d}, true);
  }
  m.head_w = uniform_tensor({d, config.head_width}, inv_sqrt_d, eng);
  m.head_b = uniform_tensor({config.head_width}, inv_sqrt_d, eng);
  return m;
}

Tensor forward_row(const PfnModel& model,
                   const Eigen::Ref<const ArrayXd>& values,
                   rng::Engine* dropout_rng) {
  const PfnConfig& cfg = model.config;
  const long len = values.size();
  if (len < 1) throw DegenerateRowError("forward: history row has no live slots");
  if (len > cfg.max_history)
    throw ContextOverflowError("forward: history length " +
                               std::to_string(len) + " exceeds max_history " +
                               std::to_string(cfg.max_history));
  const bool use_dropout = dropout_rng != nullptr && cfg.dropout > 0.0;

  // newest-first token order gives contiguous recency-anchored positions;
  // self-attention is order-equivariant so only the (value, position) pairing
  // matters
  ArrayXd reversed(len);
  for (long i = 0; i < len; ++i) reversed[i] = values[len - 1 - i];

  const Tensor steps = tensor::make_tensor({len, 1}, std::move(reversed));
  Tensor proj = tensor::add(tensor::matmul(steps, model.in_w), model.in_b);
  Tensor x = tensor::concat_rows({model.cls, proj});
  x = tensor::add(x, tensor::slice_rows(model.pos, 0, len + 1));

  const long d = cfg.d_model;
  const long dh = d / cfg.n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  for (const LayerParams& l : model.layers) {
    const Tensor q = tensor::add(tensor::matmul(x, l.wq), l.bq);
    const Tensor k = tensor::add(tensor::matmul(x, l.wk), l.bk);
    const Tensor v = tensor::add(tensor::matmul(x, l.wv), l.bv);
    std::vector<Tensor> heads;
    heads.reserve(cfg.n_heads);
    for (long h = 0; h < cfg.n_heads; ++h) {
      const long c0 = h * dh, c1 = (h + 1) * dh;
      // fold the 1/sqrt(dh) scale onto the thin query block, not the scores
      const Tensor qh = tensor::scale(tensor::slice_cols(q, c0, c1), inv_sqrt_dh);
      const Tensor kh = tensor::slice_cols(k, c0, c1);
      const Tensor vh = tensor::slice_cols(v, c0, c1);
      const Tensor scores = tensor::matmul(qh, tensor::transpose(kh));
      const Tensor weights = tensor::masked_softmax(scores);
      heads.push_back(tensor::matmul(weights, vh));
    }
    Tensor attn = tensor::add(
        tensor::matmul(tensor::concat_cols(heads), l.wo), l.bo);
    if (use_dropout) attn = apply_dropout(attn, cfg.dropout, *dropout_rng);
    x = tensor::layer_norm(tensor::add(x, attn), l.ln1_gamma, l.ln1_beta);

    Tensor hidden = tensor::leaky_relu(
        tensor::add(tensor::matmul(x, l.ffn_w1), l.ffn_b1), cfg.leaky_slope);
    Tensor ffn = tensor::add(tensor::matmul(hidden, l.ffn_w2), l.ffn_b2);
    if (use_dropout) ffn = apply_dropout(ffn, cfg.dropout, *dropout_rng);
    x = tensor::layer_norm(tensor::add(x, ffn), l.ln2_gamma, l.ln2_beta);
  }

  const Tensor cls_out = tensor::slice_rows(x, 0, 1);
  const Tensor activated = tensor::leaky_relu(cls_out, cfg.leaky_slope);
  return tensor::add(tensor::matmul(activated, model.head_w), model.head_b);
}

MatrixRM forward(const PfnModel& model, const MatrixRM& history,
                 const MaskMatrix& mask) {
  if (history.rows() < 1 || history.cols() < 1)
    throw ArgumentError("forward: empty history batch");
  if (history.cols() > model.config.max_history)
    throw ContextOverflowError(
        "forward: history width " + std::to_string(history.cols()) +
        " exceeds max_history " + std::to_string(model.config.max_history));
  if (mask.rows() != history.rows() || mask.cols() != history.cols())
    throw ShapeError("forward: mask shape must match history shape");

  tensor::NoGradGuard inference;
  MatrixRM out(history.rows(), model.config.head_width);
  ArrayXd live(history.cols());
  for (long b = 0; b < history.rows(); ++b) {
    long n = 0;
    for (long j = 0; j < history.cols(); ++j)
      if (mask(b, j)) live[n++] = history(b, j);
    if (n == 0)
      throw DegenerateRowError("forward: row " + std::to_string(b) +
                               " has no live history slots");
    const Tensor pred = forward_row(model, live.head(n));
    out.row(b) = pred->data.matrix().transpose();
  }
  return out;
}

double masked_mse(const MatrixRM& predictions, const MatrixRM& targets,
                  const MaskMatrix& target_mask) {
  if (predictions.rows() != targets.rows() ||
      predictions.cols() != targets.cols() ||
      predictions.rows() != target_mask.rows() ||
      predictions.cols() != target_mask.cols())
    throw ShapeError("masked_mse: shapes must agree");
  double sse = 0.0;
  long valid = 0;
  for (long i = 0; i < predictions.rows(); ++i)
    for (long j = 0; j < predictions.cols(); ++j)
      if (target_mask(i, j)) {
        const double d = predictions(i, j) - targets(i, j);
        sse += d * d;
        ++valid;
      }
  if (valid == 0)
    throw DegenerateSampleError("masked_mse: no valid target slots");
  return sse / static_cast<double>(valid);
}

void validate(const TrainConfig& config) {
  if (config.n_samples < 1 || config.batch_size < 1 || config.epochs < 1)
    throw ArgumentError("train config: counts must be >= 1");
  if (!(config.base_lr > 0.0) || !std::isfinite(config.base_lr))
    throw ArgumentError("train config: base_lr must be finite and > 0");
}

namespace {

// Expands a sample's (possibly shorter, possibly gappy) target into dense
// head_width-wide target/weight rows; weight 1 marks a live slot.
void build_target_row(const prior::SyntheticSample& sample, long head_width,
                      ArrayXd& target, ArrayXd& weight) {
  target.resize(head_width);
  weight.resize(head_width);
  const long w = std::min<long>(head_width, sample.target.size());
  for (long j = 0; j < head_width; ++j) {
    const bool on = j < w && sample.target_mask[j];
    target[j] = on ? sample.target[j] : 0.0;
    weight[j] = on ? 1.0 : 0.0;
  }
}

// Masked-SSE loss graph for one sample, scaled by 1/batch_valid so per-row
// backward passes accumulate exactly the batch-mean gradient.
Tensor row_loss(const PfnModel& model, const prior::SyntheticSample& sample,
                double inv_batch_valid, rng::Engine* dropout_rng) {
  const ArrayXd live = sample.history.tail(sample.history_len);
  const Tensor pred = forward_row(model, live, dropout_rng);

  ArrayXd target, weight;
  build_target_row(sample, model.config.head_width, target, weight);
  const Tensor diff = tensor::sub(pred, const_row(target));
  const Tensor masked =
      tensor::mul(tensor::mul(diff, diff), const_row(weight));
  return tensor::scale(tensor::sum(masked), inv_batch_valid);
}

long live_targets(const prior::SyntheticSample& sample, long head_width) {
  long n = 0;
  const long w = std::min<long>(head_width, sample.target.size());
  for (long j = 0; j < w; ++j)
    if (sample.target_mask[j]) ++n;
  return n;
}

}  // namespace

TrainLog train(PfnModel& model, const prior::PriorConfig& prior_config,
               const TrainConfig& train_config) {
  validate(model.config);
  validate(train_config);
  prior::validate(prior_config);

  const std::vector<Tensor> params = model.parameters();
  tensor::AdamState adam(params);

  const long steps_per_epoch =
      (train_config.n_samples + train_config.batch_size - 1) /
      train_config.batch_size;
  TrainLog log;
  log.warmup_steps = (steps_per_epoch + 1) / 2;  // half an epoch, rounded up
  const long total_steps = steps_per_epoch * train_config.epochs;
  const tensor::LrSchedule schedule{train_config.base_lr, log.warmup_steps,
                                    total_steps};

  std::vector<long> order(train_config.n_samples);
  std::iota(order.begin(), order.end(), 0L);
  rng::Engine dropout_rng(rng::derive_seed(train_config.seed, "dropout", 0));
  rng::Engine* drop =
      model.config.dropout > 0.0 ? &dropout_rng : nullptr;

  long step = 0;
  bool first_batch = true;
  ArrayXd target, weight;  // reused across fused-path rows
  for (long epoch = 0; epoch < train_config.epochs; ++epoch) {
    rng::Engine shuffle_eng(
        rng::derive_seed(train_config.seed, "epoch", epoch));
    for (long i = train_config.n_samples - 1; i > 0; --i) {
      const long j = shuffle_eng.uniform_int(0, i);
      std::swap(order[i], order[j]);
    }

    double epoch_sse = 0.0;
    long epoch_valid = 0;
    for (long start = 0; start < train_config.n_samples;
         start += train_config.batch_size) {
      const long count =
          std::min<long>(train_config.batch_size, train_config.n_samples - start);
      std::vector<prior::SyntheticSample> batch;
      batch.reserve(count);
      long batch_valid = 0;
      for (long b = 0; b < count; ++b) {
        const std::uint64_t sample_seed = rng::derive_seed(
            train_config.seed, "sample",
            static_cast<std::uint64_t>(order[start + b]));
        batch.push_back(prior::generate_sample(prior_config, sample_seed));
        batch_valid += live_targets(batch.back(), model.config.head_width);
      }
      if (batch_valid == 0)
        throw DegenerateSampleError("train: batch has no valid target slots");

      tensor::zero_grad(params);
      double batch_loss = 0.0;
      for (const auto& sample : batch) {
        if (drop == nullptr) {
          // dropout off: the fused kernel computes the identical loss and
          // gradients without recording a tape
          build_target_row(sample, model.config.head_width, target, weight);
          batch_loss += fused_row_backward(
              model, sample.history.tail(sample.history_len), target, weight,
              1.0 / batch_valid);
        } else {
          const Tensor loss = row_loss(model, sample, 1.0 / batch_valid, drop);
          tensor::backward(loss);
          batch_loss += loss->data[0];
        }
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at step " << step << " (epoch " << epoch
            << ", lr " << tensor::lr_at(schedule, step) << ", first batch seed "
            << rng::derive_seed(train_config.seed, "sample",
                                static_cast<std::uint64_t>(order[start]))
            << ")";
        throw NumericError(msg.str());
      }
      if (first_batch) {
        log.initial_loss = batch_loss;
        first_batch = false;
      }
      tensor::adam_step(params, adam, tensor::lr_at(schedule, step));
      ++step;
      epoch_sse += batch_loss * batch_valid;
      epoch_valid += batch_valid;
    }
    log.epoch_loss.push_back(epoch_sse / static_cast<double>(epoch_valid));
  }

  log.steps = step;
  log.final_loss = log.epoch_loss.back();
  model.meta.seed = train_config.seed;
  model.meta.steps = static_cast<std::uint64_t>(step);
  model.meta.final_loss = log.final_loss;
  return log;
}

double validation_loss(const PfnModel& model,
                       const prior::PriorConfig& prior_config, long n_draws,
                       std::uint64_t seed) {
  if (n_draws < 1) throw ArgumentError("validation_loss: n_draws must be >= 1");
  tensor::NoGradGuard inference;
  double sse = 0.0;
  long valid = 0;
  for (long i = 0; i < n_draws; ++i) {
    const auto sample = prior::generate_sample(
        prior_config, rng::derive_seed(seed, "val", static_cast<std::uint64_t>(i)));
    const ArrayXd live = sample.history.tail(sample.history_len);
    const Tensor pred = forward_row(model, live);
    const long w = std::min<long>(model.config.head_width, sample.target.size());
    for (long j = 0; j < w; ++j)
      if (sample.target_mask[j]) {
        const double d = pred->data[j] - sample.target[j];
        sse += d * d;
        ++valid;
      }
  }
  if (valid == 0)
    throw DegenerateSampleError("validation_loss: no valid target slots");
  return sse / static_cast<double>(valid);
}

ArrayXd predict(const PfnModel& model, const Eigen::Ref<const ArrayXd>& history,
                long horizon, long look_back) {
  if (horizon < 1) throw ArgumentError("predict: horizon must be >= 1");
  if (horizon > model.config.head_width)
    throw HorizonOverflowError(
        "predict: horizon " + std::to_string(horizon) + " exceeds head width " +
        std::to_string(model.config.head_width));
  if (look_back < 2) throw ArgumentError("predict: look_back must be >= 2");
  if (history.size() < 2)
    throw InsufficientDataError("predict: history must hold >= 2 points");

  const long eff =
      std::min({history.size(), look_back, model.config.max_history});
  const ArrayXd window = history.tail(eff);
  const auto scaler =
      scalers::fit(scalers::ScalerKind::minmax, window, std::nullopt);
  const ArrayXd scaled =
      scalers::transform(scaler, window).max(-1.0).min(2.0);

  tensor::NoGradGuard inference;
  const Tensor pred = forward_row(model, scaled);
  const ArrayXd head = pred->data.head(horizon);
  return scalers::inverse_transform(scaler, head);
}

void save(const PfnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write("PFN1", 4);
  io::write_u32_le(out, kCheckpointVersion);
  const PfnConfig& c = model.config;
  for (const long v : {c.n_layers, c.n_heads, c.d_model, c.d_ffn,
                       c.max_history, c.head_width})
    io::write_u32_le(out, static_cast<std::uint32_t>(v));
  io::write_f64_le(out, c.leaky_slope);
  io::write_f64_le(out, c.dropout);
  io::write_u64_le(out, model.meta.seed);
  io::write_u64_le(out, model.meta.steps);
  io::write_f64_le(out, model.meta.final_loss);

  const auto named = model.named_parameters();
  io::write_u32_le(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    io::write_u32_le(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_u32_le(out, static_cast<std::uint32_t>(t->shape.size()));
    for (const long d : t->shape)
      io::write_u32_le(out, static_cast<std::uint32_t>(d));
    for (long i = 0; i < t->size(); ++i) io::write_f64_le(out, t->data[i]);
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

PfnModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PFN1", 4) != 0)
    throw IoError("checkpoint " + path + ": bad magic");
  const std::uint32_t version = io::read_u32_le(in, "checkpoint");
  if (version != kCheckpointVersion)
    throw IoError("checkpoint " + path + ": unsupported version " +
                  std::to_string(version));

  PfnConfig config;
  config.n_layers = io::read_u32_le(in, "checkpoint");
  config.n_heads = io::read_u32_le(in, "checkpoint");
  config.d_model = io::read_u32_le(in, "checkpoint");
  config.d_ffn = io::read_u32_le(in, "checkpoint");
  config.max_history = io::read_u32_le(in, "checkpoint");
  config.head_width = io::read_u32_le(in, "checkpoint");
  config.leaky_slope = io::read_f64_le(in, "checkpoint");
  config.dropout = io::read_f64_le(in, "checkpoint");
  validate(config);

  PfnModel model = init(config, 0);
  model.meta.seed = io::read_u64_le(in, "checkpoint");
  model.meta.steps = io::read_u64_le(in, "checkpoint");
  model.meta.final_loss = io::read_f64_le(in, "checkpoint");

  const auto named = model.named_parameters();
  const std::uint32_t count = io::read_u32_le(in, "checkpoint");
  if (count != named.size())
    throw IoError("checkpoint " + path + ": expected " +
                  std::to_string(named.size()) + " parameters, file has " +
                  std::to_string(count));
  for (const auto& [name, t] : named) {
    const std::uint32_t name_len = io::read_u32_le(in, "checkpoint");
    std::string got(name_len, '\0');
    if (!in.read(got.data(), name_len))
      throw IoError("checkpoint " + path + ": truncated parameter name");
    if (got != name)
      throw IoError("checkpoint " + path + ": parameter '" + got +
                    "' where '" + name + "' was expected");
    const std::uint32_t rank = io::read_u32_le(in, "checkpoint");
    if (rank != t->shape.size())
      throw IoError("checkpoint " + path + ": rank mismatch for " + name);
    long n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const long dim = io::read_u32_le(in, "checkpoint");
      if (dim != t->shape[r])
        throw IoError("checkpoint " + path + ": shape mismatch for " + name);
      n *= dim;
    }
    for (long i = 0; i < n; ++i) t->data[i] = io::read_f64_le(in, "checkpoint");
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw IoError("checkpoint " + path + ": trailing bytes after parameters");
  return model;
}

}  // namespace synthlab::pfn
