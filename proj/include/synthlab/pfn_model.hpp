#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synthlab/errors.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/synth_prior.hpp"
#include "synthlab/tensor.hpp"

namespace synthlab::pfn {

using Eigen::ArrayXd;
using tensor::MatrixRM;
using tensor::Tensor;
using MaskMatrix = prior::MaskMatrix;

// Encoder-only forecaster: scalar steps projected to d_model, a CLS token
// prepended, learnable positions added, n_layers of masked multi-head
// self-attention + feed-forward (post-norm residuals), and the CLS output
// passed through LeakyReLU into a head_width-wide linear head.
struct PfnConfig {
  long n_layers = 5;
  long n_heads = 4;
  long d_model = 128;
  long d_ffn = 512;
  long max_history = 500;
  long head_width = 720;
  double leaky_slope = 0.01;
  double dropout = 0.0;
};

void validate(const PfnConfig& config);  // throws ArgumentError

// Closed-form learnable-parameter count for a config.
long parameter_count(const PfnConfig& config);

// The fixed sinusoidal pattern used to initialize the positional table:
// row p, column 2i -> sin(p / 10000^(2i/d)), column 2i+1 -> cos(same).
MatrixRM sinusoidal_table(long rows, long dims);

struct LayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // attention projections (in x out)
  Tensor ln1_gamma, ln1_beta;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Tensor ln2_gamma, ln2_beta;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  double final_loss = 0.0;
};

struct PfnModel {
  PfnConfig config;
  Tensor in_w, in_b;  // 1 x d_model projection of each scalar step
  Tensor cls;         // 1 x d_model
  Tensor pos;         // (max_history + 1) x d_model, row 0 = CLS position
  std::vector<LayerParams> layers;
  Tensor head_w, head_b;  // d_model x head_width
  TrainMeta meta;

  std::vector<Tensor> parameters() const;
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  long parameter_count() const;  // actual sum over parameters
};

// Deterministic init: linear maps U(-1/sqrt(fan_in), +1/sqrt(fan_in)), layer
// norms at identity, CLS zero, positional table exactly sinusoidal.
PfnModel init(const PfnConfig& config, std::uint64_t seed);

// Tape-recorded forward of one history (chronological live values only,
// oldest first). Positions are recency-anchored: the newest point always
// takes positional row 1, its predecessor row 2, and so on — so the CLS
// token (row 0) sits next to the most recent observation for every length.
// When dropout_rng is given and config.dropout > 0, inverted dropout is
// applied to each sublayer output before its residual add (training only).
// Returns the 1 x head_width prediction tensor.
Tensor forward_row(const PfnModel& model,
                   const Eigen::Ref<const ArrayXd>& values,
                   rng::Engine* dropout_rng = nullptr);

// Batch inference over a fixed-width history matrix. mask flags live slots;
// padded slots are never read. Throws ContextOverflowError when the matrix
// is wider than max_history and DegenerateRowError for all-dead rows.
MatrixRM forward(const PfnModel& model, const MatrixRM& history,
                 const MaskMatrix& mask);

// Hand-scheduled forward/backward of one training row against the masked
// squared-error loss: the tape-free hot path train() takes when dropout is
// off. Computes the same loss and parameter gradients as forward_row plus
// tensor::backward — up to floating-point reassociation — while reusing
// preallocated per-thread workspaces instead of recording a graph.
// `target` and `target_weight` must be head_width long with weights in
// {0, 1}; gradients of loss_scale * sum(weight * (pred - target)^2)
// accumulate into each parameter's grad buffer and the scaled loss is
// returned.
double fused_row_backward(const PfnModel& model,
                          const Eigen::Ref<const ArrayXd>& values,
                          const Eigen::Ref<const ArrayXd>& target,
                          const Eigen::Ref<const ArrayXd>& target_weight,
                          double loss_scale);

// Mean squared error over masked-true target slots only.
double masked_mse(const MatrixRM& predictions, const MatrixRM& targets,
                  const MaskMatrix& target_mask);

struct TrainConfig {
  long n_samples = 500000;
  long batch_size = 512;
  long epochs = 400;
  double base_lr = 0.003;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);  // throws ArgumentError

struct TrainLog {
  std::vector<double> epoch_loss;  // mean masked MSE per epoch
  double initial_loss = 0.0;       // first batch, before any update
  double final_loss = 0.0;         // last epoch mean
  long steps = 0;
  long warmup_steps = 0;
};

// Adam + cosine-warmup training on fresh synthetic batches: a pool of
// n_samples spec seeds is reshuffled every epoch and samples are generated
// on the fly. NaN loss aborts with step/lr/batch-seed diagnostics.
TrainLog train(PfnModel& model, const prior::PriorConfig& prior_config,
               const TrainConfig& train_config);

// Mean masked MSE over freshly generated held-out samples (no gradients).
double validation_loss(const PfnModel& model,
                       const prior::PriorConfig& prior_config, long n_draws,
                       std::uint64_t seed);

// Zero-shot forecast in original units: min-max scale the trailing
// min(len, look_back, max_history) points on themselves, clip to [-1, 2],
// run the encoder, take the first `horizon` head outputs, and invert the
// scaling. look_back defaults to 250.
ArrayXd predict(const PfnModel& model, const Eigen::Ref<const ArrayXd>& history,
                long horizon, long look_back = 250);

// Checkpoint: magic "PFN1", version, config record, training metadata, then
// a named parameter table (name, shape, little-endian doubles). Loading
// reproduces forward outputs bit-identically.
void save(const PfnModel& model, const std::string& path);
PfnModel load(const std::string& path);

}  // namespace synthlab::pfn
