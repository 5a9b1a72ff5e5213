#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synthlab/baselines.hpp"
#include "synthlab/datasets.hpp"
#include "synthlab/errors.hpp"
#include "synthlab/pfn_model.hpp"
#include "synthlab/scalers.hpp"

namespace synthlab::eval {

using Eigen::ArrayXd;

// --- metrics ---------------------------------------------------------------

double mse(const Eigen::Ref<const ArrayXd>& pred,
           const Eigen::Ref<const ArrayXd>& truth);
double mae(const Eigen::Ref<const ArrayXd>& pred,
           const Eigen::Ref<const ArrayXd>& truth);
// Symmetric MAPE in percent: (200/n) * sum |p-t| / (|p|+|t|), with
// zero-denominator terms contributing 0.
double smape(const Eigen::Ref<const ArrayXd>& pred,
             const Eigen::Ref<const ArrayXd>& truth);

// Dispatch by name ("mse" | "mae" | "smape"); unknown names are an error.
double compute_metric(const std::string& name,
                      const Eigen::Ref<const ArrayXd>& pred,
                      const Eigen::Ref<const ArrayXd>& truth);

inline const std::vector<std::string>& default_metrics() {
  static const std::vector<std::string> names{"mse", "mae", "smape"};
  return names;
}

// --- records -----------------------------------------------------------------

// Cells that cannot be computed stay in the output as explicit statused
// records (the "-" and gray-cell conventions of benchmark tables) rather
// than being dropped.
enum class RecordStatus { ok, horizon_overflow, insufficient_data };

const char* record_status_name(RecordStatus s);
RecordStatus record_status_from_name(const std::string& name);

struct EvalRecord {
  std::string model;   // forecaster id
  std::string source;  // dataset the model was fitted on, or "synthetic"
  std::string target;  // dataset the record measures
  long horizon = 0;
  std::optional<long> budget;  // few-shot protocol only
  std::string metric;
  double value = 0.0;  // NaN unless status == ok
  RecordStatus status = RecordStatus::ok;
};

// Canonical order: (model, source, target, horizon, budget, metric).
void sort_records(std::vector<EvalRecord>& records);

// CSV: header + one record per row; value and budget columns are empty when
// absent. Fields must not contain commas or line breaks.
void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records_csv(std::istream& in);

// Line-delimited key=value log, one record per line.
void write_records_log(std::ostream& out, const std::vector<EvalRecord>& records);

// --- forecaster abstraction ---------------------------------------------------

// A fitted model reduced to its forecast function. `predict` receives a
// chronological history (at least look_back points in the window protocols)
// and must return exactly `horizon` values; models that consume a window
// truncate to their own look-back from the tail.
struct Forecaster {
  std::string id;
  std::string source = "synthetic";  // training-data label for records
  long look_back = 0;                // window length the protocols carve
  long max_horizon = 0;              // longest horizon predict can emit
  bool zero_shot = false;  // no fitting; few-shot budgets cap its input instead
  std::function<ArrayXd(const Eigen::Ref<const ArrayXd>&, long)> predict;
};

// Wraps pfn::predict; shares the model's tensors (no copy of the weights).
Forecaster make_pfn_forecaster(pfn::PfnModel model, std::string id = "pfn",
                               long look_back = 250);

// Wraps baselines::predict. look_back derives from the fit (linear kinds),
// the period (snaive), or 1 (last); last/snaive are fit-free and behave as
// zero-shot models under the few-shot protocol.
Forecaster make_baseline_forecaster(baselines::BaselineModel model,
                                    std::string id, std::string source);

// Builds a forecaster from a training slice (few-shot refitting). Zero-shot
// factories ignore the slice and return the pretrained model. Slices too
// small to fit must raise InsufficientDataError. Called with an *empty*
// slice, a factory should return an unfitted metadata skeleton (id, source,
// look_back, zero_shot; predict may be empty) so statused records keep the
// model's identity; factories that throw on the probe get "unknown" ids in
// their insufficient-data records.
using ForecasterFactory = std::function<Forecaster(
    const Eigen::Ref<const ArrayXd>& train, long horizon)>;

// --- protocols -----------------------------------------------------------------

struct LongTermOptions {
  bool raw_units = false;  // default: standardize on train statistics first
  std::vector<std::string> metrics = default_metrics();
};

// Stride-1 sliding windows inside the test segment: history and target both
// lie in the test range, so a test segment of exactly look_back + horizon
// yields one window. Metrics are averaged over windows and channels; one
// record per (horizon, metric). Horizons beyond the forecaster's reach or
// segments too short for a single window become statused records.
std::vector<EvalRecord> evaluate_long_term(const Forecaster& forecaster,
                                           const datasets::SeriesStore& store,
                                           const std::vector<long>& horizons,
                                           const LongTermOptions& options = {});

struct SingleShotOptions {
  std::vector<std::string> metrics = default_metrics();
};

struct SingleShotResult {
  std::vector<EvalRecord> records;
  long skipped = 0;  // channels shorter than look_back + horizon
};

// M4-style: exactly one forecast per channel from the full prefix preceding
// the final `horizon` points, scored on those points, averaged over the
// channels that are long enough.
SingleShotResult evaluate_single_shot(const Forecaster& forecaster,
                                      const datasets::SeriesStore& store,
                                      long horizon,
                                      const SingleShotOptions& options = {});

struct FewshotOptions {
  std::vector<std::string> metrics = default_metrics();
};

// For each budget B: restrict the raw store to its last B train points
// (val/test untouched), refit through the factory on that slice, and score
// stride-1 test windows. Supervised forecasters keep their fitted look-back;
// zero-shot forecasters see their input capped at min(B, look_back), so
// their records saturate once B reaches the look-back. Budgets whose slice
// cannot support a fit or a single window yield insufficient-data records.
std::vector<EvalRecord> evaluate_fewshot(const ForecasterFactory& factory,
                                         const datasets::SeriesStore& store,
                                         const datasets::BudgetPlan& plan,
                                         long horizon,
                                         const FewshotOptions& options = {});

// Transfer presets: a deliberately short horizon and fixed look-back windows.
inline constexpr std::array<long, 2> kTransferLookBacks{104, 148};
inline constexpr long kTransferHorizon = 6;

struct TransferJob {
  Forecaster model;  // fitted on the source dataset (model.source names it)
  scalers::FittedScaler source_scaler;  // fitted on the source train segment
  scalers::ScalerKind scaler_kind = scalers::ScalerKind::standard;
  long look_back = kTransferLookBacks[0];
  long horizon = kTransferHorizon;
  bool align = true;  // false = no-alignment ablation
};

// Per target-test window: re-express the history in the source frame
// (scalers::align_target_to_source against a per-channel target scaler
// fitted on the target train segment), predict, map the forecast back, and
// score in target units.
std::vector<EvalRecord> evaluate_zero_shot_transfer(
    const TransferJob& job, const datasets::SeriesStore& target,
    const std::vector<std::string>& metrics = default_metrics());

// --- parallel runner -----------------------------------------------------------

struct EvalJob {
  std::string key;  // merge order; results concatenate by ascending key
  std::function<std::vector<EvalRecord>()> run;
};

// Executes jobs on up to n_threads workers. Output is identical for every
// thread count: each job's records land in its key-sorted slot before
// concatenation. The first job exception is rethrown after the pool drains.
std::vector<EvalRecord> run_jobs(std::vector<EvalJob> jobs, long n_threads = 1);

}  // namespace synthlab::eval
