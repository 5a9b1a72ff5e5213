#include "synthlab/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace synthlab::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const Eigen::Ref<const ArrayXd>& pred,
                const Eigen::Ref<const ArrayXd>& truth, const char* what) {
  if (pred.size() != truth.size())
    throw ShapeError(std::string(what) + ": length mismatch (" +
                     std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()) + ")");
  if (pred.size() < 1)
    throw ArgumentError(std::string(what) + ": empty vectors");
}

void check_metrics(const std::vector<std::string>& metrics) {
  if (metrics.empty()) throw ArgumentError("metrics list must not be empty");
  for (const auto& m : metrics)
    if (m != "mse" && m != "mae" && m != "smape")
      throw ArgumentError("unknown metric: " + m);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void check_field(const std::string& f) {
  if (f.find(',') != std::string::npos || f.find('\n') != std::string::npos ||
      f.find('\r') != std::string::npos)
    throw ArgumentError("record field contains a separator: " + f);
}

long parse_long(const std::string& s, long line_no, const char* what) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw IoError("records line " + std::to_string(line_no) + ": bad " +
                  what + " '" + s + "'");
  return v;
}

// Averages one metric over every (channel, window) pair of a store segment.
struct MetricAccumulator {
  double sum = 0.0;
  long count = 0;

  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
};

EvalRecord statused_record(const Forecaster& f, const std::string& target,
                           long horizon, std::optional<long> budget,
                           const std::string& metric, RecordStatus status) {
  return EvalRecord{f.id, f.source, target, horizon, budget, metric, kNaN,
                    status};
}

void finish_records(std::vector<EvalRecord>& out, const Forecaster& f,
                    const std::string& target, long horizon,
                    std::optional<long> budget,
                    const std::vector<std::string>& metrics,
                    const std::vector<MetricAccumulator>& accs) {
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const double v = accs[m].mean();
    if (!std::isfinite(v))
      throw NumericError("evaluation produced a non-finite " + metrics[m] +
                         " for " + f.id + " on " + target);
    out.push_back(
        EvalRecord{f.id, f.source, target, horizon, budget, metrics[m], v,
                   RecordStatus::ok});
  }
}

ArrayXd run_forecast(const Forecaster& f,
                     const Eigen::Ref<const ArrayXd>& history, long horizon) {
  if (!f.predict) throw ArgumentError("forecaster " + f.id + " has no predict");
  ArrayXd pred = f.predict(history, horizon);
  if (pred.size() != horizon)
    throw ShapeError("forecaster " + f.id + " returned " +
                     std::to_string(pred.size()) + " values for horizon " +
                     std::to_string(horizon));
  return pred;
}

}  // namespace

// --- metrics -----------------------------------------------------------------

double mse(const Eigen::Ref<const ArrayXd>& pred,
           const Eigen::Ref<const ArrayXd>& truth) {
  check_pair(pred, truth, "mse");
  return (pred - truth).square().mean();
}

double mae(const Eigen::Ref<const ArrayXd>& pred,
           const Eigen::Ref<const ArrayXd>& truth) {
  check_pair(pred, truth, "mae");
  return (pred - truth).abs().mean();
}

double smape(const Eigen::Ref<const ArrayXd>& pred,
             const Eigen::Ref<const ArrayXd>& truth) {
  check_pair(pred, truth, "smape");
  double total = 0.0;
  for (long i = 0; i < pred.size(); ++i) {
    const double denom = std::abs(pred[i]) + std::abs(truth[i]);
    if (denom > 0.0) total += std::abs(pred[i] - truth[i]) / denom;
  }
  return 200.0 * total / static_cast<double>(pred.size());
}

double compute_metric(const std::string& name,
                      const Eigen::Ref<const ArrayXd>& pred,
                      const Eigen::Ref<const ArrayXd>& truth) {
  if (name == "mse") return mse(pred, truth);
  if (name == "mae") return mae(pred, truth);
  if (name == "smape") return smape(pred, truth);
  throw ArgumentError("unknown metric: " + name);
}

// --- records -----------------------------------------------------------------

const char* record_status_name(RecordStatus s) {
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::horizon_overflow: return "horizon_overflow";
    case RecordStatus::insufficient_data: return "insufficient_data";
  }
  throw ArgumentError("unknown record status");
}

RecordStatus record_status_from_name(const std::string& name) {
  if (name == "ok") return RecordStatus::ok;
  if (name == "horizon_overflow") return RecordStatus::horizon_overflow;
  if (name == "insufficient_data") return RecordStatus::insufficient_data;
  throw ArgumentError("unknown record status: " + name);
}

void sort_records(std::vector<EvalRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) {
                     const long ba = a.budget.value_or(-1);
                     const long bb = b.budget.value_or(-1);
                     return std::tie(a.model, a.source, a.target, a.horizon,
                                     ba, a.metric) <
                            std::tie(b.model, b.source, b.target, b.horizon,
                                     bb, b.metric);
                   });
}

void write_records_csv(std::ostream& out,
                       const std::vector<EvalRecord>& records) {
  std::string buf = "model,source,target,horizon,budget,metric,value,status\n";
  for (const EvalRecord& r : records) {
    check_field(r.model);
    check_field(r.source);
    check_field(r.target);
    check_field(r.metric);
    buf += r.model;
    buf += ',';
    buf += r.source;
    buf += ',';
    buf += r.target;
    buf += ',';
    buf += std::to_string(r.horizon);
    buf += ',';
    if (r.budget) buf += std::to_string(*r.budget);
    buf += ',';
    buf += r.metric;
    buf += ',';
    if (r.status == RecordStatus::ok) append_double(buf, r.value);
    buf += ',';
    buf += record_status_name(r.status);
    buf += '\n';
  }
  out << buf;
}

std::vector<EvalRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("records: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "model,source,target,horizon,budget,metric,value,status")
    throw IoError("records: unexpected header '" + line + "'");

  std::vector<EvalRecord> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 8)
      throw IoError("records line " + std::to_string(line_no) + ": expected 8 fields, got " +
                    std::to_string(fields.size()));
    EvalRecord r;
    r.model = fields[0];
    r.source = fields[1];
    r.target = fields[2];
    r.horizon = parse_long(fields[3], line_no, "horizon");
    if (!fields[4].empty()) r.budget = parse_long(fields[4], line_no, "budget");
    r.metric = fields[5];
    try {
      r.status = record_status_from_name(fields[7]);
    } catch (const ArgumentError& e) {
      throw IoError("records line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.status == RecordStatus::ok) {
      double v = 0.0;
      const auto res =
          std::from_chars(fields[6].data(), fields[6].data() + fields[6].size(), v);
      if (res.ec != std::errc{} ||
          res.ptr != fields[6].data() + fields[6].size() || !std::isfinite(v))
        throw IoError("records line " + std::to_string(line_no) +
                      ": bad value '" + fields[6] + "'");
      r.value = v;
    } else {
      if (!fields[6].empty())
        throw IoError("records line " + std::to_string(line_no) +
                      ": statused record carries a value");
      r.value = kNaN;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_log(std::ostream& out,
                       const std::vector<EvalRecord>& records) {
  std::string buf;
  for (const EvalRecord& r : records) {
    buf += "record model=";
    buf += r.model;
    buf += " source=";
    buf += r.source;
    buf += " target=";
    buf += r.target;
    buf += " horizon=";
    buf += std::to_string(r.horizon);
    buf += " budget=";
    buf += r.budget ? std::to_string(*r.budget) : std::string("none");
    buf += " metric=";
    buf += r.metric;
    buf += " value=";
    if (r.status == RecordStatus::ok)
      append_double(buf, r.value);
    else
      buf += "none";
    buf += " status=";
    buf += record_status_name(r.status);
    buf += '\n';
  }
  out << buf;
}

// --- forecaster wrappers --------------------------------------------------------

Forecaster make_pfn_forecaster(pfn::PfnModel model, std::string id,
                               long look_back) {
  if (look_back < 2)
    throw ArgumentError("pfn forecaster: look_back must be >= 2");
  Forecaster f;
  f.id = std::move(id);
  f.source = "synthetic";
  f.look_back = std::min(look_back, model.config.max_history);
  f.max_horizon = model.config.head_width;
  f.zero_shot = true;
  f.predict = [model = std::move(model), look_back](
                  const Eigen::Ref<const ArrayXd>& history, long horizon) {
    return pfn::predict(model, history, horizon, look_back);
  };
  return f;
}

Forecaster make_baseline_forecaster(baselines::BaselineModel model,
                                    std::string id, std::string source) {
  Forecaster f;
  f.id = std::move(id);
  f.source = std::move(source);
  if (model.kind == "linear") {
    if (!model.linear)
      throw ArgumentError("baseline forecaster: missing linear fit");
    f.look_back = model.linear->look_back;
    f.max_horizon = model.linear->horizon;
    f.zero_shot = false;
  } else if (model.kind == "dlinear") {
    if (!model.dlinear)
      throw ArgumentError("baseline forecaster: missing dlinear fit");
    f.look_back = model.dlinear->trend_branch.look_back;
    f.max_horizon = model.dlinear->trend_branch.horizon;
    f.zero_shot = false;
  } else if (model.kind == "snaive") {
    if (model.period < 1)
      throw ArgumentError("baseline forecaster: snaive needs a period");
    f.look_back = model.period;
    f.max_horizon = std::numeric_limits<long>::max();
    f.zero_shot = true;  // fit-free
  } else if (model.kind == "last") {
    f.look_back = 1;
    f.max_horizon = std::numeric_limits<long>::max();
    f.zero_shot = true;  // fit-free
  } else {
    throw ArgumentError("baseline forecaster: unknown kind " + model.kind);
  }
  f.predict = [model = std::move(model)](
                  const Eigen::Ref<const ArrayXd>& history, long horizon) {
    return baselines::predict(model, history, horizon);
  };
  return f;
}

// --- protocols -------------------------------------------------------------------

namespace {

// Windows + metric means for one (store, segment-window set, horizon) pass.
std::vector<EvalRecord> windowed_records(
    const Forecaster& f, const datasets::SeriesStore& store, long look_back,
    long horizon, std::optional<long> budget,
    const std::vector<std::string>& metrics) {
  std::vector<EvalRecord> out;
  if (horizon > f.max_horizon) {
    for (const auto& m : metrics)
      out.push_back(statused_record(f, store.meta.name, horizon, budget, m,
                                    RecordStatus::horizon_overflow));
    return out;
  }
  std::vector<datasets::Window> wins;
  try {
    wins = datasets::windows(store, datasets::Segment::test, look_back, horizon);
  } catch (const InsufficientDataError&) {
    for (const auto& m : metrics)
      out.push_back(statused_record(f, store.meta.name, horizon, budget, m,
                                    RecordStatus::insufficient_data));
    return out;
  }

  std::vector<MetricAccumulator> accs(metrics.size());
  for (const ArrayXd& channel : store.channels) {
    for (const datasets::Window& w : wins) {
      const auto history = channel.segment(w.input_begin, look_back);
      const auto truth = channel.segment(w.target_begin, horizon);
      const ArrayXd pred = run_forecast(f, history, horizon);
      for (std::size_t m = 0; m < metrics.size(); ++m)
        accs[m].add(compute_metric(metrics[m], pred, truth));
    }
  }
  finish_records(out, f, store.meta.name, horizon, budget, metrics, accs);
  return out;
}

}  // namespace

std::vector<EvalRecord> evaluate_long_term(const Forecaster& forecaster,
                                           const datasets::SeriesStore& store,
                                           const std::vector<long>& horizons,
                                           const LongTermOptions& options) {
  check_metrics(options.metrics);
  if (horizons.empty()) throw ArgumentError("evaluate_long_term: no horizons");
  for (const long h : horizons)
    if (h < 1) throw ArgumentError("evaluate_long_term: horizon must be >= 1");
  if (forecaster.look_back < 1)
    throw ArgumentError("evaluate_long_term: forecaster needs a look_back");
  if (!datasets::has_splits(store))
    throw InsufficientDataError("evaluate_long_term: store has no usable splits");
  if (options.raw_units && store.standardized)
    throw ArgumentError(
        "evaluate_long_term: raw-unit metrics need a raw store");

  const datasets::SeriesStore* view = &store;
  datasets::SeriesStore standardized;
  if (!options.raw_units && !store.standardized) {
    standardized = datasets::standardize(store);
    view = &standardized;
  }

  std::vector<EvalRecord> out;
  for (const long h : horizons) {
    auto recs = windowed_records(forecaster, *view, forecaster.look_back, h,
                                 std::nullopt, options.metrics);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

SingleShotResult evaluate_single_shot(const Forecaster& forecaster,
                                      const datasets::SeriesStore& store,
                                      long horizon,
                                      const SingleShotOptions& options) {
  check_metrics(options.metrics);
  if (horizon < 1)
    throw ArgumentError("evaluate_single_shot: horizon must be >= 1");
  if (forecaster.look_back < 1)
    throw ArgumentError("evaluate_single_shot: forecaster needs a look_back");
  if (store.channel_count() == 0)
    throw ArgumentError("evaluate_single_shot: empty store");

  SingleShotResult result;
  if (horizon > forecaster.max_horizon) {
    for (const auto& m : options.metrics)
      result.records.push_back(
          statused_record(forecaster, store.meta.name, horizon, std::nullopt,
                          m, RecordStatus::horizon_overflow));
    return result;
  }

  std::vector<MetricAccumulator> accs(options.metrics.size());
  for (const ArrayXd& channel : store.channels) {
    const long n = channel.size();
    if (n < forecaster.look_back + horizon) {
      ++result.skipped;
      continue;
    }
    const auto history = channel.head(n - horizon);
    const auto truth = channel.tail(horizon);
    const ArrayXd pred = run_forecast(forecaster, history, horizon);
    for (std::size_t m = 0; m < options.metrics.size(); ++m)
      accs[m].add(compute_metric(options.metrics[m], pred, truth));
  }

  if (accs[0].count == 0) {
    for (const auto& m : options.metrics)
      result.records.push_back(
          statused_record(forecaster, store.meta.name, horizon, std::nullopt,
                          m, RecordStatus::insufficient_data));
    return result;
  }
  finish_records(result.records, forecaster, store.meta.name, horizon,
                 std::nullopt, options.metrics, accs);
  return result;
}

std::vector<EvalRecord> evaluate_fewshot(const ForecasterFactory& factory,
                                         const datasets::SeriesStore& store,
                                         const datasets::BudgetPlan& plan,
                                         long horizon,
                                         const FewshotOptions& options) {
  check_metrics(options.metrics);
  if (!factory) throw ArgumentError("evaluate_fewshot: empty factory");
  if (horizon < 1)
    throw ArgumentError("evaluate_fewshot: horizon must be >= 1");
  if (plan.budgets.empty())
    throw ArgumentError("evaluate_fewshot: empty budget plan");

  std::vector<EvalRecord> out;
  for (const long budget : plan.budgets) {
    const datasets::SeriesStore sliced = datasets::fewshot_slice(store, budget);
    const auto [train_begin, train_end] =
        datasets::segment_range(sliced, datasets::Segment::train);

    // fit one forecaster per channel on its budget-limited train slice
    std::vector<Forecaster> fitted;
    bool insufficient = false;
    try {
      for (const ArrayXd& channel : sliced.channels)
        fitted.push_back(factory(
            channel.segment(train_begin, train_end - train_begin), horizon));
    } catch (const InsufficientDataError&) {
      insufficient = true;
    }

    if (insufficient || fitted.empty()) {
      // metadata for the statused records still comes from the factory shape;
      // fall back to a skeleton when even that is unavailable
      Forecaster skeleton;
      if (!fitted.empty()) {
        skeleton = fitted.front();
      } else {
        try {
          skeleton = factory(ArrayXd(), horizon);
        } catch (...) {
          skeleton.id = "unknown";
        }
      }
      for (const auto& m : options.metrics)
        out.push_back(statused_record(skeleton, store.meta.name, horizon,
                                      budget, m,
                                      RecordStatus::insufficient_data));
      continue;
    }

    const Forecaster& lead = fitted.front();
    const long eval_look_back =
        lead.zero_shot ? std::min(budget, lead.look_back) : lead.look_back;

    if (horizon > lead.max_horizon) {
      for (const auto& m : options.metrics)
        out.push_back(statused_record(lead, store.meta.name, horizon, budget,
                                      m, RecordStatus::horizon_overflow));
      continue;
    }

    std::vector<datasets::Window> wins;
    try {
      wins = datasets::windows(sliced, datasets::Segment::test, eval_look_back,
                               horizon);
    } catch (const InsufficientDataError&) {
      for (const auto& m : options.metrics)
        out.push_back(statused_record(lead, store.meta.name, horizon, budget,
                                      m, RecordStatus::insufficient_data));
      continue;
    }

    std::vector<MetricAccumulator> accs(options.metrics.size());
    for (long c = 0; c < sliced.channel_count(); ++c) {
      const ArrayXd& channel = sliced.channels[c];
      for (const datasets::Window& w : wins) {
        const auto history = channel.segment(w.input_begin, eval_look_back);
        const auto truth = channel.segment(w.target_begin, horizon);
        const ArrayXd pred = run_forecast(fitted[c], history, horizon);
        for (std::size_t m = 0; m < options.metrics.size(); ++m)
          accs[m].add(compute_metric(options.metrics[m], pred, truth));
      }
    }
    finish_records(out, lead, store.meta.name, horizon, budget,
                   options.metrics, accs);
  }
  return out;
}

std::vector<EvalRecord> evaluate_zero_shot_transfer(
    const TransferJob& job, const datasets::SeriesStore& target,
    const std::vector<std::string>& metrics) {
  check_metrics(metrics);
  if (job.horizon < 1)
    throw ArgumentError("transfer: horizon must be >= 1");
  if (job.horizon > job.model.max_horizon)
    throw ArgumentError("transfer: horizon " + std::to_string(job.horizon) +
                        " exceeds the model's capability");
  if (job.look_back < 1) throw ArgumentError("transfer: look_back must be >= 1");
  if (job.model.look_back != job.look_back)
    throw ArgumentError(
        "transfer: job look_back " + std::to_string(job.look_back) +
        " does not match the model's " + std::to_string(job.model.look_back));
  if (target.standardized)
    throw ArgumentError("transfer: target store must be in raw units");
  if (!datasets::has_splits(target))
    throw InsufficientDataError("transfer: target store has no usable splits");

  std::vector<EvalRecord> out;
  std::vector<datasets::Window> wins;
  try {
    wins = datasets::windows(target, datasets::Segment::test, job.look_back,
                             job.horizon);
  } catch (const InsufficientDataError&) {
    for (const auto& m : metrics)
      out.push_back(statused_record(job.model, target.meta.name, job.horizon,
                                    std::nullopt, m,
                                    RecordStatus::insufficient_data));
    return out;
  }

  const auto [train_begin, train_end] =
      datasets::segment_range(target, datasets::Segment::train);

  std::vector<MetricAccumulator> accs(metrics.size());
  for (const ArrayXd& channel : target.channels) {
    const auto target_scaler = scalers::fit(
        job.scaler_kind, channel.segment(train_begin, train_end - train_begin));
    for (const datasets::Window& w : wins) {
      const ArrayXd history = channel.segment(w.input_begin, job.look_back);
      const auto truth = channel.segment(w.target_begin, job.horizon);
      ArrayXd pred;
      if (job.align) {
        const ArrayXd aligned = scalers::align_target_to_source(
            target_scaler, job.source_scaler, history);
        const ArrayXd raw_pred = run_forecast(job.model, aligned, job.horizon);
        pred = scalers::unalign(target_scaler, job.source_scaler, raw_pred);
      } else {
        pred = run_forecast(job.model, history, job.horizon);
      }
      for (std::size_t m = 0; m < metrics.size(); ++m)
        accs[m].add(compute_metric(metrics[m], pred, truth));
    }
  }
  finish_records(out, job.model, target.meta.name, job.horizon, std::nullopt,
                 metrics, accs);
  return out;
}

// --- parallel runner --------------------------------------------------------------

std::vector<EvalRecord> run_jobs(std::vector<EvalJob> jobs, long n_threads) {
  if (n_threads < 1) throw ArgumentError("run_jobs: n_threads must be >= 1");
  for (const EvalJob& j : jobs)
    if (!j.run) throw ArgumentError("run_jobs: job '" + j.key + "' has no body");

  std::stable_sort(jobs.begin(), jobs.end(),
                   [](const EvalJob& a, const EvalJob& b) { return a.key < b.key; });

  std::vector<std::vector<EvalRecord>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = jobs[i].run();
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t pool =
      std::min<std::size_t>(static_cast<std::size_t>(n_threads), jobs.size());
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<EvalRecord> merged;
  for (auto& r : results) merged.insert(merged.end(), r.begin(), r.end());
  return merged;
}

}  // namespace synthlab::eval
