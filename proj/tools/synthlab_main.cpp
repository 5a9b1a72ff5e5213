// synthlab -- command-line front end for the forecasting laboratory.
//
// Subcommands: generate, train-pfn, train-baseline, eval, fewshot, transfer,
// report. Every run that produces an output file writes a JSON manifest
// (command, seed, versions, effective config) beside it. Exit codes: 0 ok,
// 1 runtime failure, 2 usage error. All randomness flows from --seed, with
// the SYNTHLAB_SEED environment variable as a fallback; flags override
// values from --config files (one key per line), which override defaults.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "synthlab/baselines.hpp"
#include "synthlab/datasets.hpp"
#include "synthlab/errors.hpp"
#include "synthlab/evaluation.hpp"
#include "synthlab/pfn_model.hpp"
#include "synthlab/reporting.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/scalers.hpp"
#include "synthlab/synth_prior.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace synthlab;
using Eigen::ArrayXd;

namespace {

constexpr const char* kVersion = "0.1.0";

json version_block() {
  return json{{"synthlab", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)}};
}

// Manifest lands beside the output: <file>.manifest.json for files,
// <dir>/manifest.json for directories. Contents carry no timestamps so the
// same run produces byte-identical manifests.
void write_manifest(const std::string& output, const std::string& command,
                    std::uint64_t seed, const json& config) {
  const fs::path target(output);
  const fs::path mpath = fs::is_directory(target)
                             ? target / "manifest.json"
                             : fs::path(output + ".manifest.json");
  json doc;
  doc["command"] = command;
  doc["config"] = config;
  doc["seed"] = seed;
  doc["versions"] = version_block();
  std::ofstream out(mpath);
  if (!out) throw IoError("cannot write manifest: " + mpath.string());
  out << doc.dump(2) << "\n";
}

datasets::SeriesStore load_dataset(const std::string& registry,
                                   const std::string& name) {
  if (registry.empty()) throw ArgumentError("missing registry");
  if (name.empty()) throw ArgumentError("missing dataset name (--dataset)");
  for (const auto& meta : datasets::read_registry(registry))
    if (meta.name == name) return datasets::load_csv(meta.path, meta);
  throw ArgumentError("dataset '" + name + "' not found in registry " +
                      registry);
}

struct AnyModel {
  std::string kind;  // "pfn" or a baseline kind
  pfn::PfnModel pfn;
  baselines::BaselineModel baseline;
};

AnyModel load_any_model(const std::string& path) {
  if (path.empty()) throw ArgumentError("missing model path (--model)");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw IoError("model file too short: " + path);
  const std::string tag(magic, 4);
  AnyModel out;
  if (tag == "PFN1") {
    in.close();
    out.kind = "pfn";
    out.pfn = pfn::load(path);
  } else if (tag == "BLN1") {
    in.seekg(0);
    out.baseline = baselines::read_baseline(in);
    out.kind = out.baseline.kind;
  } else {
    throw IoError("unrecognized model format in " + path);
  }
  return out;
}

// source_label: dataset the forecaster represents in records; empty keeps
// the wrapper default ("synthetic" for the PFN).
eval::Forecaster wrap_model(const AnyModel& model, long look_back,
                            const std::string& source_label) {
  if (model.kind == "pfn") {
    auto f = eval::make_pfn_forecaster(model.pfn, "pfn", look_back);
    if (!source_label.empty()) f.source = source_label;
    return f;
  }
  return eval::make_baseline_forecaster(
      model.baseline, model.kind,
      source_label.empty() ? "unknown" : source_label);
}

void write_records_file(const std::string& path,
                        std::vector<eval::EvalRecord> records) {
  eval::sort_records(records);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write records: " + path);
  eval::write_records_csv(out, records);
}

std::array<double, 3> ratios_array(const std::vector<double>& ratios) {
  if (ratios.size() != 3)
    throw ArgumentError("--ratios needs exactly three comma-separated values");
  return {ratios[0], ratios[1], ratios[2]};
}

std::string zero_pad(long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08ld", v);
  return buf;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  std::string out, name = "synthetic", registry, out_dir;
  bool bundled = false;
  long n = 7, length = 2000, period = 24;
  std::vector<long> horizons = {24, 48, 96, 192};
  std::vector<double> ratios = {0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
};

datasets::SeriesStore synthesize_store(const GenerateOpts& o) {
  prior::PriorConfig config;
  config.period_range = {o.period, o.period};
  prior::validate(config);
  if (o.n < 1 || o.length < 2)
    throw ArgumentError("generate: --n must be >= 1 and --length >= 2");

  datasets::SeriesStore store;
  store.meta.name = o.name;
  store.meta.path = fs::path(o.out).filename().string();
  store.meta.frequency = "hourly";
  store.meta.period = o.period;
  store.meta.horizons = o.horizons;
  store.meta.ratios = ratios_array(o.ratios);
  store.meta.channel_count = o.n;

  store.timestamps.reserve(o.length);
  for (long t = 0; t < o.length; ++t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%06ld", t);
    store.timestamps.emplace_back(buf);
  }
  for (long c = 0; c < o.n; ++c) {
    rng::Engine eng(
        rng::derive_seed(o.seed, "corpus", static_cast<std::uint64_t>(c)));
    const auto spec = prior::sample_spec(config, eng);
    const ArrayXd seasonal =
        prior::render_seasonal(spec.coefficients, spec.period, o.length);
    const ArrayXd trend =
        prior::render_trend(spec.trend_kind, spec.sharpness, o.length);
    ArrayXd x = prior::compose(seasonal, trend, spec.pure_trend);
    const auto s = scalers::fit(scalers::ScalerKind::minmax, x, std::nullopt);
    x = scalers::transform(s, x);
    for (long t = 0; t < o.length; ++t) x[t] += eng.uniform(-0.02, 0.02);
    store.channels.push_back(std::move(x));
    store.channel_names.push_back("c" + std::to_string(c + 1));
  }
  store.splits = datasets::split_by_ratio(o.length, store.meta.ratios);
  return store;
}

int cmd_generate(const GenerateOpts& o) {
  if (o.bundled) {
    if (o.out_dir.empty())
      throw ArgumentError("generate --bundled needs --out-dir");
    const std::string registry = datasets::make_bundled_corpus(o.out_dir, o.seed);
    write_manifest(o.out_dir, "generate", o.seed,
                   json{{"bundled", true}, {"out_dir", o.out_dir}});
    std::cout << "registry " << registry << "\n";
    return 0;
  }
  if (o.out.empty())
    throw ArgumentError("generate needs --out (or --bundled with --out-dir)");

  const auto store = synthesize_store(o);
  datasets::write_csv_file(o.out, store);
  if (!o.registry.empty()) {
    auto meta = store.meta;
    const fs::path reg_dir = fs::absolute(o.registry).parent_path();
    const fs::path csv_abs = fs::absolute(o.out);
    meta.path = csv_abs.parent_path() == reg_dir
                    ? csv_abs.filename().string()
                    : csv_abs.string();
    // merge into an existing registry so transfer setups can be built up
    // one generate call at a time; same-name entries are replaced
    std::vector<datasets::DatasetMeta> metas;
    if (fs::exists(o.registry)) metas = datasets::read_registry(o.registry);
    std::erase_if(metas, [&](const datasets::DatasetMeta& m) {
      return m.name == meta.name;
    });
    metas.push_back(std::move(meta));
    datasets::write_registry(o.registry, metas);
  }
  write_manifest(o.out, "generate", o.seed,
                 json{{"name", o.name},
                      {"n", o.n},
                      {"length", o.length},
                      {"period", o.period},
                      {"horizons", o.horizons},
                      {"ratios", o.ratios},
                      {"registry", o.registry},
                      {"out", o.out}});
  std::cout << "wrote " << o.out << " channels " << o.n << " length "
            << o.length << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train-pfn

struct TrainPfnOpts {
  std::string out;
  long layers = 5, d_model = 128, heads = 4, ffn = 512;
  long max_history = 500, head_width = 720;
  double dropout = 0.0, leaky_slope = 0.01;
  long samples = 500000, batch = 512, epochs = 400;
  double lr = 0.003;
  long period_min = 8, period_max = 199, target_length = 720;
  std::uint64_t seed = 0;
};

int cmd_train_pfn(const TrainPfnOpts& o) {
  pfn::PfnConfig cfg;
  cfg.n_layers = o.layers;
  cfg.n_heads = o.heads;
  cfg.d_model = o.d_model;
  cfg.d_ffn = o.ffn;
  cfg.max_history = o.max_history;
  cfg.head_width = o.head_width;
  cfg.dropout = o.dropout;
  cfg.leaky_slope = o.leaky_slope;

  prior::PriorConfig prior_config;
  prior_config.period_range = {o.period_min, o.period_max};
  prior_config.max_history = o.max_history;
  prior_config.target_length = o.target_length;

  pfn::TrainConfig train_config;
  train_config.n_samples = o.samples;
  train_config.batch_size = o.batch;
  train_config.epochs = o.epochs;
  train_config.base_lr = o.lr;
  train_config.seed = o.seed;

  auto model = pfn::init(cfg, o.seed);
  std::cout << "parameters " << model.parameter_count() << "\n";
  const auto log = pfn::train(model, prior_config, train_config);
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
    std::cout << "epoch " << e + 1 << " loss " << log.epoch_loss[e] << "\n";
  std::cout << "initial_loss " << log.initial_loss << "\n"
            << "final_loss " << log.final_loss << "\n"
            << "steps " << log.steps << "\n";

  pfn::save(model, o.out);
  write_manifest(o.out, "train-pfn", o.seed,
                 json{{"layers", o.layers},
                      {"d_model", o.d_model},
                      {"heads", o.heads},
                      {"ffn", o.ffn},
                      {"max_history", o.max_history},
                      {"head_width", o.head_width},
                      {"dropout", o.dropout},
                      {"leaky_slope", o.leaky_slope},
                      {"samples", o.samples},
                      {"batch", o.batch},
                      {"epochs", o.epochs},
                      {"lr", o.lr},
                      {"period_min", o.period_min},
                      {"period_max", o.period_max},
                      {"target_length", o.target_length},
                      {"out", o.out}});
  std::cout << "checkpoint " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train-baseline

struct TrainBaselineOpts {
  std::string kind, out, registry, dataset;
  long channel = 0, look_back = 336, horizon = 96, kernel = 25, period = 0;
  double lambda = 1e-6;
  std::uint64_t seed = 0;
};

int cmd_train_baseline(const TrainBaselineOpts& o) {
  baselines::BaselineModel model;
  model.kind = o.kind;

  if (o.kind == "last") {
    // nothing to fit
  } else if (o.kind == "snaive") {
    long period = o.period;
    if (period <= 0) {
      const auto store = load_dataset(o.registry, o.dataset);
      period = store.meta.period;
    }
    if (period <= 0)
      throw ArgumentError("train-baseline snaive: needs --period or a "
                          "dataset with one");
    model.period = period;
  } else if (o.kind == "linear" || o.kind == "dlinear") {
    const auto store = load_dataset(o.registry, o.dataset);
    if (o.channel < 0 || o.channel >= store.channel_count())
      throw ArgumentError("train-baseline: --channel out of range");
    const auto [begin, end] =
        datasets::segment_range(store, datasets::Segment::train);
    const ArrayXd train = store.channels[static_cast<std::size_t>(o.channel)]
                              .segment(begin, end - begin);
    if (o.kind == "linear") {
      model.linear =
          baselines::fit_linear_direct(train, o.look_back, o.horizon, o.lambda);
    } else {
      model.dlinear = baselines::fit_decomp_linear(train, o.look_back,
                                                   o.horizon, o.kernel,
                                                   o.lambda);
    }
  } else {
    throw ArgumentError("train-baseline: unknown kind '" + o.kind + "'");
  }

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + o.out);
  baselines::write_baseline(out, model);
  out.close();
  write_manifest(o.out, "train-baseline", o.seed,
                 json{{"kind", o.kind},
                      {"registry", o.registry},
                      {"dataset", o.dataset},
                      {"channel", o.channel},
                      {"look_back", o.look_back},
                      {"horizon", o.horizon},
                      {"kernel", o.kernel},
                      {"period", o.period},
                      {"lambda", o.lambda},
                      {"out", o.out}});
  std::cout << "checkpoint " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string registry, dataset, model, model_source, out;
  std::string protocol = "long-term";
  std::vector<long> horizons;
  std::vector<std::string> metrics = {"mse", "mae", "smape"};
  bool raw = false;
  long look_back = 250;
  long jobs = 0;
  std::uint64_t seed = 0;
};

long effective_jobs(long jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<long>(hw);
}

int cmd_eval(const EvalOpts& o) {
  const auto store = load_dataset(o.registry, o.dataset);
  const auto model = load_any_model(o.model);
  const std::string source =
      !o.model_source.empty() ? o.model_source
      : model.kind == "pfn"   ? std::string("synthetic")
                              : o.dataset;
  const auto forecaster = wrap_model(model, o.look_back, source);
  const std::vector<long> horizons =
      o.horizons.empty() ? store.meta.horizons : o.horizons;
  if (horizons.empty())
    throw ArgumentError("eval: no horizons given and the dataset lists none");

  std::vector<eval::EvalRecord> records;
  if (o.protocol == "long-term") {
    eval::LongTermOptions options;
    options.raw_units = o.raw;
    options.metrics = o.metrics;
    std::vector<eval::EvalJob> jobs;
    for (const long h : horizons)
      jobs.push_back({zero_pad(h), [&, h]() {
                        return eval::evaluate_long_term(forecaster, store, {h},
                                                        options);
                      }});
    records = eval::run_jobs(jobs, effective_jobs(o.jobs));
  } else {  // single-shot
    eval::SingleShotOptions options;
    options.metrics = o.metrics;
    for (const long h : horizons) {
      auto result = eval::evaluate_single_shot(forecaster, store, h, options);
      if (result.skipped > 0)
        std::cout << "horizon " << h << " skipped " << result.skipped
                  << " channels\n";
      records.insert(records.end(), result.records.begin(),
                     result.records.end());
    }
  }

  write_records_file(o.out, std::move(records));
  write_manifest(o.out, "eval", o.seed,
                 json{{"registry", o.registry},
                      {"dataset", o.dataset},
                      {"model", o.model},
                      {"model_source", source},
                      {"protocol", o.protocol},
                      {"horizons", horizons},
                      {"metrics", o.metrics},
                      {"raw", o.raw},
                      {"look_back", o.look_back},
                      {"out", o.out}});
  std::cout << "records " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fewshot

struct FewshotOpts {
  std::string registry, dataset, kind, model, out;
  std::string plan = "geometric";
  long horizon = 96, look_back = 336, kernel = 25;
  double lambda = 1e-6;
  long jobs = 0;
  std::uint64_t seed = 0;
};

int cmd_fewshot(const FewshotOpts& o) {
  const auto store = load_dataset(o.registry, o.dataset);
  const auto plan = datasets::budgets_for(store.meta.period,
                                          o.plan == "geometric"
                                              ? datasets::BudgetKind::geometric
                                              : datasets::BudgetKind::arithmetic);

  eval::ForecasterFactory factory;
  if (o.kind == "pfn") {
    const auto model = load_any_model(o.model);
    if (model.kind != "pfn")
      throw ArgumentError("fewshot --kind pfn: model file is not a PFN "
                          "checkpoint");
    const auto forecaster = wrap_model(model, o.look_back, "synthetic");
    factory = [forecaster](const Eigen::Ref<const ArrayXd>&, long) {
      return forecaster;
    };
  } else if (o.kind == "snaive" || o.kind == "last") {
    baselines::BaselineModel bm;
    bm.kind = o.kind;
    bm.period = store.meta.period;
    const auto forecaster =
        eval::make_baseline_forecaster(bm, o.kind, o.dataset);
    factory = [forecaster](const Eigen::Ref<const ArrayXd>&, long) {
      return forecaster;
    };
  } else if (o.kind == "linear" || o.kind == "dlinear") {
    const std::string kind = o.kind;
    const std::string dataset = o.dataset;
    const long look_back = o.look_back;
    const long kernel = o.kernel;
    const double lambda = o.lambda;
    factory = [kind, dataset, look_back, kernel,
               lambda](const Eigen::Ref<const ArrayXd>& train, long horizon) {
      eval::Forecaster skeleton;
      skeleton.id = kind;
      skeleton.source = dataset;
      skeleton.look_back = look_back;
      skeleton.max_horizon = horizon;
      if (train.size() == 0) return skeleton;  // metadata probe
      baselines::BaselineModel bm;
      bm.kind = kind;
      if (kind == "linear")
        bm.linear =
            baselines::fit_linear_direct(train, look_back, horizon, lambda);
      else
        bm.dlinear = baselines::fit_decomp_linear(train, look_back, horizon,
                                                  kernel, lambda);
      return eval::make_baseline_forecaster(std::move(bm), kind, dataset);
    };
  } else {
    throw ArgumentError("fewshot: unknown kind '" + o.kind + "'");
  }

  std::vector<eval::EvalJob> jobs;
  for (const long budget : plan.budgets) {
    datasets::BudgetPlan one;
    one.period = plan.period;
    one.budgets = {budget};
    jobs.push_back({zero_pad(budget), [&, one]() {
                      return eval::evaluate_fewshot(factory, store, one,
                                                    o.horizon);
                    }});
  }
  auto records = eval::run_jobs(jobs, effective_jobs(o.jobs));

  write_records_file(o.out, std::move(records));
  write_manifest(o.out, "fewshot", o.seed,
                 json{{"registry", o.registry},
                      {"dataset", o.dataset},
                      {"kind", o.kind},
                      {"model", o.model},
                      {"plan", o.plan},
                      {"budgets", plan.budgets},
                      {"horizon", o.horizon},
                      {"look_back", o.look_back},
                      {"kernel", o.kernel},
                      {"lambda", o.lambda},
                      {"out", o.out}});
  std::cout << "records " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// transfer

struct TransferOpts {
  std::string registry, source, target, model, out;
  std::string scaler = "standard";
  long look_back = 104, horizon = 6;
  bool no_align = false;
  std::uint64_t seed = 0;
};

int cmd_transfer(const TransferOpts& o) {
  const auto source_store = load_dataset(o.registry, o.source);
  const auto target_store = load_dataset(o.registry, o.target);
  const auto kind = scalers::scaler_kind_from_name(o.scaler);

  // dataset-level scaler: fitted on every source train point
  const auto [begin, end] =
      datasets::segment_range(source_store, datasets::Segment::train);
  ArrayXd pooled(source_store.channel_count() * (end - begin));
  for (long c = 0; c < source_store.channel_count(); ++c)
    pooled.segment(c * (end - begin), end - begin) =
        source_store.channels[static_cast<std::size_t>(c)].segment(
            begin, end - begin);

  const auto model = load_any_model(o.model);
  eval::TransferJob job;
  job.model = wrap_model(model, o.look_back, o.source);
  job.source_scaler = scalers::fit(kind, pooled, std::nullopt);
  job.scaler_kind = kind;
  job.look_back = o.look_back;
  job.horizon = o.horizon;
  job.align = !o.no_align;

  auto records = eval::evaluate_zero_shot_transfer(job, target_store);
  write_records_file(o.out, std::move(records));
  write_manifest(o.out, "transfer", o.seed,
                 json{{"registry", o.registry},
                      {"source", o.source},
                      {"target", o.target},
                      {"model", o.model},
                      {"scaler", o.scaler},
                      {"look_back", o.look_back},
                      {"horizon", o.horizon},
                      {"align", !o.no_align},
                      {"out", o.out}});
  std::cout << "records " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::string in, stat, metric, out;
  std::string format = "md";
  std::uint64_t seed = 0;
};

int cmd_report(const ReportOpts& o) {
  std::ifstream in(o.in);
  if (!in) throw IoError("cannot open records: " + o.in);
  const auto records = eval::read_records_csv(in);
  const auto matrix = reporting::ResultsMatrix::from_records(records);
  const auto table = reporting::summarize(matrix, o.stat, o.metric);
  const std::string text = o.format == "md" ? reporting::render_markdown(table)
                                            : reporting::render_csv(table);
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(o.out);
  if (!out) throw IoError("cannot write report: " + o.out);
  out << text;
  out.close();
  write_manifest(o.out, "report", o.seed,
                 json{{"in", o.in},
                      {"stat", o.stat},
                      {"metric", o.metric},
                      {"format", o.format},
                      {"out", o.out}});
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, std::uint64_t& seed) {
  sub->add_option("--seed", seed, "Random seed (SYNTHLAB_SEED as fallback)")
      ->envname("SYNTHLAB_SEED");
  // config files are owned by the root app; let --config (and nothing else
  // the subcommand recognizes) bubble up so it can be given in either place
  sub->fallthrough();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic-prior zero-shot forecasting laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Config file: one key per line under a [subcommand] "
                 "section; flags take precedence");

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset");
  g->add_option("--out", gen.out, "Output CSV path");
  g->add_option("--name", gen.name, "Dataset name for the registry");
  g->add_option("--registry", gen.registry, "Write a registry JSON here");
  g->add_flag("--bundled", gen.bundled,
              "Emit the fixed 7-channel benchmark corpus instead");
  g->add_option("--out-dir", gen.out_dir, "Directory for --bundled output");
  g->add_option("--n", gen.n, "Number of channels");
  g->add_option("--length", gen.length, "Rows per channel");
  g->add_option("--period", gen.period, "Seasonality period");
  g->add_option("--horizons", gen.horizons, "Evaluation horizons")
      ->delimiter(',');
  g->add_option("--ratios", gen.ratios, "Train/val/test ratios")
      ->delimiter(',');
  add_common(g, gen.seed);

  TrainPfnOpts tp;
  auto* t = app.add_subcommand("train-pfn",
                               "Train the PFN forecaster on the prior");
  t->add_option("--out", tp.out, "Checkpoint path")->required();
  t->add_option("--layers", tp.layers, "Encoder layers");
  t->add_option("--d-model", tp.d_model, "Model width");
  t->add_option("--heads", tp.heads, "Attention heads");
  t->add_option("--ffn", tp.ffn, "Feed-forward width");
  t->add_option("--max-history", tp.max_history, "Context length");
  t->add_option("--head-width", tp.head_width, "Forecast head width");
  t->add_option("--dropout", tp.dropout, "Dropout probability");
  t->add_option("--leaky-slope", tp.leaky_slope, "LeakyReLU slope");
  t->add_option("--samples", tp.samples, "Synthetic samples per epoch pool");
  t->add_option("--batch", tp.batch, "Batch size");
  t->add_option("--epochs", tp.epochs, "Epochs");
  t->add_option("--lr", tp.lr, "Base learning rate");
  t->add_option("--period-min", tp.period_min, "Prior period lower bound");
  t->add_option("--period-max", tp.period_max, "Prior period upper bound");
  t->add_option("--target-length", tp.target_length, "Prior target length");
  add_common(t, tp.seed);

  TrainBaselineOpts tb;
  auto* b = app.add_subcommand("train-baseline",
                               "Fit a supervised or naive baseline");
  b->add_option("--kind", tb.kind, "snaive | last | linear | dlinear")
      ->required()
      ->check(CLI::IsMember({"snaive", "last", "linear", "dlinear"}));
  b->add_option("--out", tb.out, "Checkpoint path")->required();
  b->add_option("--registry", tb.registry, "Dataset registry JSON");
  b->add_option("--dataset", tb.dataset, "Dataset name to fit on");
  b->add_option("--channel", tb.channel, "Channel index to fit on");
  b->add_option("--look-back", tb.look_back, "Input window length");
  b->add_option("--horizon", tb.horizon, "Fitted forecast horizon");
  b->add_option("--kernel", tb.kernel, "Moving-average kernel (dlinear)");
  b->add_option("--period", tb.period, "Season length (snaive)");
  b->add_option("--lambda", tb.lambda, "Ridge strength");
  add_common(b, tb.seed);

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "Evaluate a model on a dataset");
  e->add_option("--registry", ev.registry, "Dataset registry JSON");
  e->add_option("--dataset", ev.dataset, "Dataset name");
  e->add_option("--model", ev.model, "Model checkpoint path");
  e->add_option("--model-source", ev.model_source,
                "Source label for records (defaults: pfn=synthetic, "
                "baseline=dataset)");
  e->add_option("--protocol", ev.protocol, "long-term | single-shot")
      ->check(CLI::IsMember({"long-term", "single-shot"}));
  e->add_option("--horizons", ev.horizons,
                "Horizons (default: dataset registry entry)")
      ->delimiter(',');
  e->add_option("--metrics", ev.metrics, "Metrics")->delimiter(',');
  e->add_flag("--raw", ev.raw, "Raw units (long-term defaults to "
                               "standardized)");
  e->add_option("--look-back", ev.look_back, "PFN look-back window");
  e->add_option("--jobs", ev.jobs, "Worker threads (default: cores)");
  e->add_option("--out", ev.out, "Records CSV path")->required();
  add_common(e, ev.seed);

  FewshotOpts fsopts;
  auto* f = app.add_subcommand("fewshot", "Budgeted few-shot sweep");
  f->add_option("--registry", fsopts.registry, "Dataset registry JSON");
  f->add_option("--dataset", fsopts.dataset, "Dataset name");
  f->add_option("--kind", fsopts.kind,
                "pfn | snaive | last | linear | dlinear")
      ->required()
      ->check(CLI::IsMember({"pfn", "snaive", "last", "linear", "dlinear"}));
  f->add_option("--model", fsopts.model, "PFN checkpoint (kind pfn)");
  f->add_option("--plan", fsopts.plan, "geometric | arithmetic")
      ->check(CLI::IsMember({"geometric", "arithmetic"}));
  f->add_option("--horizon", fsopts.horizon, "Forecast horizon");
  f->add_option("--look-back", fsopts.look_back, "Input window length");
  f->add_option("--kernel", fsopts.kernel, "Moving-average kernel (dlinear)");
  f->add_option("--lambda", fsopts.lambda, "Ridge strength");
  f->add_option("--jobs", fsopts.jobs, "Worker threads (default: cores)");
  f->add_option("--out", fsopts.out, "Records CSV path")->required();
  add_common(f, fsopts.seed);

  TransferOpts tr;
  auto* x = app.add_subcommand("transfer",
                               "Zero-shot transfer with scaler alignment");
  x->add_option("--registry", tr.registry, "Dataset registry JSON");
  x->add_option("--source", tr.source, "Source dataset name");
  x->add_option("--target", tr.target, "Target dataset name");
  x->add_option("--model", tr.model, "Model checkpoint path");
  x->add_option("--scaler", tr.scaler, "standard | minmax | iqr")
      ->check(CLI::IsMember({"standard", "minmax", "iqr"}));
  x->add_option("--look-back", tr.look_back, "Transfer look-back window");
  x->add_option("--horizon", tr.horizon, "Transfer horizon");
  x->add_flag("--no-align", tr.no_align, "Skip distribution alignment");
  x->add_option("--out", tr.out, "Records CSV path")->required();
  add_common(x, tr.seed);

  ReportOpts rp;
  auto* r = app.add_subcommand("report", "Aggregate records into a table");
  r->add_option("--in", rp.in, "Records CSV path")->required();
  r->add_option("--stat", rp.stat, "winrate | rank | relmetric")
      ->required()
      ->check(CLI::IsMember({"winrate", "rank", "relmetric"}));
  r->add_option("--metric", rp.metric, "mse | mae | smape")
      ->required()
      ->check(CLI::IsMember({"mse", "mae", "smape"}));
  r->add_option("--format", rp.format, "md | csv")
      ->check(CLI::IsMember({"md", "csv"}));
  r->add_option("--out", rp.out, "Table path (default: stdout)");
  add_common(r, rp.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    std::cerr << "synthlab error: usage: " << err.what() << "\n";
    return 2;
  }

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (t->parsed()) return cmd_train_pfn(tp);
    if (b->parsed()) return cmd_train_baseline(tb);
    if (e->parsed()) return cmd_eval(ev);
    if (f->parsed()) return cmd_fewshot(fsopts);
    if (x->parsed()) return cmd_transfer(tr);
    if (r->parsed()) return cmd_report(rp);
    std::cerr << "synthlab error: usage: no subcommand\n";
    return 2;
  } catch (const ArgumentError& err) {
    std::cerr << "synthlab error: usage: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "synthlab error: usage: " << err.what() << "\n";
    return 2;
  } catch (const Error& err) {
    std::cerr << "synthlab error: runtime: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "synthlab error: internal: " << err.what() << "\n";
    return 1;
  }
}
