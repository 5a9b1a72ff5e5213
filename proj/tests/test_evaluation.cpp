#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "synthlab/evaluation.hpp"

using namespace synthlab;
using Eigen::ArrayXd;

namespace {

datasets::SeriesStore toy_store(long n, long n_channels, std::uint64_t seed,
                                std::array<double, 3> ratios = {0.7, 0.1, 0.2},
                                const std::string& name = "toy") {
  datasets::SeriesStore store;
  store.meta.name = name;
  store.meta.path = name + ".csv";
  store.meta.frequency = "hourly";
  store.meta.period = 5;
  store.meta.horizons = {2, 3};
  store.meta.ratios = ratios;
  store.meta.channel_count = n_channels;
  rng::Engine eng(seed);
  for (long c = 0; c < n_channels; ++c) {
    ArrayXd v(n);
    for (long i = 0; i < n; ++i) v[i] = eng.uniform(0.0, 10.0);
    store.channels.push_back(std::move(v));
    store.channel_names.push_back("c" + std::to_string(c + 1));
  }
  for (long i = 0; i < n; ++i)
    store.timestamps.push_back("t" + std::to_string(i));
  store.splits = datasets::split_by_ratio(n, ratios);
  return store;
}

datasets::SeriesStore periodic_store(long n, long period) {
  datasets::SeriesStore store = toy_store(n, 1, 1);
  for (long i = 0; i < n; ++i)
    store.channels[0][i] = 1.0 + static_cast<double>(i % period);
  store.meta.period = period;
  return store;
}

// Looks the true continuation up by matching the history suffix anywhere in
// the captured channels.
eval::Forecaster oracle_forecaster(std::vector<ArrayXd> channels,
                                   long look_back, double tol = 0.0) {
  eval::Forecaster f;
  f.id = "oracle";
  f.source = "oracle";
  f.look_back = look_back;
  f.max_horizon = 1000000;
  f.zero_shot = true;
  f.predict = [channels = std::move(channels), tol](
                  const Eigen::Ref<const ArrayXd>& history, long horizon) {
    const long len = history.size();
    for (const ArrayXd& channel : channels)
      for (long i = 0; i + len + horizon <= channel.size(); ++i)
        if ((channel.segment(i, len) - history).abs().maxCoeff() <= tol)
          return ArrayXd(channel.segment(i + len, horizon));
    throw Error("oracle: history not found in any channel");
  };
  return f;
}

eval::Forecaster last_value_forecaster(const std::string& source = "toy") {
  baselines::BaselineModel m;
  m.kind = "last";
  return eval::make_baseline_forecaster(std::move(m), "last", source);
}

bool records_equal(const std::vector<eval::EvalRecord>& a,
                   const std::vector<eval::EvalRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.model != y.model || x.source != y.source || x.target != y.target ||
        x.horizon != y.horizon || x.budget != y.budget ||
        x.metric != y.metric || x.status != y.status)
      return false;
    if (x.status == eval::RecordStatus::ok && x.value != y.value) return false;
  }
  return true;
}

std::vector<double> ok_values(const std::vector<eval::EvalRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.status == eval::RecordStatus::ok) out.push_back(r.value);
  return out;
}

}  // namespace

TEST_CASE("metric examples and error taxonomy") {
  ArrayXd a = ArrayXd::LinSpaced(5, 1.0, 5.0);
  CHECK(eval::mse(a, a) == 0.0);
  CHECK(eval::mae(a, a) == 0.0);
  CHECK(eval::smape(a, a) == 0.0);

  ArrayXd p(2), t(2);
  p << 1.0, 3.0;
  t << 0.0, 0.0;
  CHECK(eval::mse(p, t) == 5.0);
  CHECK(eval::mae(p, t) == 2.0);

  ArrayXd one_p(1), one_t(1);
  one_p << 1.0;
  one_t << 2.0;
  CHECK(eval::smape(one_p, one_t) == doctest::Approx(200.0 / 3.0).epsilon(1e-12));

  ArrayXd zero(1);
  zero << 0.0;
  CHECK(eval::smape(zero, zero) == 0.0);  // guarded zero-denominator term

  // mixed: one guarded term, one live term
  ArrayXd gp(2), gt(2);
  gp << 0.0, 2.0;
  gt << 0.0, 0.0;
  CHECK(eval::smape(gp, gt) == doctest::Approx(100.0).epsilon(1e-12));

  ArrayXd shorter(3);
  shorter << 1, 2, 3;
  CHECK_THROWS_AS(eval::mse(a, shorter), ShapeError);
  CHECK_THROWS_AS(eval::mae(shorter, a), ShapeError);
  CHECK_THROWS_AS(eval::smape(a, shorter), ShapeError);
  CHECK_THROWS_AS(eval::mse(ArrayXd(), ArrayXd()), ArgumentError);

  CHECK(eval::compute_metric("mse", p, t) == 5.0);
  CHECK_THROWS_AS(eval::compute_metric("rmse", p, t), ArgumentError);
}

TEST_CASE("metrics agree with brute-force loops on 1000 random vectors") {
  rng::Engine eng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const long n = eng.uniform_int(1, 20);
    ArrayXd p(n), t(n);
    for (long i = 0; i < n; ++i) {
      p[i] = eng.uniform() < 0.1 ? 0.0 : eng.uniform(-5.0, 5.0);
      t[i] = eng.uniform() < 0.1 ? 0.0 : eng.uniform(-5.0, 5.0);
    }
    double sse = 0.0, sae = 0.0, ssm = 0.0;
    for (long i = 0; i < n; ++i) {
      sse += (p[i] - t[i]) * (p[i] - t[i]);
      sae += std::abs(p[i] - t[i]);
      const double denom = std::abs(p[i]) + std::abs(t[i]);
      if (denom > 0.0) ssm += std::abs(p[i] - t[i]) / denom;
    }
    CHECK(eval::mse(p, t) == doctest::Approx(sse / n).epsilon(1e-12));
    CHECK(eval::mae(p, t) == doctest::Approx(sae / n).epsilon(1e-12));
    CHECK(eval::smape(p, t) ==
          doctest::Approx(200.0 * ssm / n).epsilon(1e-12));
    CHECK(eval::mse(p, t) >= 0.0);
    CHECK(eval::mae(p, t) >= 0.0);
    CHECK(eval::smape(p, t) >= 0.0);
  }
}

TEST_CASE("records sort canonically and round-trip through CSV and the log") {
  std::vector<eval::EvalRecord> records;
  records.push_back({"pfn", "synthetic", "ettm", 96, std::nullopt, "mse",
                     0.125, eval::RecordStatus::ok});
  records.push_back({"dlinear", "etth", "etth", 24, 48, "mae", 0.5,
                     eval::RecordStatus::ok});
  records.push_back({"dlinear", "etth", "etth", 24, 24, "mae",
                     std::numeric_limits<double>::quiet_NaN(),
                     eval::RecordStatus::insufficient_data});
  records.push_back({"pfn", "synthetic", "etth", 721, std::nullopt, "smape",
                     std::numeric_limits<double>::quiet_NaN(),
                     eval::RecordStatus::horizon_overflow});
  records.push_back({"dlinear", "etth", "etth", 24, std::nullopt, "mse",
                     1.0 / 3.0, eval::RecordStatus::ok});

  eval::sort_records(records);
  CHECK(records[0].model == "dlinear");
  CHECK_FALSE(records[0].budget.has_value());  // budget-free sorts first
  CHECK(records[1].budget == 24);
  CHECK(records[2].budget == 48);
  CHECK(records[3].model == "pfn");
  CHECK(records[3].target == "etth");   // target before horizon
  CHECK(records[4].target == "ettm");

  std::ostringstream csv;
  eval::write_records_csv(csv, records);
  const std::string text = csv.str();
  CHECK(text.rfind("model,source,target,horizon,budget,metric,value,status\n",
                   0) == 0);

  std::istringstream in(text);
  const auto loaded = eval::read_records_csv(in);
  CHECK(records_equal(records, loaded));

  // writing the loaded records reproduces the bytes
  std::ostringstream csv2;
  eval::write_records_csv(csv2, loaded);
  CHECK(csv2.str() == text);

  std::ostringstream log;
  eval::write_records_log(log, records);
  const std::string log_text = log.str();
  CHECK(std::count(log_text.begin(), log_text.end(), '\n') == 5);
  CHECK(log_text.find("record model=pfn source=synthetic target=ettm "
                      "horizon=96 budget=none metric=mse value=0.125 "
                      "status=ok\n") != std::string::npos);
  CHECK(log_text.find("value=none status=horizon_overflow") !=
        std::string::npos);

  // malformed inputs
  const auto reject = [](const std::string& s) {
    std::istringstream bad(s);
    CHECK_THROWS_AS(eval::read_records_csv(bad), IoError);
  };
  reject("");
  reject("model,source,target\n");
  const std::string header =
      "model,source,target,horizon,budget,metric,value,status\n";
  reject(header + "a,b,c,1,,mse,0.5\n");            // 7 fields
  reject(header + "a,b,c,x,,mse,0.5,ok\n");         // bad horizon
  reject(header + "a,b,c,1,,mse,0.5,broken\n");     // bad status
  reject(header + "a,b,c,1,,mse,,ok\n");            // ok without value
  reject(header + "a,b,c,1,,mse,0.5,insufficient_data\n");  // value on status
  reject(header + "a,b,c,1,,mse,nope,ok\n");        // bad value

  std::vector<eval::EvalRecord> bad_field;
  bad_field.push_back({"a,b", "s", "t", 1, std::nullopt, "mse", 0.1,
                       eval::RecordStatus::ok});
  std::ostringstream sink;
  CHECK_THROWS_AS(eval::write_records_csv(sink, bad_field), ArgumentError);
}

TEST_CASE("forecaster wrappers expose the right metadata") {
  baselines::BaselineModel snaive;
  snaive.kind = "snaive";
  snaive.period = 7;
  const auto fs = eval::make_baseline_forecaster(snaive, "snaive", "etth");
  CHECK(fs.look_back == 7);
  CHECK(fs.zero_shot);
  CHECK(fs.source == "etth");

  baselines::BaselineModel last;
  last.kind = "last";
  const auto fl = eval::make_baseline_forecaster(last, "last", "etth");
  CHECK(fl.look_back == 1);
  CHECK(fl.zero_shot);

  ArrayXd train = ArrayXd::LinSpaced(40, 0.0, 39.0);
  baselines::BaselineModel lin;
  lin.kind = "linear";
  lin.linear = baselines::fit_linear_direct(train, 6, 3);
  const auto flin = eval::make_baseline_forecaster(lin, "linear", "etth");
  CHECK(flin.look_back == 6);
  CHECK(flin.max_horizon == 3);
  CHECK_FALSE(flin.zero_shot);

  pfn::PfnConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 8;
  cfg.d_ffn = 16;
  cfg.max_history = 12;
  cfg.head_width = 6;
  const auto fp = eval::make_pfn_forecaster(pfn::init(cfg, 3), "pfn", 250);
  CHECK(fp.look_back == 12);  // clamped to the model's context
  CHECK(fp.max_horizon == 6);
  CHECK(fp.zero_shot);
  CHECK(fp.source == "synthetic");

  baselines::BaselineModel broken;
  broken.kind = "linear";  // no fit attached
  CHECK_THROWS_AS(eval::make_baseline_forecaster(broken, "x", "y"),
                  ArgumentError);
  broken.kind = "nonsense";
  CHECK_THROWS_AS(eval::make_baseline_forecaster(broken, "x", "y"),
                  ArgumentError);
}

TEST_CASE("long-term protocol: oracle zero, periodic zero, bookkeeping") {
  const datasets::SeriesStore store = toy_store(60, 2, 11);

  // a perfect oracle scores zero on raw units
  const auto raw_oracle = oracle_forecaster(store.channels, 6);
  eval::LongTermOptions raw;
  raw.raw_units = true;
  const auto zero_recs =
      eval::evaluate_long_term(raw_oracle, store, {2, 3}, raw);
  CHECK(zero_recs.size() == 6);  // |horizons| x |metrics|
  for (const auto& r : zero_recs) {
    CHECK(r.status == eval::RecordStatus::ok);
    CHECK(r.value == 0.0);
    CHECK(r.model == "oracle");
    CHECK(r.target == "toy");
    CHECK_FALSE(r.budget.has_value());
  }

  // the standardized path feeds forecasters standardized values: an oracle
  // built from the standardized copy scores zero there too
  const auto std_oracle =
      oracle_forecaster(datasets::standardize(store).channels, 6);
  for (const auto& r : eval::evaluate_long_term(std_oracle, store, {2}))
    CHECK(r.value == 0.0);

  // seasonal-naive is exact on an exactly periodic series
  const datasets::SeriesStore periodic = periodic_store(60, 5);
  baselines::BaselineModel sn;
  sn.kind = "snaive";
  sn.period = 5;
  const auto fsn = eval::make_baseline_forecaster(sn, "snaive", "toy");
  for (const auto& r : eval::evaluate_long_term(fsn, periodic, {5}, raw)) {
    CHECK(r.status == eval::RecordStatus::ok);
    CHECK(r.value == 0.0);
  }

  // repeated evaluation is pure
  const auto once = eval::evaluate_long_term(fsn, periodic, {5}, raw);
  const auto twice = eval::evaluate_long_term(fsn, periodic, {5}, raw);
  CHECK(records_equal(once, twice));
}

TEST_CASE("long-term protocol: unit modes, overflow and insufficiency") {
  const datasets::SeriesStore store = toy_store(60, 1, 13);
  const auto last = last_value_forecaster();

  eval::LongTermOptions raw;
  raw.raw_units = true;
  const auto raw_recs = eval::evaluate_long_term(last, store, {3}, raw);
  const auto std_recs = eval::evaluate_long_term(last, store, {3});
  REQUIRE(raw_recs.size() == 3);
  REQUIRE(std_recs.size() == 3);
  CHECK(raw_recs[0].value != std_recs[0].value);  // different unit frames
  for (const auto& r : std_recs) {
    CHECK(r.status == eval::RecordStatus::ok);
    CHECK(std::isfinite(r.value));
    CHECK(r.value >= 0.0);
  }

  // a standardized store is used as-is by the standardized mode
  const datasets::SeriesStore pre = datasets::standardize(store);
  CHECK(records_equal(std_recs, eval::evaluate_long_term(last, pre, {3})));
  CHECK_THROWS_AS(eval::evaluate_long_term(last, pre, {3}, raw),
                  ArgumentError);

  // horizon overflow becomes statused records, not a crash
  ArrayXd train = ArrayXd::LinSpaced(40, 0.0, 39.0);
  baselines::BaselineModel lin;
  lin.kind = "linear";
  lin.linear = baselines::fit_linear_direct(train, 4, 2);
  const auto flin = eval::make_baseline_forecaster(lin, "linear", "toy");
  const auto over = eval::evaluate_long_term(flin, store, {2, 9}, raw);
  REQUIRE(over.size() == 6);
  for (const auto& r : over) {
    if (r.horizon == 2) CHECK(r.status == eval::RecordStatus::ok);
    if (r.horizon == 9)
      CHECK(r.status == eval::RecordStatus::horizon_overflow);
  }

  // a test segment shorter than L + H yields insufficiency records
  const auto tight = eval::evaluate_long_term(flin, store, {7}, raw);
  // test length = 12; L=4, H=7 -> 2 windows; H=9 overflows capability first.
  // Use a wider look-back to force the window shortage instead:
  baselines::BaselineModel wide;
  wide.kind = "linear";
  wide.linear = baselines::fit_linear_direct(train, 11, 2);
  const auto fwide = eval::make_baseline_forecaster(wide, "wide", "toy");
  const auto scarce = eval::evaluate_long_term(fwide, store, {2}, raw);
  REQUIRE(scarce.size() == 3);
  for (const auto& r : scarce)
    CHECK(r.status == eval::RecordStatus::insufficient_data);
  CHECK(tight.size() == 3);

  CHECK_THROWS_AS(eval::evaluate_long_term(last, store, {}), ArgumentError);
  CHECK_THROWS_AS(eval::evaluate_long_term(last, store, {0}), ArgumentError);
  eval::LongTermOptions bad_metric;
  bad_metric.metrics = {"mse", "rmse"};
  CHECK_THROWS_AS(eval::evaluate_long_term(last, store, {2}, bad_metric),
                  ArgumentError);
}

TEST_CASE("single-shot protocol matches the single-window long-term case") {
  // test segment of exactly L + H: the long-term protocol has one window
  const long L = 6, H = 3;
  datasets::SeriesStore store = toy_store(45, 2, 17, {0.6, 0.2, 0.2});
  REQUIRE(store.splits.test_len() == L + H);

  ArrayXd train = ArrayXd::LinSpaced(27, 0.0, 26.0);
  // fit on the first channel's train segment for a realistic model
  baselines::BaselineModel lin;
  lin.kind = "linear";
  lin.linear = baselines::fit_linear_direct(
      store.channels[0].head(store.splits.train_end), L, H);
  const auto flin = eval::make_baseline_forecaster(lin, "linear", "toy");

  eval::LongTermOptions raw;
  raw.raw_units = true;
  const auto lt = eval::evaluate_long_term(flin, store, {H}, raw);
  const auto ss = eval::evaluate_single_shot(flin, store, H);
  CHECK(ss.skipped == 0);
  REQUIRE(lt.size() == ss.records.size());
  for (std::size_t i = 0; i < lt.size(); ++i) {
    CHECK(lt[i].metric == ss.records[i].metric);
    CHECK(lt[i].value == ss.records[i].value);  // bitwise protocol equality
  }

  // oracle single shot is exact
  const auto oracle = oracle_forecaster(store.channels, 4);
  const auto perfect = eval::evaluate_single_shot(oracle, store, H);
  for (const auto& r : perfect.records) CHECK(r.value == 0.0);

  // channels shorter than L + H are skipped and surface in the count
  const datasets::SeriesStore small = toy_store(10, 3, 19);
  baselines::BaselineModel last;
  last.kind = "last";
  auto flast = eval::make_baseline_forecaster(last, "last", "toy");
  flast.look_back = 9;  // 9 + 2 > 10
  const auto skipped = eval::evaluate_single_shot(flast, small, 2);
  CHECK(skipped.skipped == 3);
  REQUIRE(skipped.records.size() == 3);
  for (const auto& r : skipped.records)
    CHECK(r.status == eval::RecordStatus::insufficient_data);

  // horizon overflow is statused
  ArrayXd t2 = ArrayXd::LinSpaced(30, 0.0, 29.0);
  baselines::BaselineModel lin2;
  lin2.kind = "linear";
  lin2.linear = baselines::fit_linear_direct(t2, 4, 2);
  const auto f2 = eval::make_baseline_forecaster(lin2, "linear", "toy");
  const auto over = eval::evaluate_single_shot(f2, store, 5);
  for (const auto& r : over.records)
    CHECK(r.status == eval::RecordStatus::horizon_overflow);
}

TEST_CASE("few-shot protocol: refits, saturation, and data access") {
  const datasets::SeriesStore store = toy_store(50, 1, 23);
  REQUIRE(store.splits.train_len() == 35);
  const long H = 2;

  const auto linear_factory = [](const Eigen::Ref<const ArrayXd>& train,
                                 long horizon) {
    const long L = 4;
    eval::Forecaster skeleton;
    skeleton.id = "linear";
    skeleton.source = "toy";
    skeleton.look_back = L;
    skeleton.max_horizon = horizon;
    if (train.size() == 0) return skeleton;  // metadata probe
    baselines::BaselineModel m;
    m.kind = "linear";
    m.linear = baselines::fit_linear_direct(train, L, horizon);
    return eval::make_baseline_forecaster(std::move(m), "linear", "toy");
  };

  datasets::BudgetPlan plan;
  plan.period = 4;
  plan.budgets = {4, 8, 16, 32};

  const auto recs = eval::evaluate_fewshot(linear_factory, store, plan, H);
  CHECK(recs.size() == plan.budgets.size() * 3);  // |plan| record groups

  // B=4 < L+H=6: supervised fit impossible, identity preserved
  for (const auto& r : recs) {
    REQUIRE(r.budget.has_value());
    CHECK(r.model == "linear");
    CHECK(r.target == "toy");
    if (*r.budget == 4)
      CHECK(r.status == eval::RecordStatus::insufficient_data);
    else
      CHECK(r.status == eval::RecordStatus::ok);
  }

  // refits actually depend on the budget
  const auto value_of = [&](const std::vector<eval::EvalRecord>& rs, long b,
                            const std::string& metric) {
    for (const auto& r : rs)
      if (r.budget == b && r.metric == metric) return r.value;
    throw Error("record not found");
  };
  CHECK(value_of(recs, 8, "mse") != value_of(recs, 32, "mse"));

  // zero-shot saturation: once B reaches the look-back the input no longer
  // grows and the records freeze
  pfn::PfnConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 8;
  cfg.d_ffn = 16;
  cfg.max_history = 12;
  cfg.head_width = 6;
  const auto fp = eval::make_pfn_forecaster(pfn::init(cfg, 3), "pfn", 8);
  const auto pfn_factory = [fp](const Eigen::Ref<const ArrayXd>&, long) {
    return fp;
  };
  const auto zs = eval::evaluate_fewshot(pfn_factory, store, plan, H);
  CHECK(zs.size() == plan.budgets.size() * 3);
  for (const auto& m : {"mse", "mae", "smape"}) {
    const double b8 = value_of(zs, 8, m);
    CHECK(value_of(zs, 16, m) == b8);   // saturated at look_back = 8
    CHECK(value_of(zs, 32, m) == b8);
    CHECK(value_of(zs, 4, m) != b8);    // below saturation the input shrinks
  }

  // data access: only the last B train points matter to the fit
  datasets::BudgetPlan one;
  one.period = 4;
  one.budgets = {8};
  const auto base = eval::evaluate_fewshot(linear_factory, store, one, H);

  datasets::SeriesStore outside = store;   // train point before the slice
  outside.channels[0][5] += 100.0;
  CHECK(records_equal(base,
                      eval::evaluate_fewshot(linear_factory, outside, one, H)));

  datasets::SeriesStore val_touch = store;  // validation point
  val_touch.channels[0][36] += 100.0;
  CHECK(records_equal(
      base, eval::evaluate_fewshot(linear_factory, val_touch, one, H)));

  datasets::SeriesStore inside = store;    // inside the last-8 slice
  inside.channels[0][30] += 100.0;
  CHECK_FALSE(records_equal(
      base, eval::evaluate_fewshot(linear_factory, inside, one, H)));

  // horizon overflow per budget for a capped zero-shot model
  const auto capped = eval::evaluate_fewshot(pfn_factory, store, one, 7);
  REQUIRE(capped.size() == 3);
  for (const auto& r : capped)
    CHECK(r.status == eval::RecordStatus::horizon_overflow);

  CHECK_THROWS_AS(
      eval::evaluate_fewshot(linear_factory, store, datasets::BudgetPlan{}, H),
      ArgumentError);
}

TEST_CASE("transfer protocol: alignment algebra and frame handling") {
  // target is an affine image of the source
  const datasets::SeriesStore source = toy_store(60, 1, 29, {0.7, 0.1, 0.2},
                                                 "source");
  datasets::SeriesStore target = toy_store(60, 1, 29, {0.7, 0.1, 0.2},
                                           "target");
  target.channels[0] = source.channels[0] * 5.0 + 100.0;

  const long L = 8, H = 3;
  const ArrayXd source_train = source.channels[0].head(source.splits.train_end);

  baselines::BaselineModel lin;
  lin.kind = "linear";
  lin.linear = baselines::fit_linear_direct(source_train, L, H, 5.0);
  auto model = eval::make_baseline_forecaster(std::move(lin), "linear", "source");

  eval::TransferJob job;
  job.model = model;
  job.source_scaler = scalers::fit(scalers::ScalerKind::standard, source_train);
  job.scaler_kind = scalers::ScalerKind::standard;
  job.look_back = L;
  job.horizon = H;

  const auto aligned = eval::evaluate_zero_shot_transfer(job, target);
  REQUIRE(aligned.size() == 3);
  for (const auto& r : aligned) {
    CHECK(r.status == eval::RecordStatus::ok);
    CHECK(r.model == "linear");
    CHECK(r.source == "source");
    CHECK(r.target == "target");
    CHECK(r.horizon == H);
  }

  eval::TransferJob ablation = job;
  ablation.align = false;
  const auto unaligned = eval::evaluate_zero_shot_transfer(ablation, target);

  const auto find = [](const std::vector<eval::EvalRecord>& rs,
                       const std::string& metric) {
    for (const auto& r : rs)
      if (r.metric == metric) return r.value;
    throw Error("record not found");
  };
  // re-expressing the history in the source frame is what makes the source
  // model usable at all; the raw-frame ablation is far off
  CHECK(find(aligned, "mse") < find(unaligned, "mse"));

  // oracle + no alignment is exactly zero; with identity-alignment the
  // round-trip noise stays negligible
  auto oracle = oracle_forecaster(target.channels, L);
  eval::TransferJob oracle_job;
  oracle_job.model = oracle;
  oracle_job.look_back = L;
  oracle_job.horizon = H;
  oracle_job.align = false;
  for (const auto& r : eval::evaluate_zero_shot_transfer(oracle_job, target))
    CHECK(r.value == 0.0);

  const ArrayXd target_train = target.channels[0].head(target.splits.train_end);
  auto fuzzy_oracle = oracle_forecaster(target.channels, L, 1e-7);
  eval::TransferJob identity_job;
  identity_job.model = fuzzy_oracle;
  identity_job.source_scaler =
      scalers::fit(scalers::ScalerKind::standard, target_train);
  identity_job.look_back = L;
  identity_job.horizon = H;
  for (const auto& r : eval::evaluate_zero_shot_transfer(identity_job, target))
    if (r.metric == "mse") CHECK(r.value < 1e-18);

  // swap composition: align A->B then B->A is the identity
  const auto s1 = scalers::fit(scalers::ScalerKind::standard, source_train);
  const auto s2 = scalers::fit(scalers::ScalerKind::standard, target_train);
  const ArrayXd x = source.channels[0].segment(3, 12);
  const ArrayXd there = scalers::align_target_to_source(s1, s2, x);
  const ArrayXd back = scalers::align_target_to_source(s2, s1, there);
  CHECK((back - x).abs().maxCoeff() < 1e-9);
  const ArrayXd round = scalers::unalign(s1, s2,
                                         scalers::align_target_to_source(s1, s2, x));
  CHECK((round - x).abs().maxCoeff() < 1e-9);

  // taxonomy
  eval::TransferJob mismatch = job;
  mismatch.look_back = L + 1;
  CHECK_THROWS_AS(eval::evaluate_zero_shot_transfer(mismatch, target),
                  ArgumentError);
  eval::TransferJob too_far = job;
  too_far.horizon = H + 5;
  CHECK_THROWS_AS(eval::evaluate_zero_shot_transfer(too_far, target),
                  ArgumentError);
  const datasets::SeriesStore standardized = datasets::standardize(target);
  CHECK_THROWS_AS(eval::evaluate_zero_shot_transfer(job, standardized),
                  ArgumentError);

  // a target test segment too short for L + H becomes statused records
  datasets::SeriesStore tiny = toy_store(50, 1, 31, {0.7, 0.2, 0.1}, "tiny");
  REQUIRE(tiny.splits.test_len() < L + H);
  const auto scarce = eval::evaluate_zero_shot_transfer(job, tiny);
  REQUIRE(scarce.size() == 3);
  for (const auto& r : scarce)
    CHECK(r.status == eval::RecordStatus::insufficient_data);
}

TEST_CASE("the job runner merges deterministically for any thread count") {
  const datasets::SeriesStore store = toy_store(60, 2, 37);
  const auto last = last_value_forecaster();
  eval::LongTermOptions raw;
  raw.raw_units = true;

  std::vector<eval::EvalJob> jobs;
  for (const long h : {4, 2, 3, 1}) {
    jobs.push_back(
        {"h=" + std::to_string(h), [=, &store]() {
           return eval::evaluate_long_term(last, store, {h}, raw);
         }});
  }

  const auto serial = eval::run_jobs(jobs, 1);
  const auto parallel = eval::run_jobs(jobs, 4);
  const auto oversubscribed = eval::run_jobs(jobs, 64);
  CHECK(records_equal(serial, parallel));
  CHECK(records_equal(serial, oversubscribed));

  // merged by ascending key, regardless of insertion order
  REQUIRE(serial.size() == 12);
  CHECK(serial[0].horizon == 1);
  CHECK(serial[3].horizon == 2);
  CHECK(serial[6].horizon == 3);
  CHECK(serial[9].horizon == 4);

  // values equal an unthreaded direct call
  const auto direct = eval::evaluate_long_term(last, store, {1}, raw);
  CHECK(records_equal(direct, {serial.begin(), serial.begin() + 3}));

  // errors surface after the pool drains
  std::vector<eval::EvalJob> failing = jobs;
  failing.push_back({"zz", []() -> std::vector<eval::EvalRecord> {
                       throw NumericError("boom");
                     }});
  CHECK_THROWS_AS(eval::run_jobs(failing, 3), NumericError);

  CHECK_THROWS_AS(eval::run_jobs(jobs, 0), ArgumentError);
  std::vector<eval::EvalJob> hollow;
  hollow.push_back({"k", {}});
  CHECK_THROWS_AS(eval::run_jobs(hollow, 1), ArgumentError);

  CHECK(eval::run_jobs({}, 4).empty());
}
