#include "synthlab/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/synth_prior.hpp"

namespace synthlab::datasets {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
  return s.substr(a, b - a);
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void validate(const DatasetMeta& meta) {
  if (meta.period < 1) throw ArgumentError("dataset meta: period must be >= 1");
  for (const long h : meta.horizons)
    if (h < 1 || h > 720)
      throw ArgumentError("dataset meta: horizons must lie in [1, 720]");
  double sum = 0.0;
  for (const double r : meta.ratios) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw ArgumentError("dataset meta: ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ArgumentError("dataset meta: ratios must sum to 1");
  if (meta.channel_count < 0)
    throw ArgumentError("dataset meta: channel count must be >= 0");
}

SplitRanges split_by_ratio(long length, const std::array<double, 3>& ratios) {
  if (length < 1) throw ArgumentError("split: length must be >= 1");
  double sum = 0.0;
  for (const double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw ArgumentError("split: ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split: ratios must sum to 1");

  // floor with a tolerance absorbing double rounding in the cumulative sums:
  // 100*(0.7+0.1) must give boundary 80, not 79
  const auto boundary = [length](double cum) {
    const double x = static_cast<double>(length) * cum;
    return static_cast<long>(std::floor(x + 1e-9 + x * 1e-12));
  };
  SplitRanges s;
  s.train_begin = 0;
  s.train_end = boundary(ratios[0]);
  s.val_begin = s.train_end;
  s.val_end = boundary(ratios[0] + ratios[1]);
  s.test_begin = s.val_end;
  s.test_end = length;
  if (s.train_len() < 1)
    throw InsufficientDataError("split: empty train segment");
  if (s.val_len() < 1) throw InsufficientDataError("split: empty val segment");
  if (s.test_len() < 1)
    throw InsufficientDataError("split: empty test segment");
  return s;
}

SeriesStore load_csv(const std::string& path, DatasetMeta meta) {
  validate(meta);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line = (nl == std::string::npos)
                           ? text.substr(start)
                           : text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw IoError(path + ": empty file");

  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 2)
    throw IoError(path + ": header must name a date column and >= 1 channel");
  const long n_channels = static_cast<long>(header.size()) - 1;
  if (meta.channel_count > 0 && meta.channel_count != n_channels)
    throw IoError(path + ": expected " + std::to_string(meta.channel_count) +
                  " channels, file has " + std::to_string(n_channels));
  const long n_rows = static_cast<long>(lines.size()) - 1;
  if (n_rows < 1) throw IoError(path + ": no data rows");

  SeriesStore store;
  store.meta = std::move(meta);
  store.meta.channel_count = n_channels;
  store.channel_names.assign(header.begin() + 1, header.end());
  store.timestamps.reserve(n_rows);
  store.channels.assign(n_channels, ArrayXd(n_rows));

  for (long r = 0; r < n_rows; ++r) {
    const std::string& line = lines[r + 1];
    const long line_no = r + 2;  // 1-based file line, header is line 1
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<long>(fields.size()) != n_channels + 1)
      throw IoError(path + " line " + std::to_string(line_no) + ": expected " +
                    std::to_string(n_channels + 1) + " fields, got " +
                    std::to_string(fields.size()));
    store.timestamps.push_back(fields[0]);
    for (long c = 0; c < n_channels; ++c) {
      const std::string cell = trim(fields[c + 1]);
      double v = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v))
        throw IoError(path + " line " + std::to_string(line_no) +
                      ", column '" + store.channel_names[c] +
                      "': not a finite number: '" + fields[c + 1] + "'");
      store.channels[c][r] = v;
    }
  }

  try {
    store.splits = split_by_ratio(n_rows, store.meta.ratios);
  } catch (const InsufficientDataError&) {
    store.splits = SplitRanges{};  // too short to segment; ingestion still valid
  }
  return store;
}

bool has_splits(const SeriesStore& store) {
  const auto& s = store.splits;
  return s.train_len() >= 1 && s.val_len() >= 1 && s.test_len() >= 1 &&
         s.train_begin == 0 && s.val_begin == s.train_end &&
         s.test_begin == s.val_end && s.test_end == store.length();
}

void write_csv(std::ostream& out, const SeriesStore& store) {
  std::string text = "date";
  for (const auto& name : store.channel_names) {
    text += ',';
    text += name;
  }
  text += '\n';
  const long n = store.length();
  for (long r = 0; r < n; ++r) {
    text += store.timestamps[r];
    for (const auto& channel : store.channels) {
      text += ',';
      append_double(text, channel[r]);
    }
    text += '\n';
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_csv_file(const std::string& path, const SeriesStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path);
  write_csv(out, store);
  if (!out) throw IoError("failed writing dataset file: " + path);
}

SeriesStore standardize(const SeriesStore& store) {
  if (store.standardized)
    throw ArgumentError("standardize: store is already standardized");
  if (!has_splits(store))
    throw InsufficientDataError("standardize: store has no usable splits");
  SeriesStore out = store;
  out.train_stats.clear();
  out.train_stats.reserve(store.channels.size());
  const long t0 = store.splits.train_begin;
  const long tn = store.splits.train_len();
  for (std::size_t c = 0; c < store.channels.size(); ++c) {
    const auto s =
        scalers::fit(scalers::ScalerKind::standard,
                     store.channels[c].segment(t0, tn), std::nullopt);
    out.channels[c] = scalers::transform(s, store.channels[c]);
    out.train_stats.push_back(s);
  }
  out.standardized = true;
  return out;
}

SeriesStore destandardize(const SeriesStore& store) {
  if (!store.standardized ||
      store.train_stats.size() != store.channels.size())
    throw ArgumentError("destandardize: store is not standardized");
  SeriesStore out = store;
  for (std::size_t c = 0; c < store.channels.size(); ++c)
    out.channels[c] =
        scalers::inverse_transform(store.train_stats[c], store.channels[c]);
  out.standardized = false;
  out.train_stats.clear();
  return out;
}

ArrayXd destandardize_channel(const SeriesStore& store, long channel,
                              const Eigen::Ref<const ArrayXd>& values) {
  if (!store.standardized ||
      store.train_stats.size() != store.channels.size())
    throw ArgumentError("destandardize: store is not standardized");
  if (channel < 0 || channel >= store.channel_count())
    throw ArgumentError("destandardize: channel index out of range");
  return scalers::inverse_transform(
      store.train_stats[static_cast<std::size_t>(channel)], values);
}

std::pair<long, long> segment_range(const SeriesStore& store, Segment seg) {
  if (!has_splits(store))
    throw InsufficientDataError("segment_range: store has no usable splits");
  switch (seg) {
    case Segment::train:
      return {store.splits.train_begin, store.splits.train_end};
    case Segment::val:
      return {store.splits.val_begin, store.splits.val_end};
    case Segment::test:
      return {store.splits.test_begin, store.splits.test_end};
  }
  throw ArgumentError("segment_range: unknown segment");
}

long window_count(long segment_len, long look_back, long horizon,
                  long stride) {
  if (look_back < 1 || horizon < 1 || stride < 1)
    throw ArgumentError("windows: look_back, horizon, stride must be >= 1");
  if (segment_len < look_back + horizon)
    throw InsufficientDataError(
        "windows: segment shorter than look_back + horizon");
  return (segment_len - look_back - horizon) / stride + 1;
}

std::vector<Window> windows(long seg_begin, long seg_end, long look_back,
                            long horizon, long stride) {
  if (seg_begin > seg_end) throw ArgumentError("windows: inverted segment");
  const long count = window_count(seg_end - seg_begin, look_back, horizon, stride);
  std::vector<Window> out;
  out.reserve(count);
  for (long k = 0; k < count; ++k) {
    const long input_begin = seg_begin + k * stride;
    out.push_back({input_begin, input_begin + look_back});
  }
  return out;
}

std::vector<Window> windows(const SeriesStore& store, Segment seg,
                            long look_back, long horizon, long stride) {
  const auto [begin, end] = segment_range(store, seg);
  return windows(begin, end, look_back, horizon, stride);
}

BudgetPlan budgets_for(long period, BudgetKind kind) {
  if (period < 1) throw ArgumentError("budgets_for: period must be >= 1");
  BudgetPlan plan;
  plan.period = period;
  if (kind == BudgetKind::geometric) {
    for (int k = 0; k < 8; ++k) plan.budgets.push_back(period << k);
  } else {
    for (long k = 1; k <= 8; ++k) plan.budgets.push_back(period * k);
  }
  return plan;
}

SeriesStore fewshot_slice(const SeriesStore& store, long budget) {
  if (budget < 1) throw ArgumentError("fewshot_slice: budget must be >= 1");
  if (store.standardized)
    throw ArgumentError(
        "fewshot_slice: slice the raw store, then re-standardize");
  if (!has_splits(store))
    throw InsufficientDataError("fewshot_slice: store has no usable splits");
  const auto& sp = store.splits;
  const long keep = std::min(budget, sp.train_len());
  const long start = sp.train_end - keep;
  const long n = store.length() - start;

  SeriesStore out;
  out.meta = store.meta;
  out.channel_names = store.channel_names;
  out.timestamps.assign(store.timestamps.begin() + start,
                        store.timestamps.end());
  out.channels.reserve(store.channels.size());
  for (const auto& channel : store.channels)
    out.channels.push_back(channel.tail(n));
  out.splits.train_begin = 0;
  out.splits.train_end = keep;
  out.splits.val_begin = keep;
  out.splits.val_end = keep + sp.val_len();
  out.splits.test_begin = out.splits.val_end;
  out.splits.test_end = out.splits.val_end + sp.test_len();
  return out;
}

std::vector<DatasetMeta> read_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open registry: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("registry " + path + ": " + e.what());
  }
  std::vector<DatasetMeta> metas;
  try {
    if (!doc.is_object() || !doc.contains("datasets") ||
        !doc["datasets"].is_array())
      throw IoError("registry " + path +
                    ": expected an object with a 'datasets' array");
    const fs::path base = fs::path(path).parent_path();
    for (const auto& entry : doc["datasets"]) {
      DatasetMeta meta;
      meta.name = entry.at("name").get<std::string>();
      std::string rel = entry.at("path").get<std::string>();
      fs::path p(rel);
      meta.path = p.is_absolute() ? p.string() : (base / p).string();
      meta.frequency = entry.value("frequency", std::string{});
      meta.period = entry.at("period").get<long>();
      meta.horizons = entry.at("horizons").get<std::vector<long>>();
      if (entry.contains("ratios")) {
        const auto r = entry["ratios"].get<std::vector<double>>();
        if (r.size() != 3)
          throw IoError("registry " + path + ": dataset '" + meta.name +
                        "' needs exactly 3 ratios");
        meta.ratios = {r[0], r[1], r[2]};
      }
      meta.channel_count = entry.value("channels", 0L);
      validate(meta);
      metas.push_back(std::move(meta));
    }
  } catch (const json::exception& e) {
    throw IoError("registry " + path + ": " + e.what());
  }
  return metas;
}

void write_registry(const std::string& path,
                    const std::vector<DatasetMeta>& metas) {
  json doc;
  doc["datasets"] = json::array();
  for (const auto& meta : metas) {
    json entry;
    entry["name"] = meta.name;
    entry["path"] = meta.path;
    entry["frequency"] = meta.frequency;
    entry["period"] = meta.period;
    entry["horizons"] = meta.horizons;
    entry["ratios"] = {meta.ratios[0], meta.ratios[1], meta.ratios[2]};
    if (meta.channel_count > 0) entry["channels"] = meta.channel_count;
    doc["datasets"].push_back(std::move(entry));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write registry: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing registry: " + path);
}

std::string make_bundled_corpus(const std::string& dir, std::uint64_t seed) {
  const long n_channels = 7;
  const long length = 6000;
  const long period = 24;

  prior::PriorConfig config;
  config.period_range = {period, period};

  SeriesStore store;
  store.meta.name = "synthetic_etth";
  store.meta.frequency = "hourly";
  store.meta.period = period;
  store.meta.horizons = {24, 48, 96, 192};
  store.meta.ratios = {0.6, 0.2, 0.2};
  store.meta.channel_count = n_channels;

  store.timestamps.reserve(length);
  for (long t = 0; t < length; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%06ld", t);
    store.timestamps.emplace_back(buf);
  }

  for (long c = 0; c < n_channels; ++c) {
    rng::Engine eng(rng::derive_seed(seed, "corpus", static_cast<std::uint64_t>(c)));
    const auto spec = prior::sample_spec(config, eng);
    const ArrayXd seasonal =
        prior::render_seasonal(spec.coefficients, spec.period, length);
    const ArrayXd trend =
        prior::render_trend(spec.trend_kind, spec.sharpness, length);
    ArrayXd x = prior::compose(seasonal, trend, spec.pure_trend);
    const auto s = scalers::fit(scalers::ScalerKind::minmax, x, std::nullopt);
    x = scalers::transform(s, x);
    for (long t = 0; t < length; ++t) x[t] += eng.uniform(-0.02, 0.02);
    store.channels.push_back(std::move(x));
    store.channel_names.push_back("c" + std::to_string(c + 1));
  }
  store.splits = split_by_ratio(length, store.meta.ratios);

  fs::create_directories(dir);
  const fs::path csv_path = fs::path(dir) / "synthetic_etth.csv";
  store.meta.path = csv_path.string();
  write_csv_file(csv_path.string(), store);

  DatasetMeta registered = store.meta;
  registered.path = "synthetic_etth.csv";  // relative to the registry
  const fs::path registry_path = fs::path(dir) / "registry.json";
  write_registry(registry_path.string(), {registered});
  return registry_path.string();
}

}  // namespace synthlab::datasets
