#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "synthlab/errors.hpp"
#include "synthlab/scalers.hpp"

namespace synthlab::datasets {

using Eigen::ArrayXd;

// Static description of a benchmark dataset: where it lives, how it splits,
// and which seasonality/horizon conventions apply. The seasonality period is
// configured, never estimated.
struct DatasetMeta {
  std::string name;
  std::string path;       // CSV file (resolved by the registry reader)
  std::string frequency;  // opaque label, e.g. "hourly"
  long period = 1;
  std::vector<long> horizons;              // each <= 720
  std::array<double, 3> ratios{0.7, 0.1, 0.2};  // train/val/test
  long channel_count = 0;                  // 0 = take whatever the file has
};

void validate(const DatasetMeta& meta);  // throws ArgumentError

// Half-open chronological index ranges: train precedes val precedes test.
struct SplitRanges {
  long train_begin = 0, train_end = 0;
  long val_begin = 0, val_end = 0;
  long test_begin = 0, test_end = 0;

  long train_len() const { return train_end - train_begin; }
  long val_len() const { return val_end - val_begin; }
  long test_len() const { return test_end - test_begin; }
};

// Cumulative floor-rounded boundaries; every segment must end up nonempty.
SplitRanges split_by_ratio(long length, const std::array<double, 3>& ratios);

// Immutable multichannel series. Channels are independent univariate
// problems; timestamps are carried for the artifact files but never fed to
// any model.
struct SeriesStore {
  DatasetMeta meta;
  std::vector<std::string> channel_names;
  std::vector<std::string> timestamps;  // one per row
  std::vector<ArrayXd> channels;        // all equal length
  SplitRanges splits;
  bool standardized = false;
  std::vector<scalers::FittedScaler> train_stats;  // filled by standardize

  long length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  long channel_count() const { return static_cast<long>(channels.size()); }
};

// Header row = date column + channel names; every cell must parse as a
// finite double. Errors name the offending 1-based file line. Split ranges
// are filled from meta.ratios when the series is long enough; otherwise the
// store loads with empty ranges and segment consumers reject it.
SeriesStore load_csv(const std::string& path, DatasetMeta meta);

// True once the store carries nonempty train/val/test ranges covering it.
bool has_splits(const SeriesStore& store);

// Shortest-round-trip serialization; reloading restores values bitwise.
void write_csv(std::ostream& out, const SeriesStore& store);
void write_csv_file(const std::string& path, const SeriesStore& store);

// Per-channel standard scaling fitted on the train segment only; statistics
// are retained on the result for the inverse.
SeriesStore standardize(const SeriesStore& store);
SeriesStore destandardize(const SeriesStore& store);
ArrayXd destandardize_channel(const SeriesStore& store, long channel,
                              const Eigen::Ref<const ArrayXd>& values);

enum class Segment { train, val, test };

std::pair<long, long> segment_range(const SeriesStore& store, Segment seg);

// One sliding-window position: input covers [input_begin, input_begin + L),
// the target continuation covers [target_begin, target_begin + H).
struct Window {
  long input_begin = 0;
  long target_begin = 0;
};

// count = segment_len - L - H + 1 at stride 1; shorter segments are an
// insufficient-data error. Every valid window is yielded — the last
// incomplete stride position is never discarded.
long window_count(long segment_len, long look_back, long horizon,
                  long stride = 1);
std::vector<Window> windows(long seg_begin, long seg_end, long look_back,
                            long horizon, long stride = 1);
std::vector<Window> windows(const SeriesStore& store, Segment seg,
                            long look_back, long horizon, long stride = 1);

// Few-shot budget plans expressed in units of the seasonality period.
enum class BudgetKind { geometric, arithmetic };

struct BudgetPlan {
  long period = 1;
  std::vector<long> budgets;  // strictly increasing, each >= period
};

// geometric: B = P * 2^k, k = 0..7 (long datasets)
// arithmetic: B = P * k, k = 1..8 (short, ILI-style datasets)
BudgetPlan budgets_for(long period, BudgetKind kind);

// Replace the train segment by its last min(B, train_len) points, adjacent
// to the validation part; val/test untouched. Works on raw stores only —
// standardization statistics must be re-fit from the slice afterwards.
SeriesStore fewshot_slice(const SeriesStore& store, long budget);

// Registry: one JSON record per dataset (name, path, frequency, period,
// horizons, ratios). Relative CSV paths resolve against the registry file's
// directory.
std::vector<DatasetMeta> read_registry(const std::string& path);
void write_registry(const std::string& path,
                    const std::vector<DatasetMeta>& metas);

// Deterministic 7-channel synthetic benchmark corpus (period 24, hourly-like,
// 6000 rows) built from the synthetic prior's spec sampler and renderers.
// Writes <dir>/synthetic_etth.csv and <dir>/registry.json; returns the
// registry path.
std::string make_bundled_corpus(const std::string& dir, std::uint64_t seed);

}  // namespace synthlab::datasets
