#pragma once

// Aggregation of evaluation records into the three benchmark summary
// statistics -- per-source win rates, averaged source ranks, and mean
// relative deviation from the per-target best -- plus deterministic
// markdown / CSV rendering of the resulting tables.

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthlab/evaluation.hpp"

namespace synthlab::reporting {

// models x sources x targets x metrics value grid. Cells hold one finite
// value >= 0; absent keys are missing cells and are excluded from every
// aggregation. Axis label lists are sorted and deduplicated.
class ResultsMatrix {
 public:
  // Builds the grid from evaluation records. Only `ok` records contribute;
  // statused records leave their cell missing. Records that share all four
  // axis labels (a horizon or budget sweep) collapse into their mean.
  static ResultsMatrix from_records(const std::vector<eval::EvalRecord>& records);

  // Inserts or overwrites one cell. Throws ArgumentError unless the value
  // is finite and >= 0 and every label is non-empty.
  void set(const std::string& model, const std::string& source,
           const std::string& target, const std::string& metric, double value);

  std::optional<double> value(const std::string& model,
                              const std::string& source,
                              const std::string& target,
                              const std::string& metric) const;

  const std::vector<std::string>& models() const { return models_; }
  const std::vector<std::string>& sources() const { return sources_; }
  const std::vector<std::string>& targets() const { return targets_; }
  const std::vector<std::string>& metrics() const { return metrics_; }
  bool empty() const { return cells_.empty(); }
  std::size_t cell_count() const { return cells_.size(); }

 private:
  std::map<std::array<std::string, 4>, double> cells_;  // (m, s, t, k)
  std::vector<std::string> models_, sources_, targets_, metrics_;
  void insert_axes(const std::string& model, const std::string& source,
                   const std::string& target, const std::string& metric);
};

// One rendered summary: a rows x cols grid with NaN marking missing cells.
// `notes` carries skip notices; renderers append them after the table body
// (markdown) or omit them (CSV).
struct SummaryTable {
  std::string stat;    // "winrate" | "rank" | "relmetric"
  std::string metric;  // "mse" | "mae" | "smape"
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  Eigen::MatrixXd values;  // rows.size() x cols.size()
  std::vector<std::string> notes;
};

// Fraction of targets on which each model attains the minimal metric value
// within its source row. Exact ties credit every tied model, so a row's
// rates may sum to more than 1; without ties they sum to exactly 1. The
// denominator counts the targets where the source has at least one present
// cell; sources with none are skipped with a note. Rows are sources,
// columns are models.
SummaryTable win_rate(const ResultsMatrix& matrix, const std::string& metric);

// Within every (target, model) group the sources are ranked 1 = best by
// metric value (ties receive the average of the tied positions, missing
// cells are excluded from the group); each source's ranks are then averaged
// over all groups it appears in. Requires at least two sources. Rows are
// sources, single column "rank".
SummaryTable avg_rank(const ResultsMatrix& matrix, const std::string& metric);

// Mean of (value - best_t) / best_t over targets, where best_t is the
// minimum over every (model, source) cell of target t. When best_t == 0 a
// cell contributes 0 if it is itself 0 and +infinity otherwise. Rows are
// sources, columns are models.
SummaryTable avg_relative_metric(const ResultsMatrix& matrix,
                                 const std::string& metric);

// Dispatch by statistic name: "winrate", "rank", or "relmetric".
SummaryTable summarize(const ResultsMatrix& matrix, const std::string& stat,
                       const std::string& metric);

// Markdown table with two-decimal display values; missing cells render as
// an en dash, infinities as "inf". Deterministic: equal tables produce
// byte-identical text.
std::string render_markdown(const SummaryTable& table);

// CSV with full-precision (shortest round-trip) values; missing cells are
// empty fields. The first header cell is "label". Notes are not emitted.
std::string render_csv(const SummaryTable& table);

// Parses text produced by render_csv back into a table (rows, cols, and
// values; stat/metric/notes are not part of the format). Throws IoError on
// malformed input, naming the 1-based line.
SummaryTable parse_summary_csv(std::istream& in);

}  // namespace synthlab::reporting
