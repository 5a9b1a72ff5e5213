#include "synthlab/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "synthlab/errors.hpp"

namespace synthlab::reporting {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_cell_value(double value) {
  if (!std::isfinite(value) || value < 0.0)
    throw ArgumentError("reporting: cell values must be finite and >= 0");
}

void check_label(const std::string& label) {
  if (label.empty())
    throw ArgumentError("reporting: axis labels must be non-empty");
  if (label.find(',') != std::string::npos ||
      label.find('\n') != std::string::npos ||
      label.find('\r') != std::string::npos ||
      label.find('|') != std::string::npos)
    throw ArgumentError("reporting: axis label '" + label +
                        "' contains a delimiter character");
}

void check_metric_known(const ResultsMatrix& matrix,
                        const std::string& metric) {
  const auto& known = matrix.metrics();
  if (std::find(known.begin(), known.end(), metric) == known.end())
    throw ArgumentError("reporting: metric '" + metric +
                        "' has no cells in the matrix");
}

std::size_t index_of(const std::vector<std::string>& axis,
                     const std::string& label) {
  return static_cast<std::size_t>(
      std::find(axis.begin(), axis.end(), label) - axis.begin());
}

// Average of the 1-based positions occupied by each run of equal values;
// `pairs` is (value, source) sorted by value.
std::vector<std::pair<std::string, double>> midranks(
    std::vector<std::pair<double, std::string>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::pair<std::string, double>> out;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j].first == pairs[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.push_back({pairs[k].second, rank});
    i = j;
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string format_display(double v) {
  if (std::isnan(v)) return "–";  // en dash marks a missing cell
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_value(const std::string& field, std::size_t line_no) {
  if (field.empty()) return kNaN;
  if (field == "inf") return kInf;
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw IoError("summary csv: bad value '" + field + "' on line " +
                  std::to_string(line_no));
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// ResultsMatrix

void ResultsMatrix::insert_axes(const std::string& model,
                                const std::string& source,
                                const std::string& target,
                                const std::string& metric) {
  const auto insert_sorted = [](std::vector<std::string>& axis,
                                const std::string& label) {
    const auto it = std::lower_bound(axis.begin(), axis.end(), label);
    if (it == axis.end() || *it != label) axis.insert(it, label);
  };
  insert_sorted(models_, model);
  insert_sorted(sources_, source);
  insert_sorted(targets_, target);
  insert_sorted(metrics_, metric);
}

void ResultsMatrix::set(const std::string& model, const std::string& source,
                        const std::string& target, const std::string& metric,
                        double value) {
  check_label(model);
  check_label(source);
  check_label(target);
  check_label(metric);
  check_cell_value(value);
  cells_[{model, source, target, metric}] = value;
  insert_axes(model, source, target, metric);
}

std::optional<double> ResultsMatrix::value(const std::string& model,
                                           const std::string& source,
                                           const std::string& target,
                                           const std::string& metric) const {
  const auto it = cells_.find({model, source, target, metric});
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

ResultsMatrix ResultsMatrix::from_records(
    const std::vector<eval::EvalRecord>& records) {
  std::map<std::array<std::string, 4>, std::pair<double, long>> acc;
  for (const auto& r : records) {
    if (r.status != eval::RecordStatus::ok) continue;
    check_cell_value(r.value);
    auto& slot = acc[{r.model, r.source, r.target, r.metric}];
    slot.first += r.value;
    slot.second += 1;
  }
  ResultsMatrix matrix;
  for (const auto& [key, slot] : acc)
    matrix.set(key[0], key[1], key[2], key[3],
               slot.first / static_cast<double>(slot.second));
  return matrix;
}

// ---------------------------------------------------------------------------
// Statistics

SummaryTable win_rate(const ResultsMatrix& matrix, const std::string& metric) {
  SummaryTable table;
  table.stat = "winrate";
  table.metric = metric;
  if (matrix.empty()) return table;
  check_metric_known(matrix, metric);

  table.cols = matrix.models();
  Eigen::MatrixXd values(0, static_cast<Eigen::Index>(table.cols.size()));
  for (const auto& source : matrix.sources()) {
    Eigen::ArrayXd wins = Eigen::ArrayXd::Zero(table.cols.size());
    long counted_targets = 0;
    for (const auto& target : matrix.targets()) {
      double best = kInf;
      bool any = false;
      for (const auto& model : matrix.models()) {
        if (const auto v = matrix.value(model, source, target, metric)) {
          best = std::min(best, *v);
          any = true;
        }
      }
      if (!any) continue;
      ++counted_targets;
      for (std::size_t m = 0; m < table.cols.size(); ++m) {
        const auto v = matrix.value(table.cols[m], source, target, metric);
        if (v && *v == best) wins[static_cast<Eigen::Index>(m)] += 1.0;
      }
    }
    if (counted_targets == 0) {
      table.notes.push_back("source " + source + " skipped: no " + metric +
                            " cells");
      continue;
    }
    table.rows.push_back(source);
    values.conservativeResize(values.rows() + 1, Eigen::NoChange);
    values.row(values.rows() - 1) =
        (wins / static_cast<double>(counted_targets)).matrix().transpose();
  }
  table.values = std::move(values);
  return table;
}

SummaryTable avg_rank(const ResultsMatrix& matrix, const std::string& metric) {
  SummaryTable table;
  table.stat = "rank";
  table.metric = metric;
  table.cols = {"rank"};
  if (matrix.empty()) {
    table.cols.clear();
    return table;
  }
  check_metric_known(matrix, metric);
  if (matrix.sources().size() < 2)
    throw ArgumentError("avg_rank: needs at least two sources");

  std::map<std::string, std::pair<double, long>> acc;  // source -> (sum, n)
  for (const auto& target : matrix.targets()) {
    for (const auto& model : matrix.models()) {
      std::vector<std::pair<double, std::string>> present;
      for (const auto& source : matrix.sources())
        if (const auto v = matrix.value(model, source, target, metric))
          present.push_back({*v, source});
      if (present.empty()) continue;
      for (const auto& [source, rank] : midranks(std::move(present))) {
        auto& slot = acc[source];
        slot.first += rank;
        slot.second += 1;
      }
    }
  }

  table.rows = matrix.sources();
  table.values.resize(static_cast<Eigen::Index>(table.rows.size()), 1);
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    const auto it = acc.find(table.rows[s]);
    if (it == acc.end()) {
      table.values(static_cast<Eigen::Index>(s), 0) = kNaN;
      table.notes.push_back("source " + table.rows[s] + " skipped: no " +
                            metric + " cells");
    } else {
      table.values(static_cast<Eigen::Index>(s), 0) =
          it->second.first / static_cast<double>(it->second.second);
    }
  }
  return table;
}

SummaryTable avg_relative_metric(const ResultsMatrix& matrix,
                                 const std::string& metric) {
  SummaryTable table;
  table.stat = "relmetric";
  table.metric = metric;
  if (matrix.empty()) return table;
  check_metric_known(matrix, metric);

  table.rows = matrix.sources();
  table.cols = matrix.models();
  table.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(table.cols.size()));
  table.values.setConstant(kNaN);

  // per-target best over every (model, source) pair
  std::map<std::string, double> best;
  for (const auto& target : matrix.targets()) {
    double b = kInf;
    for (const auto& model : matrix.models())
      for (const auto& source : matrix.sources())
        if (const auto v = matrix.value(model, source, target, metric))
          b = std::min(b, *v);
    if (std::isfinite(b)) best[target] = b;
  }

  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    for (std::size_t m = 0; m < table.cols.size(); ++m) {
      double sum = 0.0;
      long n = 0;
      for (const auto& target : matrix.targets()) {
        const auto v =
            matrix.value(table.cols[m], table.rows[s], target, metric);
        if (!v) continue;
        const double b = best.at(target);
        double contribution;
        if (b == 0.0)
          contribution = (*v == 0.0) ? 0.0 : kInf;
        else
          contribution = (*v - b) / b;
        sum += contribution;
        ++n;
      }
      if (n > 0)
        table.values(static_cast<Eigen::Index>(s),
                     static_cast<Eigen::Index>(m)) =
            sum / static_cast<double>(n);
    }
  }
  return table;
}

SummaryTable summarize(const ResultsMatrix& matrix, const std::string& stat,
                       const std::string& metric) {
  if (stat == "winrate") return win_rate(matrix, metric);
  if (stat == "rank") return avg_rank(matrix, metric);
  if (stat == "relmetric") return avg_relative_metric(matrix, metric);
  throw ArgumentError("summarize: unknown statistic '" + stat +
                      "' (expected winrate, rank, or relmetric)");
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_markdown(const SummaryTable& table) {
  std::string out;
  out += "| " + table.stat + "(" + table.metric + ") |";
  for (const auto& col : table.cols) out += " " + col + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < table.cols.size(); ++i) out += "---|";
  out += "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += "| " + table.rows[r] + " |";
    for (std::size_t c = 0; c < table.cols.size(); ++c)
      out += " " +
             format_display(table.values(static_cast<Eigen::Index>(r),
                                         static_cast<Eigen::Index>(c))) +
             " |";
    out += "\n";
  }
  for (const auto& note : table.notes) out += "_" + note + "_\n";
  return out;
}

std::string render_csv(const SummaryTable& table) {
  std::string out = "label";
  for (const auto& col : table.cols) {
    check_label(col);
    out += "," + col;
  }
  out += "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    check_label(table.rows[r]);
    out += table.rows[r];
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      out += ",";
      const double v =
          table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (std::isnan(v)) continue;  // missing -> empty field
      if (std::isinf(v)) {
        out += "inf";
        continue;
      }
      append_double(out, v);
    }
    out += "\n";
  }
  return out;
}

SummaryTable parse_summary_csv(std::istream& in) {
  SummaryTable table;
  std::string line;
  if (!std::getline(in, line))
    throw IoError("summary csv: missing header line");
  auto header = split_fields(line);
  if (header.empty() || header[0] != "label")
    throw IoError("summary csv: header must start with 'label'");
  table.cols.assign(header.begin() + 1, header.end());

  std::vector<std::vector<double>> grid;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw IoError("summary csv: expected " + std::to_string(header.size()) +
                    " fields on line " + std::to_string(line_no) + ", got " +
                    std::to_string(fields.size()));
    if (fields[0].empty())
      throw IoError("summary csv: empty row label on line " +
                    std::to_string(line_no));
    table.rows.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i)
      row.push_back(parse_value(fields[i], line_no));
    grid.push_back(std::move(row));
  }

  table.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(table.cols.size()));
  for (std::size_t r = 0; r < grid.size(); ++r)
    for (std::size_t c = 0; c < grid[r].size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          grid[r][c];
  return table;
}

}  // namespace synthlab::reporting
