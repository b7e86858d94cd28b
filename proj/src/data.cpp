#include "mad/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mad/error.hpp"
#include "mad/io.hpp"
#include "mad/rng.hpp"

namespace mad {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

void SeriesTable::validate() const {
  if (values.cols() == 0) throw data_error("series table has no channels");
  if (!channel_names.empty() && channel_names.size() != values.cols()) {
    throw data_error("channel name count does not match column count");
  }
  if (labels) {
    if (labels->size() != values.rows()) {
      throw data_error("label count does not match row count");
    }
    for (int l : *labels) {
      if (l != 0 && l != 1) throw data_error("labels must be 0 or 1");
    }
  }
}

SeriesTable load_csv(const std::filesystem::path& path,
                     const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw data_error(path.string() + ": missing header row");
  }
  std::vector<std::string> header;
  for (const auto& f : split_csv_line(line)) header.push_back(trim(f));

  const std::string label_name = options.label_column.value_or("label");
  std::optional<std::size_t> label_col;
  std::vector<std::size_t> value_cols;
  SeriesTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_name) {
      label_col = c;
    } else if (std::find(options.ignore_columns.begin(),
                         options.ignore_columns.end(),
                         header[c]) == options.ignore_columns.end()) {
      value_cols.push_back(c);
      table.channel_names.push_back(header[c]);
    }
  }
  if (options.label_column && !label_col) {
    throw data_error(path.string() + ": label column '" + label_name +
                     "' not found");
  }
  if (value_cols.empty()) throw data_error(path.string() + ": no value columns");

  std::vector<double> cells;
  std::vector<int> labels;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw data_error(path.string() + ": ragged row at line " +
                       std::to_string(line_no) + " (expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()) + ")");
    }
    for (std::size_t c : value_cols) {
      const auto v = parse_real(trim(fields[c]));
      if (!v || !std::isfinite(*v)) {
        throw data_error(path.string() + ": non-numeric cell at row " +
                         std::to_string(row) + ", column '" + header[c] +
                         "' (line " + std::to_string(line_no) + ")");
      }
      cells.push_back(*v);
    }
    if (label_col) {
      const auto v = parse_real(trim(fields[*label_col]));
      if (!v || (*v != 0.0 && *v != 1.0)) {
        throw data_error(path.string() + ": label outside {0,1} at row " +
                         std::to_string(row) + " (line " +
                         std::to_string(line_no) + ")");
      }
      labels.push_back(*v == 1.0 ? 1 : 0);
    }
    ++row;
  }

  table.values = Matrix(row, value_cols.size());
  std::copy(cells.begin(), cells.end(), table.values.data());
  if (label_col) table.labels = std::move(labels);
  return table;
}

std::string to_csv(const SeriesTable& table) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.channels(); ++c) {
    if (c) out << ',';
    out << (c < table.channel_names.size() ? table.channel_names[c]
                                           : "x" + std::to_string(c));
  }
  if (table.labels) out << ",label";
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.channels(); ++c) {
      if (c) out << ',';
      out << format_double(table.values(r, c));
    }
    if (table.labels) out << ',' << (*table.labels)[r];
    out << '\n';
  }
  return out.str();
}

void write_csv(const SeriesTable& table, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(table));
}

Normalizer::Normalizer(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) {
    throw data_error("normalizer min/max arity mismatch");
  }
}

Normalizer Normalizer::fit(const SeriesTable& train) {
  if (train.rows() < 2) throw data_error("normalizer needs at least 2 rows");
  const std::size_t n = train.channels();
  std::vector<double> lo(n), hi(n);
  for (std::size_t c = 0; c < n; ++c) {
    lo[c] = hi[c] = train.values(0, c);
  }
  for (std::size_t r = 1; r < train.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      lo[c] = std::min(lo[c], train.values(r, c));
      hi[c] = std::max(hi[c], train.values(r, c));
    }
  }
  return Normalizer(std::move(lo), std::move(hi));
}

SeriesTable Normalizer::apply(const SeriesTable& table) const {
  if (table.channels() != channels()) {
    throw data_error("normalizer expects " + std::to_string(channels()) +
                     " channels, table has " +
                     std::to_string(table.channels()));
  }
  SeriesTable out = table;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.channels(); ++c) {
      const double span = max_[c] - min_[c];
      double& v = out.values(r, c);
      v = span > 0.0 ? (v - min_[c]) / span : 0.0;
    }
  }
  return out;
}

SeriesTable Normalizer::inverse(const SeriesTable& table) const {
  if (table.channels() != channels()) {
    throw data_error("normalizer channel mismatch");
  }
  SeriesTable out = table;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.channels(); ++c) {
      double& v = out.values(r, c);
      v = min_[c] + v * (max_[c] - min_[c]);
    }
  }
  return out;
}

std::string Normalizer::to_csv() const {
  std::ostringstream out;
  out << "channel,min,max\n";
  for (std::size_t c = 0; c < channels(); ++c) {
    out << c << ',' << format_double(min_[c]) << ',' << format_double(max_[c])
        << '\n';
  }
  return out.str();
}

Normalizer Normalizer::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "channel,min,max") {
    throw data_error("normalizer file: unexpected header");
  }
  std::vector<double> lo, hi;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw data_error("normalizer file: malformed row");
    const auto a = parse_real(trim(f[1]));
    const auto b = parse_real(trim(f[2]));
    if (!a || !b) throw data_error("normalizer file: non-numeric bound");
    lo.push_back(*a);
    hi.push_back(*b);
  }
  if (lo.empty()) throw data_error("normalizer file: no channels");
  return Normalizer(std::move(lo), std::move(hi));
}

std::size_t window_count(std::size_t rows, std::size_t window_len,
                         std::size_t stride) {
  if (window_len == 0 || stride == 0 || rows < window_len) return 0;
  return (rows - window_len) / stride + 1;
}

std::vector<Window> make_windows(const SeriesTable& table,
                                 std::size_t window_len, std::size_t stride,
                                 std::uint64_t series_id) {
  if (window_len < 2) throw usage_error("window length must be at least 2");
  if (stride == 0) throw usage_error("stride must be positive");
  if (window_len > table.rows()) {
    throw data_error("window length " + std::to_string(window_len) +
                     " exceeds series length " + std::to_string(table.rows()));
  }
  const std::size_t n = table.channels();
  const std::size_t count = window_count(table.rows(), window_len, stride);

  // Prefix sums of labels give O(1) containment per window.
  std::vector<std::size_t> anomalous(table.rows() + 1, 0);
  if (table.labels) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
      anomalous[r + 1] = anomalous[r] + ((*table.labels)[r] == 1 ? 1 : 0);
    }
  }

  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * stride;
    Window win;
    win.x = Matrix(window_len, n);
    std::copy_n(table.values.row(start).data(), window_len * n, win.x.data());
    win.label = anomalous[start + window_len] > anomalous[start] ? 1 : 0;
    win.origin = {series_id, start};
    windows.push_back(std::move(win));
  }
  return windows;
}

std::pair<std::vector<Window>, std::vector<Window>> split_train_val(
    std::vector<Window> windows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw usage_error("train_fraction must lie in (0, 1)");
  }
  if (windows.empty()) throw data_error("cannot split an empty window set");
  Rng rng(derive_seed(seed, "split"));
  for (std::size_t i = windows.size() - 1; i > 0; --i) {
    std::swap(windows[i], windows[uniform_index(rng, i + 1)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(windows.size()) * train_fraction + 1e-9));
  std::vector<Window> val(std::make_move_iterator(windows.begin() + n_train),
                          std::make_move_iterator(windows.end()));
  windows.resize(n_train);
  return {std::move(windows), std::move(val)};
}

}  // namespace mad
