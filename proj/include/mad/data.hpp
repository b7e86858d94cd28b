#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mad/matrix.hpp"

namespace mad {

// Rows are time steps, columns are channels.
struct SeriesTable {
  Matrix values;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> channel_names;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t channels() const noexcept { return values.cols(); }

  // Throws data_error when arity or label invariants do not hold.
  void validate() const;
};

struct CsvOptions {
  // When unset, a column named "label" is used if present.
  std::optional<std::string> label_column;
  // Columns dropped before parsing (timestamps, run ids, ...).
  std::vector<std::string> ignore_columns;
};

SeriesTable load_csv(const std::filesystem::path& path,
                     const CsvOptions& options = {});

// Writes the channel columns followed by a "label" column when labels exist.
std::string to_csv(const SeriesTable& table);
void write_csv(const SeriesTable& table, const std::filesystem::path& path);

// Per-channel min-max scaling fitted on training rows only.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> min, std::vector<double> max);

  static Normalizer fit(const SeriesTable& train);

  // Test-time values outside the training range are not clipped.
  SeriesTable apply(const SeriesTable& table) const;
  SeriesTable inverse(const SeriesTable& table) const;

  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }
  std::size_t channels() const noexcept { return min_.size(); }

  std::string to_csv() const;
  static Normalizer from_csv(const std::string& text);

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

struct WindowOrigin {
  std::uint64_t series_id = 0;
  std::uint64_t start = 0;

  friend bool operator==(const WindowOrigin&, const WindowOrigin&) = default;
};

// A length-(T+1) slice; label is 1 iff any covered row is labelled anomalous.
struct Window {
  Matrix x;
  int label = 0;
  WindowOrigin origin;

  std::size_t length() const noexcept { return x.rows(); }
  std::size_t channels() const noexcept { return x.cols(); }
};

// Windows start at 0, stride, 2*stride, ...
std::vector<Window> make_windows(const SeriesTable& table,
                                 std::size_t window_len, std::size_t stride,
                                 std::uint64_t series_id = 0);

std::size_t window_count(std::size_t rows, std::size_t window_len,
                         std::size_t stride);

// Seeded shuffle, then the first floor(N * train_fraction) go to train.
std::pair<std::vector<Window>, std::vector<Window>> split_train_val(
    std::vector<Window> windows, double train_fraction, std::uint64_t seed);

}  // namespace mad
