#include "mad/masking.hpp"

#include <cmath>
#include <numeric>

#include "mad/error.hpp"
#include "mad/rng.hpp"

namespace mad {

std::string to_string(FillAction action) {
  switch (action) {
    case FillAction::random:
      return "random";
    case FillAction::same:
      return "same";
    case FillAction::zero:
      return "zero";
  }
  return "unknown";
}

void MaskPolicy::validate() const {
  if (!(mask_rate > 0.0 && mask_rate <= 1.0)) {
    throw usage_error("mask_rate must lie in (0, 1]");
  }
  for (double p : {fill.p_rnd, fill.p_same, fill.p_zero}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw usage_error("fill rates must lie in [0, 1]");
    }
  }
  if (std::abs(fill.p_rnd + fill.p_same + fill.p_zero - 1.0) > 1e-9) {
    throw usage_error("fill rates must sum to 1");
  }
}

std::size_t MaskSpec::masked_cells() const {
  std::size_t cells = 0;
  for (const auto& e : entries) cells += e.channel ? 1 : channels;
  return cells;
}

Matrix MaskSpec::indicator() const {
  Matrix m(window_len, channels);
  for (const auto& e : entries) {
    if (e.channel) {
      m(e.step, *e.channel) = 1.0;
    } else {
      for (std::size_t c = 0; c < channels; ++c) m(e.step, c) = 1.0;
    }
  }
  return m;
}

std::size_t mask_count(std::size_t window_len, std::size_t n,
                       const MaskPolicy& policy) {
  const std::size_t units = policy.step_mode ? window_len : window_len * n;
  // The slack keeps decimal rates like 0.35 rounding half up despite their
  // binary representation landing just below the half.
  const auto k = static_cast<std::size_t>(
      std::floor(static_cast<double>(units) * policy.mask_rate + 0.5 + 1e-9));
  return std::min(units, std::max<std::size_t>(1, k));
}

namespace {

FillAction draw_action(Rng& rng, const FillRates& fill) {
  const double u = uniform01(rng);
  if (u < fill.p_rnd) return FillAction::random;
  if (u < fill.p_rnd + fill.p_same) return FillAction::same;
  return FillAction::zero;
}

MaskEntry make_entry(Rng& rng, std::size_t step,
                     std::optional<std::size_t> channel, std::size_t n,
                     const FillRates& fill) {
  MaskEntry e;
  e.step = step;
  e.channel = channel;
  e.action = draw_action(rng, fill);
  if (e.action == FillAction::random) {
    e.fill_values.resize(channel ? 1 : n);
    for (auto& v : e.fill_values) v = uniform01(rng);
  }
  return e;
}

}  // namespace

MaskSpec sample_mask(std::size_t window_len, std::size_t n,
                     const MaskPolicy& policy, std::uint64_t seed) {
  if (window_len == 0 || n == 0) {
    throw usage_error("mask: window length and channel count must be positive");
  }
  policy.validate();
  Rng rng(seed);
  const std::size_t units = policy.step_mode ? window_len : window_len * n;
  const std::size_t k = mask_count(window_len, n, policy);

  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<std::size_t> pool(units);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + uniform_index(rng, units - i)]);
  }

  MaskSpec spec{window_len, n, {}};
  spec.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t unit = pool[i];
    if (policy.step_mode) {
      spec.entries.push_back(make_entry(rng, unit, std::nullopt, n, policy.fill));
    } else {
      spec.entries.push_back(make_entry(rng, unit / n, unit % n, n, policy.fill));
    }
  }
  return spec;
}

MaskSpec single_step_mask(std::size_t window_len, std::size_t n,
                          std::size_t step, const FillRates& fill,
                          std::uint64_t seed) {
  if (step >= window_len) throw usage_error("mask step out of range");
  Rng rng(seed);
  MaskSpec spec{window_len, n, {}};
  spec.entries.push_back(make_entry(rng, step, std::nullopt, n, fill));
  return spec;
}

void apply_mask_in_place(Matrix& dest, std::size_t row0, const MaskSpec& spec) {
  if (row0 + spec.window_len > dest.rows() || spec.channels != dest.cols()) {
    throw usage_error("mask spec does not fit the window");
  }
  for (const auto& e : spec.entries) {
    if (e.step >= spec.window_len ||
        (e.channel && *e.channel >= spec.channels)) {
      throw usage_error("mask entry out of window bounds");
    }
    auto row = dest.row(row0 + e.step);
    const std::size_t c0 = e.channel ? *e.channel : 0;
    const std::size_t width = e.channel ? 1 : spec.channels;
    for (std::size_t j = 0; j < width; ++j) {
      switch (e.action) {
        case FillAction::random:
          row[c0 + j] = e.fill_values[j];
          break;
        case FillAction::zero:
          row[c0 + j] = 0.0;
          break;
        case FillAction::same:
          break;
      }
    }
  }
}

MaskedWindow apply_mask(const Matrix& x, const MaskSpec& spec) {
  if (x.rows() != spec.window_len || x.cols() != spec.channels) {
    throw usage_error("mask spec shape does not match the window");
  }
  MaskedWindow out;
  out.targets.reserve(spec.masked_cells());
  for (const auto& e : spec.entries) {
    if (e.step >= spec.window_len ||
        (e.channel && *e.channel >= spec.channels)) {
      throw usage_error("mask entry out of window bounds");
    }
    if (e.channel) {
      out.targets.push_back(x(e.step, *e.channel));
    } else {
      for (std::size_t c = 0; c < spec.channels; ++c) {
        out.targets.push_back(x(e.step, c));
      }
    }
  }
  out.corrupted = x;
  apply_mask_in_place(out.corrupted, 0, spec);
  return out;
}

}  // namespace mad
