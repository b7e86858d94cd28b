#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mad/matrix.hpp"

namespace mad {

enum class FillAction : std::uint8_t { random, same, zero };

std::string to_string(FillAction action);

struct FillRates {
  double p_rnd = 1.0;
  double p_same = 0.0;
  double p_zero = 0.0;

  friend bool operator==(const FillRates&, const FillRates&) = default;
};

struct MaskPolicy {
  double mask_rate = 0.15;
  FillRates fill;
  // Mask whole time steps across all channels instead of single cells.
  bool step_mode = true;

  // Throws usage_error unless rates are in range and sum to 1 within 1e-9.
  void validate() const;

  friend bool operator==(const MaskPolicy&, const MaskPolicy&) = default;
};

struct MaskEntry {
  std::size_t step = 0;
  // Set in cell mode only.
  std::optional<std::size_t> channel;
  FillAction action = FillAction::random;
  // Uniform [0,1] draws for random fills: one per channel in step mode, one
  // in cell mode. Empty otherwise.
  std::vector<double> fill_values;
};

struct MaskSpec {
  std::size_t window_len = 0;
  std::size_t channels = 0;
  std::vector<MaskEntry> entries;

  std::size_t masked_cells() const;
  // 0/1 indicator of masked cells, window_len x channels.
  Matrix indicator() const;
};

// max(1, round-half-up(units * rate)), units = window_len or window_len * n.
std::size_t mask_count(std::size_t window_len, std::size_t n,
                       const MaskPolicy& policy);

MaskSpec sample_mask(std::size_t window_len, std::size_t n,
                     const MaskPolicy& policy, std::uint64_t seed);

// A spec that masks exactly time step `step`; the fill action is drawn from
// `fill` with the given seed.
MaskSpec single_step_mask(std::size_t window_len, std::size_t n,
                          std::size_t step, const FillRates& fill,
                          std::uint64_t seed);

struct MaskedWindow {
  Matrix corrupted;
  // Pre-corruption values at masked cells, in entry order (channel order
  // within a step entry).
  std::vector<double> targets;
};

MaskedWindow apply_mask(const Matrix& x, const MaskSpec& spec);

// Writes the corruption of `spec` into rows [row0, row0 + window_len) of
// `dest`, which already holds the clean window there.
void apply_mask_in_place(Matrix& dest, std::size_t row0, const MaskSpec& spec);

}  // namespace mad
