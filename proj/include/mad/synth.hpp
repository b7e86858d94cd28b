#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mad/data.hpp"

namespace mad {

enum class AnomalyKind { spike, drift, decouple };

std::string to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& name);

struct SynthConfig {
  std::size_t channels = 6;
  std::size_t train_rows = 4000;
  std::size_t test_rows = 4000;
  std::uint64_t seed = 1;
  std::vector<AnomalyKind> kinds{AnomalyKind::spike, AnomalyKind::drift,
                                 AnomalyKind::decouple};
  std::size_t segment_count = 15;
  std::size_t segment_min_len = 10;
  std::size_t segment_max_len = 40;
  // Fraction of the lower-triangular cross-channel coefficients that are
  // nonzero.
  double coupling_density = 0.5;
  std::size_t sources = 3;
  double noise_std = 0.05;
  // Anomaly size in units of the channel's NOC standard deviation.
  double anomaly_scale = 4.0;

  void validate() const;
};

struct AnomalySegment {
  AnomalyKind kind;
  std::size_t start;
  std::size_t length;
  std::size_t channel;
};

// Latent sinusoids mixed into channels, plus a sparse causal coupling between
// channels and white noise. The structure is fixed by the config seed; each
// noise stream gives an independent draw of the same process.
class SyntheticProcess {
 public:
  explicit SyntheticProcess(const SynthConfig& cfg);

  // NOC rows for times [t0, t0 + rows).
  SeriesTable sample(std::size_t rows, std::size_t t0,
                     std::uint64_t noise_stream) const;

  // Overwrites `table` rows inside each segment and marks them in labels.
  void inject(SeriesTable& table, std::size_t t0,
              const std::vector<AnomalySegment>& segments,
              std::uint64_t stream) const;

  std::vector<AnomalySegment> place_segments(std::size_t rows,
                                             std::uint64_t stream) const;

  const SynthConfig& config() const noexcept { return cfg_; }

 private:
  double clean_value(std::size_t channel, double t,
                     const std::vector<double>& upstream) const;

  SynthConfig cfg_;
  std::vector<double> periods_;
  std::vector<double> mixing_;   // channels x sources
  std::vector<double> phases_;   // channels x sources
  std::vector<double> offsets_;  // per channel
  std::vector<double> coupling_; // channels x channels, strictly lower
  std::vector<double> scale_;    // NOC standard deviation per channel
};

struct SynthData {
  SeriesTable train;  // NOC only
  SeriesTable test;   // with labels
  std::vector<AnomalySegment> segments;
};

SynthData synth_generate(const SynthConfig& cfg);

}  // namespace mad
