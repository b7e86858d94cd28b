#include "mad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mad/error.hpp"
#include "mad/rng.hpp"

namespace mad {

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::spike:
      return "spike";
    case AnomalyKind::drift:
      return "drift";
    case AnomalyKind::decouple:
      return "decouple";
  }
  return "unknown";
}

AnomalyKind parse_anomaly_kind(const std::string& name) {
  if (name == "spike") return AnomalyKind::spike;
  if (name == "drift") return AnomalyKind::drift;
  if (name == "decouple") return AnomalyKind::decouple;
  throw usage_error("unknown anomaly kind '" + name + "'");
}

void SynthConfig::validate() const {
  if (channels == 0) throw usage_error("synth: channels must be positive");
  if (train_rows < 2 || test_rows < 2) {
    throw usage_error("synth: series lengths must be at least 2");
  }
  if (sources == 0) throw usage_error("synth: sources must be positive");
  if (segment_min_len == 0 || segment_min_len > segment_max_len) {
    throw usage_error("synth: need 0 < segment_min_len <= segment_max_len");
  }
  if (segment_count > 0 && kinds.empty()) {
    throw usage_error("synth: anomaly segments need at least one kind");
  }
  if (coupling_density < 0.0 || coupling_density > 1.0) {
    throw usage_error("synth: coupling_density must lie in [0, 1]");
  }
  if (noise_std < 0.0) throw usage_error("synth: noise_std must be >= 0");
  if (segment_count * segment_min_len > test_rows) {
    throw data_error("synth: anomaly segments exceed the test series length");
  }
}

namespace {

constexpr double kTwoPi = 6.283185307179586;

}  // namespace

SyntheticProcess::SyntheticProcess(const SynthConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t n = cfg_.channels, k = cfg_.sources;
  Rng rng(derive_seed(cfg_.seed, "synth_structure"));

  periods_.resize(k);
  for (auto& p : periods_) p = 16.0 + 48.0 * uniform01(rng);
  mixing_.resize(n * k);
  phases_.resize(n * k);
  for (std::size_t i = 0; i < n * k; ++i) {
    mixing_[i] = 2.0 * uniform01(rng) - 1.0;
    phases_[i] = kTwoPi * uniform01(rng);
  }
  offsets_.resize(n);
  for (auto& o : offsets_) o = 4.0 * uniform01(rng) - 2.0;
  coupling_.assign(n * n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (uniform01(rng) < cfg_.coupling_density) {
        const double mag = 0.3 + 0.5 * uniform01(rng);
        coupling_[j * n + i] = uniform01(rng) < 0.5 ? -mag : mag;
      }
    }
  }

  const SeriesTable probe = sample(2000, 0, UINT64_MAX);
  scale_.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < probe.rows(); ++r) mean += probe.values(r, c);
    mean /= static_cast<double>(probe.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < probe.rows(); ++r) {
      const double d = probe.values(r, c) - mean;
      var += d * d;
    }
    scale_[c] = std::sqrt(var / static_cast<double>(probe.rows()));
  }
}

double SyntheticProcess::clean_value(std::size_t channel, double t,
                                     const std::vector<double>& upstream) const {
  const std::size_t n = cfg_.channels, k = cfg_.sources;
  double v = offsets_[channel];
  for (std::size_t s = 0; s < k; ++s) {
    v += mixing_[channel * k + s] *
         std::sin(kTwoPi * t / periods_[s] + phases_[channel * k + s]);
  }
  for (std::size_t i = 0; i < channel; ++i) {
    v += coupling_[channel * n + i] * upstream[i];
  }
  return v;
}

SeriesTable SyntheticProcess::sample(std::size_t rows, std::size_t t0,
                                     std::uint64_t noise_stream) const {
  const std::size_t n = cfg_.channels;
  Rng rng(derive_seed(cfg_.seed, "synth_noise", {noise_stream}));
  SeriesTable table;
  table.values = Matrix(rows, n);
  for (std::size_t c = 0; c < n; ++c) {
    table.channel_names.push_back("x" + std::to_string(c));
  }
  std::vector<double> row(n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double t = static_cast<double>(t0 + r);
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = clean_value(c, t, row) + cfg_.noise_std * standard_normal(rng);
      table.values(r, c) = row[c];
    }
  }
  return table;
}

std::vector<AnomalySegment> SyntheticProcess::place_segments(
    std::size_t rows, std::uint64_t stream) const {
  const std::size_t count = cfg_.segment_count;
  if (count == 0) return {};
  Rng rng(derive_seed(cfg_.seed, "synth_segments", {stream}));
  std::vector<std::size_t> lengths(count);
  const std::size_t spread = cfg_.segment_max_len - cfg_.segment_min_len + 1;
  for (auto& len : lengths) {
    len = cfg_.segment_min_len + uniform_index(rng, spread);
  }
  std::size_t total = std::accumulate(lengths.begin(), lengths.end(),
                                      std::size_t{0});
  // Shrink the longest segments until everything fits.
  while (total > rows) {
    auto it = std::max_element(lengths.begin(), lengths.end());
    if (*it <= cfg_.segment_min_len) {
      throw data_error("synth: anomaly segments exceed series length");
    }
    --*it;
    --total;
  }
  const std::size_t free_rows = rows - total;
  std::vector<std::size_t> gaps(count);
  for (auto& g : gaps) g = uniform_index(rng, free_rows + 1);
  std::sort(gaps.begin(), gaps.end());

  std::vector<AnomalySegment> segments;
  std::size_t used = 0;
  for (std::size_t i = 0; i < count; ++i) {
    AnomalySegment seg;
    seg.kind = cfg_.kinds[i % cfg_.kinds.size()];
    seg.start = gaps[i] + used;
    seg.length = lengths[i];
    seg.channel = uniform_index(rng, cfg_.channels);
    used += lengths[i];
    segments.push_back(seg);
  }
  return segments;
}

void SyntheticProcess::inject(SeriesTable& table, std::size_t t0,
                              const std::vector<AnomalySegment>& segments,
                              std::uint64_t stream) const {
  const std::size_t n = cfg_.channels;
  if (!table.labels) table.labels = std::vector<int>(table.rows(), 0);
  Rng rng(derive_seed(cfg_.seed, "synth_anomaly", {stream}));
  std::vector<double> row(n);
  for (const auto& seg : segments) {
    if (seg.start + seg.length > table.rows()) {
      throw data_error("synth: anomaly segment exceeds series length");
    }
    const std::size_t c = seg.channel;
    const double size = cfg_.anomaly_scale * scale_[c];
    switch (seg.kind) {
      case AnomalyKind::spike:
        for (std::size_t r = 0; r < seg.length; ++r) {
          const double mag = size * (0.5 + 0.5 * uniform01(rng));
          table.values(seg.start + r, c) += uniform01(rng) < 0.5 ? -mag : mag;
        }
        break;
      case AnomalyKind::drift: {
        const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < seg.length; ++r) {
          const double frac = static_cast<double>(r + 1) /
                              static_cast<double>(seg.length);
          table.values(seg.start + r, c) += sign * size * frac;
        }
        break;
      }
      case AnomalyKind::decouple: {
        // Replay the channel from a distant time: values stay in the NOC
        // range but lose their phase relation to the other channels.
        const double shift =
            periods_.front() * (0.25 + 0.5 * uniform01(rng)) + 997.0;
        for (std::size_t r = 0; r < seg.length; ++r) {
          const double t = static_cast<double>(t0 + seg.start + r) + shift;
          for (std::size_t i = 0; i <= c; ++i) {
            row[i] = clean_value(i, t, row) +
                     cfg_.noise_std * standard_normal(rng);
          }
          table.values(seg.start + r, c) = row[c];
        }
        break;
      }
    }
    for (std::size_t r = 0; r < seg.length; ++r) {
      (*table.labels)[seg.start + r] = 1;
    }
  }
}

SynthData synth_generate(const SynthConfig& cfg) {
  const SyntheticProcess process(cfg);
  SynthData out;
  out.train = process.sample(cfg.train_rows, 0, 0);
  out.train.labels = std::vector<int>(cfg.train_rows, 0);
  out.test = process.sample(cfg.test_rows, cfg.train_rows, 1);
  out.test.labels = std::vector<int>(cfg.test_rows, 0);
  out.segments = process.place_segments(cfg.test_rows, 1);
  process.inject(out.test, cfg.train_rows, out.segments, 1);
  return out;
}

}  // namespace mad
