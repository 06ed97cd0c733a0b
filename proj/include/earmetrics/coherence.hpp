#pragma once

#include <optional>
#include <string>
#include <vector>

#include "earmetrics/audio.hpp"
#include "earmetrics/spectral.hpp"
#include "earmetrics/stft.hpp"

namespace earm {

enum class WeightMode {
  /// w = |S_ref| * |S_rec|
  Product,
  /// w = |S_ref|^2
  ReferenceEnergy,
};

struct CoherenceConfig {
  StftConfig stft = StftConfig::with_default_hop(2048);
  double epsilon = 1e-8;
  WeightMode weight_mode = WeightMode::Product;

  void validate() const;
};

/// Percentage in [0, 100]. `degenerate` marks inputs with total weight below
/// epsilon, which score 100 by convention.
struct CoherenceScore {
  double percent = 100.0;
  bool degenerate = false;
};

/// Energy-weighted mean resultant length of per-bin phase errors (ICPC).
/// Constant phase offsets, including pi, score 100%.
CoherenceScore icpc(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                    const CoherenceConfig& cfg = {});
CoherenceScore icpc(std::span<const double> ref, std::span<const double> rec, int rate,
                    const CoherenceConfig& cfg = {});
/// Per-channel ICPC averaged across channels.
CoherenceScore icpc(const AudioBuffer& ref, const AudioBuffer& rec, const CoherenceConfig& cfg = {});

/// Same statistic on the error of the inter-channel phase difference (CCPC).
CoherenceScore ccpc(const ComplexSpectrogram& ref_l, const ComplexSpectrogram& ref_r,
                    const ComplexSpectrogram& rec_l, const ComplexSpectrogram& rec_r,
                    const CoherenceConfig& cfg = {});
CoherenceScore ccpc(const AudioBuffer& ref, const AudioBuffer& rec, const CoherenceConfig& cfg = {});

/// Reports clamp SI-SDR to +-kSiSdrCapDb.
inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB, clamped to [-100, +100]. Throws on an all-zero
/// reference.
double si_sdr(std::span<const double> ref, std::span<const double> rec);

struct EvalConfig {
  MultiScaleConfig multiscale = MultiScaleConfig::evaluation();
  CoherenceConfig coherence;
  Prefilter prefilter = Prefilter::None;
};

struct MetricReport {
  double mel_dist = 0.0;
  double stft_dist = 0.0;
  double icpc_percent = 100.0;
  double ccpc_percent = 100.0;
  double si_sdr_db = 0.0;
  double dbtp_dist = 0.0;

  std::string ref_id;
  std::string rec_id;
  int sample_rate = 0;
  std::size_t frames = 0;
  EvalConfig config;

  bool mono_duplicated = false;
  bool truncated = false;
  bool resampled = false;
  bool icpc_degenerate = false;
  bool ccpc_degenerate = false;
  bool zero_reference = false;
};

/// Reference and reconstruction brought to a common rate, channel layout and
/// length, with a record of what had to change.
struct AlignedPair {
  AudioBuffer ref;
  AudioBuffer rec;
  bool mono_duplicated = false;
  bool truncated = false;
  bool resampled = false;
};

/// Resamples rec to ref's rate, duplicates mono to stereo and truncates both
/// to the shorter length. The reference samples are never altered.
AlignedPair align_pair(const AudioBuffer& ref, const AudioBuffer& rec);

/// Full metric battery for one (reference, reconstruction) pair. Mono inputs
/// are duplicated to stereo, a reconstruction at another rate is resampled to
/// the reference rate, and both are truncated to the shorter length; each
/// adjustment is flagged in the report.
MetricReport evaluate_pair(const AudioBuffer& ref, const AudioBuffer& rec,
                           const EvalConfig& cfg = {}, std::string ref_id = {},
                           std::string rec_id = {});

/// Evaluates consecutive chunks of `chunk_seconds` and averages them. A tail
/// shorter than the largest fft size is folded into the previous chunk.
MetricReport evaluate_chunked(const AudioBuffer& ref, const AudioBuffer& rec, double chunk_seconds,
                              const EvalConfig& cfg = {}, std::string ref_id = {},
                              std::string rec_id = {});

/// Mean of the six metrics across several reports (flags are OR-ed).
MetricReport average_reports(const std::vector<MetricReport>& reports);

/// JSON object with the six metrics first, two decimals each.
std::string to_json(const MetricReport& report);
std::string csv_header();
std::string to_csv_row(const MetricReport& report);

/// Two-decimal rendering used in every report (never "nan" or "inf").
std::string format_fixed2(double v);

}  // namespace earm
