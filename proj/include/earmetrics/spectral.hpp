#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "earmetrics/audio.hpp"
#include "earmetrics/phase.hpp"
#include "earmetrics/stereo.hpp"
#include "earmetrics/stft.hpp"
#include "earmetrics/weighting.hpp"

namespace earm {

struct MultiScaleConfig {
  std::vector<std::size_t> fft_sizes = {4096, 2048, 1024, 512, 256, 128};
  double hop_ratio = 0.25;
  Window window = Window::Hann;
  double log_epsilon = 1e-5;
  /// Mel bands per scale; empty means min(128, fft_size / 8) for every scale.
  std::vector<std::size_t> mel_bins;

  /// Six evaluation resolutions, 4096 down to 128.
  static MultiScaleConfig evaluation();
  /// Five resolutions matching the multi-scale discriminator, 2048 down to 128.
  static MultiScaleConfig discriminator();

  void validate() const;
  StftConfig stft_for(std::size_t fft_size) const;
  std::size_t mel_bins_for(std::size_t scale_index) const;
  std::size_t max_fft_size() const;
};

/// Triangular filters on the HTK mel scale spanning 0 Hz to Nyquist,
/// shape [n_mels x (fft_size/2 + 1)], each peaking at 1.
RealMatrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, int rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// mean |log(|ref| + eps) - log(|rec| + eps)| over all bins of one scale.
double log_magnitude_l1(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                        double log_epsilon);

/// Multi-scale log-magnitude L1 distance, averaged over scales.
double log_magnitude_distance(std::span<const double> ref, std::span<const double> rec, int rate,
                              const MultiScaleConfig& cfg);

/// As log_magnitude_distance but on mel-projected magnitudes.
double mel_distance(std::span<const double> ref, std::span<const double> rec, int rate,
                    const MultiScaleConfig& cfg);

enum class Prefilter { None, K, A };

std::string_view to_string(Prefilter p);
Prefilter parse_prefilter(std::string_view s);

/// Applies the requested weighting (designed at the buffer's rate).
AudioBuffer apply_prefilter(Prefilter p, const AudioBuffer& buf);

struct ObjectiveWeights {
  double stft_mag = 50.0;
  double corr = 10.0;
  double phase = 10.0;
};

struct ObjectiveOptions {
  ObjectiveWeights weights;
  Prefilter prefilter = Prefilter::K;
  PhaseLossConfig phase;
  /// Components that feed the magnitude term and the two phase terms.
  std::vector<StereoComponent> magnitude_components{kAllComponents.begin(), kAllComponents.end()};
  std::vector<StereoComponent> phase_components{kLeftRight.begin(), kLeftRight.end()};
};

struct ComponentTerms {
  StereoComponent component;
  std::optional<double> stft_mag;
  std::optional<double> corr;
  std::optional<double> phase;
};

struct ObjectiveBreakdown {
  double stft_mag = 0.0;
  double corr = 0.0;
  double phase = 0.0;
  double weighted_total = 0.0;
  double lambda_stft_mag = 0.0;
  double lambda_corr = 0.0;
  double lambda_phase = 0.0;
  Prefilter prefilter = Prefilter::None;
  std::vector<ComponentTerms> per_component;
};

/// Reconstruction objective for a stereo pair: magnitude supervised on every
/// M/S/L/R view, correlation and phase losses on L and R only, each averaged
/// over the multi-scale resolutions.
ObjectiveBreakdown composite_objective(const AudioBuffer& ref, const AudioBuffer& rec,
                                       const MultiScaleConfig& cfg,
                                       const ObjectiveOptions& options = {});

/// Compact JSON rendering (full precision) including the per-component terms.
std::string to_json(const ObjectiveBreakdown& b);

}  // namespace earm
