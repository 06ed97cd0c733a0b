#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include "earmetrics/audio.hpp"

namespace earm {

/// Second-order section with a0 normalised to 1:
/// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct BiquadSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// True when both poles lie strictly inside the unit circle.
  bool is_stable() const;
  std::complex<double> response(double omega) const;
};

enum class WeightingCurve { KWeighting, AWeighting };

std::string_view to_string(WeightingCurve curve);

/// Ordered chain of biquads designed for one sample rate.
class BiquadCascade {
 public:
  BiquadCascade(std::vector<BiquadSection> sections, int design_rate, WeightingCurve label);

  const std::vector<BiquadSection>& sections() const { return sections_; }
  int design_rate() const { return design_rate_; }
  WeightingCurve label() const { return label_; }

  /// Complex frequency response at `hz`.
  std::complex<double> response(double hz) const;
  double magnitude_db(double hz) const;

 private:
  std::vector<BiquadSection> sections_;
  int design_rate_;
  WeightingCurve label_;
};

constexpr int kMinWeightingRate = 8000;

/// ITU-R BS.1770 K-weighting: high-shelf stage followed by the RLB
/// high-pass, both derived from their analog prototypes with pre-warped
/// bilinear transforms. At 48 kHz this reproduces the published table.
BiquadCascade design_k_weighting(int rate);

/// IEC 61672 A-weighting, unity gain at 1 kHz.
BiquadCascade design_a_weighting(int rate);

/// Runs each channel through every section in order (transposed direct
/// form II, zero initial state). Throws if the rates differ.
AudioBuffer apply_cascade(const BiquadCascade& filter, const AudioBuffer& buf);

/// Single-channel variant of apply_cascade.
Samples apply_cascade(const BiquadCascade& filter, std::span<const double> x);

}  // namespace earm
