#pragma once

#include <cstddef>
#include <vector>

#include "earmetrics/stft.hpp"

namespace earm {

/// Dense row-major real matrix [rows x cols].
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Phase in radians, [frames x bins], every entry in (-pi, pi].
class PhaseMatrix {
 public:
  explicit PhaseMatrix(RealMatrix values);

  std::size_t frames() const { return m_.rows; }
  std::size_t bins() const { return m_.cols; }
  double operator()(std::size_t t, std::size_t f) const { return m_(t, f); }
  const RealMatrix& matrix() const { return m_; }

 private:
  RealMatrix m_;
};

/// Maps any finite angle to (-pi, pi]; -pi itself maps to +pi.
double wrap_phase(double x);

/// arg(S) per bin; exactly-zero bins get phase 0.
PhaseMatrix phase_of(const ComplexSpectrogram& spec);

/// wrap(phi[t+1] - phi[t]), shape [frames-1 x bins].
RealMatrix instantaneous_frequency(const PhaseMatrix& phase);

/// Negated wrapped forward difference along frequency, shape [frames x bins-1].
/// Computed as wrap(phi[f] - phi[f+1]) so entries stay in (-pi, pi].
RealMatrix group_delay(const PhaseMatrix& phase);

struct PhaseLossConfig {
  double epsilon = 1e-8;
  /// Weight each derivative error by the mean |S_ref| of the two bins it spans.
  bool magnitude_weighting = true;

  void validate() const;
};

/// 1 - mean Re(rec conj(ref) / (|rec||ref| + eps)); the mean of
/// 1 - cos(phase error) over all bins, in [0, 2].
double correlation_loss(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                        const PhaseLossConfig& cfg = {});

/// mean|wrap(IF_rec - IF_ref)| + mean|wrap(GD_rec - GD_ref)|, optionally
/// magnitude-weighted. Result in [0, 2 pi].
double phase_loss(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                  const PhaseLossConfig& cfg = {});

}  // namespace earm
