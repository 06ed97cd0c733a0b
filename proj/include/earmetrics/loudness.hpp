#pragma once

#include <cstddef>
#include <vector>

#include "earmetrics/audio.hpp"

namespace earm {

/// BS.1770 gating constants.
inline constexpr double kBlockSeconds = 0.4;
inline constexpr double kBlockOverlap = 0.75;
inline constexpr double kAbsoluteGateLufs = -70.0;
inline constexpr double kRelativeGateLu = -10.0;
inline constexpr double kLoudnessOffset = -0.691;

/// Reported for signals whose peak is below kSilencePeak; keeps dB values finite.
inline constexpr double kSilenceDbtp = -200.0;

struct LoudnessResult {
  /// Integrated loudness, or -infinity when no block passes the absolute gate.
  double lufs_i = 0.0;
  /// Blocks that survive both gates.
  std::size_t gated_block_count = 0;
  /// All 400 ms blocks considered before gating.
  std::size_t ungated_block_count = 0;

  bool is_silent() const;
};

/// EBU R128 / BS.1770 integrated loudness (mode I). Channel weights are 1.0
/// for both L and R. Requires rate >= 8 kHz and at least one 400 ms block.
LoudnessResult integrated_lufs(const AudioBuffer& buf);

struct TruePeakResult {
  double dbtp = kSilenceDbtp;
  std::vector<double> per_channel;
};

/// 4x polyphase windowed-sinc oversampling (48 taps per phase); the peak of
/// the oversampled magnitude in dB, floored at kSilenceDbtp.
TruePeakResult true_peak_dbtp(const AudioBuffer& buf);

/// Highest absolute sample value in dB (no oversampling), same floor.
double sample_peak_db(const AudioBuffer& buf);

/// |dbtp(ref) - dbtp(rec)|.
double dbtp_distance(const AudioBuffer& ref, const AudioBuffer& rec);

}  // namespace earm
