#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace earm {

/// Raised for any contract violation in the library (bad shapes, rates, formats).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Samples = std::vector<double>;

/// Multichannel PCM at a fixed sample rate. Nominal full scale is +-1.0;
/// values beyond that are kept so inter-sample overs survive round trips.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<Samples> channels, int sample_rate);

  static AudioBuffer mono(Samples samples, int sample_rate);
  static AudioBuffer stereo(Samples left, Samples right, int sample_rate);

  int sample_rate() const { return sample_rate_; }
  std::size_t num_channels() const { return channels_.size(); }
  std::size_t num_frames() const { return channels_.empty() ? 0 : channels_.front().size(); }
  bool is_stereo() const { return channels_.size() == 2; }
  double duration_seconds() const {
    return sample_rate_ > 0 ? static_cast<double>(num_frames()) / sample_rate_ : 0.0;
  }

  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  const std::vector<Samples>& channels() const { return channels_; }

  /// Returns a copy with every sample multiplied by `gain`.
  AudioBuffer scaled(double gain) const;
  /// Returns the first `frames` frames (or the whole buffer if shorter).
  AudioBuffer truncated(std::size_t frames) const;
  /// Frames [begin, begin + count), clamped to the buffer length.
  AudioBuffer slice(std::size_t begin, std::size_t count) const;
  /// Mono is duplicated into two identical channels; stereo is returned as is.
  AudioBuffer as_stereo() const;

 private:
  std::vector<Samples> channels_;
  int sample_rate_ = 0;
};

enum class WavEncoding { Pcm16, Pcm24, Pcm32, Float32 };

/// Reads PCM 8/16/24/32-bit or IEEE float 32/64-bit WAV (including
/// WAVE_FORMAT_EXTENSIBLE). Integer formats are scaled by 1/2^(bits-1).
AudioBuffer load_wav(const std::filesystem::path& path);

/// Writes a little-endian RIFF/WAVE file. Integer encodings clip to full scale.
void save_wav(const std::filesystem::path& path, const AudioBuffer& buf,
              WavEncoding encoding = WavEncoding::Float32);

/// Band-limited windowed-sinc sample-rate conversion. The output length is
/// round(frames * target_rate / source_rate). Equal rates return a copy.
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

}  // namespace earm
