#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "earmetrics/audio.hpp"

namespace earm {

using Complex = std::complex<double>;

enum class Window { Hann };

/// Analysis parameters. `hop == 0` means "use the default of fft_size / 4".
struct StftConfig {
  std::size_t fft_size = 2048;
  std::size_t hop = 0;
  Window window = Window::Hann;
  bool center_pad = true;

  static StftConfig with_default_hop(std::size_t fft_size, bool center_pad = true);

  std::size_t effective_hop() const { return hop == 0 ? fft_size / 4 : hop; }
  std::size_t num_bins() const { return fft_size / 2 + 1; }
  /// Throws if fft_size is not a power of two or the hop is out of (0, fft_size].
  void validate() const;
  bool operator==(const StftConfig&) const = default;
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// One-sided STFT, stored frame-major: element (t, f) at t * num_bins + f.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t frames, StftConfig config, int source_rate);

  std::size_t num_frames() const { return frames_; }
  std::size_t num_bins() const { return config_.num_bins(); }
  const StftConfig& config() const { return config_; }
  int source_rate() const { return source_rate_; }

  Complex& operator()(std::size_t t, std::size_t f) { return bins_[t * num_bins() + f]; }
  const Complex& operator()(std::size_t t, std::size_t f) const {
    return bins_[t * num_bins() + f];
  }
  std::span<Complex> frame(std::size_t t) { return {bins_.data() + t * num_bins(), num_bins()}; }
  std::span<const Complex> frame(std::size_t t) const {
    return {bins_.data() + t * num_bins(), num_bins()};
  }
  std::span<const Complex> data() const { return bins_; }
  std::span<Complex> data() { return bins_; }

  bool same_shape(const ComplexSpectrogram& other) const {
    return frames_ == other.frames_ && num_bins() == other.num_bins();
  }

 private:
  std::size_t frames_ = 0;
  StftConfig config_;
  int source_rate_ = 0;
  std::vector<Complex> bins_;
};

/// Number of frames stft() produces for a signal of `length` samples.
std::size_t stft_frame_count(std::size_t length, const StftConfig& config);

/// Hann-windowed one-sided STFT. With center_pad, fft_size/2 samples of
/// reflective padding are added on both sides, so frame t is centred on
/// sample t * hop.
ComplexSpectrogram stft(std::span<const double> channel, const StftConfig& config, int rate);

/// Weighted overlap-add inverse (window-square normalisation). The centre
/// padding is trimmed; `length` pads with zeros or truncates the result.
Samples istft(const ComplexSpectrogram& spec, std::optional<std::size_t> length = std::nullopt);

}  // namespace earm
