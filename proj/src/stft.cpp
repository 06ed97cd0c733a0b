#include "earmetrics/stft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace earm {

StftConfig StftConfig::with_default_hop(std::size_t fft_size, bool center_pad) {
  StftConfig c;
  c.fft_size = fft_size;
  c.hop = fft_size / 4;
  c.center_pad = center_pad;
  return c;
}

void StftConfig::validate() const {
  if (fft_size < 2 || !std::has_single_bit(fft_size))
    throw Error("fft_size must be a power of two >= 2, got " + std::to_string(fft_size));
  const std::size_t h = effective_hop();
  if (h == 0 || h > fft_size) throw Error("hop must satisfy 0 < hop <= fft_size");
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

ComplexSpectrogram::ComplexSpectrogram(std::size_t frames, StftConfig config, int source_rate)
    : frames_(frames),
      config_(config),
      source_rate_(source_rate),
      bins_(frames * config.num_bins()) {}

std::size_t stft_frame_count(std::size_t length, const StftConfig& config) {
  const std::size_t n = config.fft_size;
  const std::size_t padded = config.center_pad ? length + n : length;
  if (padded < n) return 0;
  return 1 + (padded - n) / config.effective_hop();
}

ComplexSpectrogram stft(std::span<const double> channel, const StftConfig& config, int rate) {
  config.validate();
  const std::size_t n = config.fft_size;
  const std::size_t hop = config.effective_hop();
  const std::size_t len = channel.size();
  if (config.center_pad ? len <= n / 2 : len < n)
    throw Error("signal too short for fft_size " + std::to_string(n) + " (" +
                std::to_string(len) + " samples)");

  std::vector<double> padded;
  std::span<const double> src = channel;
  if (config.center_pad) {
    const std::size_t pad = n / 2;
    padded.resize(len + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) {
      padded[i] = channel[pad - i];
      padded[pad + len + i] = channel[len - 2 - i];
    }
    std::copy(channel.begin(), channel.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
    src = padded;
  }

  const auto window = hann_window(n);
  const std::size_t frames = stft_frame_count(len, config);
  StftConfig stored = config;
  stored.hop = hop;
  ComplexSpectrogram spec(frames, stored, rate);
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) buf[i] = src[start + i] * window[i];
    detail::rfft(buf, spec.frame(t));
  }
  return spec;
}

Samples istft(const ComplexSpectrogram& spec, std::optional<std::size_t> length) {
  const StftConfig& config = spec.config();
  config.validate();
  const std::size_t n = config.fft_size;
  const std::size_t hop = config.effective_hop();
  if (hop > n / 2) throw Error("COLA violation: Hann window needs hop <= fft_size / 2");

  const std::size_t frames = spec.num_frames();
  const std::size_t total = frames == 0 ? 0 : n + hop * (frames - 1);
  const auto window = hann_window(n);
  std::vector<double> acc(total, 0.0);
  std::vector<double> norm(total, 0.0);
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < frames; ++t) {
    detail::irfft(spec.frame(t), buf);
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[start + i] += buf[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < total; ++i)
    if (norm[i] > 1e-11) acc[i] /= norm[i];

  const std::size_t offset = config.center_pad ? n / 2 : 0;
  const std::size_t natural = total > 2 * offset ? total - 2 * offset : 0;
  const std::size_t out_len = length.value_or(natural);
  Samples out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len && offset + i < total; ++i) out[i] = acc[offset + i];
  return out;
}

}  // namespace earm
