#include "earmetrics/loudness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "earmetrics/weighting.hpp"

namespace earm {

namespace {

constexpr int kOversample = 4;
constexpr int kTapsPerPhase = 48;
constexpr double kTruePeakKaiserBeta = 8.0;
constexpr double kSilencePeak = 1e-10;

double to_db(double amplitude) {
  return amplitude < kSilencePeak ? kSilenceDbtp : 20.0 * std::log10(amplitude);
}

// Phase p interpolates at x[n + p/4]; tap k multiplies x[n + k - (kTapsPerPhase/2 - 1)].
using PolyphaseBank = std::array<std::array<double, kTapsPerPhase>, kOversample>;

PolyphaseBank make_bank() {
  PolyphaseBank bank{};
  const double half = kTapsPerPhase / 2.0;
  const double i0 = std::cyl_bessel_i(0.0, kTruePeakKaiserBeta);
  for (int p = 0; p < kOversample; ++p) {
    const double frac = static_cast<double>(p) / kOversample;
    for (int k = 0; k < kTapsPerPhase; ++k) {
      const double t = frac - static_cast<double>(k - (kTapsPerPhase / 2 - 1));
      if (p == 0) {
        bank[p][k] = t == 0.0 ? 1.0 : 0.0;
        continue;
      }
      const double x = std::numbers::pi * t;
      const double r = t / half;
      const double w = std::abs(r) < 1.0
                           ? std::cyl_bessel_i(0.0, kTruePeakKaiserBeta * std::sqrt(1.0 - r * r)) / i0
                           : 0.0;
      bank[p][k] = std::sin(x) / x * w;
    }
  }
  return bank;
}

const PolyphaseBank& bank() {
  static const PolyphaseBank b = make_bank();
  return b;
}

double channel_true_peak(std::span<const double> x) {
  const auto& h = bank();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  constexpr std::ptrdiff_t lead = kTapsPerPhase / 2 - 1;
  double peak = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    peak = std::max(peak, std::abs(x[static_cast<std::size_t>(i)]));
    for (int p = 1; p < kOversample; ++p) {
      double acc = 0.0;
      for (std::ptrdiff_t k = 0; k < kTapsPerPhase; ++k) {
        const std::ptrdiff_t j = i + k - lead;
        if (j >= 0 && j < n) acc += h[p][static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
      }
      peak = std::max(peak, std::abs(acc));
    }
  }
  return peak;
}

}  // namespace

bool LoudnessResult::is_silent() const { return std::isinf(lufs_i) && lufs_i < 0; }

LoudnessResult integrated_lufs(const AudioBuffer& buf) {
  const int rate = buf.sample_rate();
  if (rate < kMinWeightingRate) throw Error("loudness needs rate >= 8000 Hz");
  const auto block = static_cast<std::size_t>(std::llround(kBlockSeconds * rate));
  const auto step = static_cast<std::size_t>(std::llround(kBlockSeconds * (1.0 - kBlockOverlap) * rate));
  const std::size_t n = buf.num_frames();
  if (n < block) throw Error("signal shorter than one 400 ms loudness block");

  const AudioBuffer weighted = apply_cascade(design_k_weighting(rate), buf);

  // Prefix sums of squares give every block's mean square in O(1).
  const std::size_t blocks = 1 + (n - block) / step;
  std::vector<double> power(blocks, 0.0);
  for (std::size_t c = 0; c < weighted.num_channels(); ++c) {
    const auto x = weighted.channel(c);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
    for (std::size_t j = 0; j < blocks; ++j) {
      const std::size_t s = j * step;
      power[j] += (prefix[s + block] - prefix[s]) / static_cast<double>(block);
    }
  }

  auto loudness = [](double p) {
    return p > 0.0 ? kLoudnessOffset + 10.0 * std::log10(p)
                   : -std::numeric_limits<double>::infinity();
  };

  LoudnessResult out;
  out.ungated_block_count = blocks;

  double abs_sum = 0.0;
  std::size_t abs_count = 0;
  for (double p : power)
    if (loudness(p) > kAbsoluteGateLufs) {
      abs_sum += p;
      ++abs_count;
    }
  if (abs_count == 0) {
    out.lufs_i = -std::numeric_limits<double>::infinity();
    return out;
  }

  const double relative_gate = loudness(abs_sum / static_cast<double>(abs_count)) + kRelativeGateLu;
  double sum = 0.0;
  std::size_t count = 0;
  for (double p : power) {
    const double l = loudness(p);
    if (l > kAbsoluteGateLufs && l > relative_gate) {
      sum += p;
      ++count;
    }
  }
  out.gated_block_count = count;
  out.lufs_i = loudness(sum / static_cast<double>(count));
  return out;
}

TruePeakResult true_peak_dbtp(const AudioBuffer& buf) {
  if (buf.num_frames() == 0) throw Error("true peak of an empty signal");
  TruePeakResult out;
  double peak = 0.0;
  for (std::size_t c = 0; c < buf.num_channels(); ++c) {
    const double p = channel_true_peak(buf.channel(c));
    out.per_channel.push_back(to_db(p));
    peak = std::max(peak, p);
  }
  out.dbtp = to_db(peak);
  return out;
}

double sample_peak_db(const AudioBuffer& buf) {
  double peak = 0.0;
  for (std::size_t c = 0; c < buf.num_channels(); ++c)
    for (double v : buf.channel(c)) peak = std::max(peak, std::abs(v));
  return to_db(peak);
}

double dbtp_distance(const AudioBuffer& ref, const AudioBuffer& rec) {
  return std::abs(true_peak_dbtp(ref).dbtp - true_peak_dbtp(rec).dbtp);
}

}  // namespace earm
