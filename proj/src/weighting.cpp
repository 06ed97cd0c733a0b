#include "earmetrics/weighting.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace earm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_rate(int rate) {
  if (rate < kMinWeightingRate)
    throw Error("weighting filters need rate >= " + std::to_string(kMinWeightingRate) +
                " Hz, got " + std::to_string(rate));
}

// Bilinear transform of a second-order analog section
// (B0 s^2 + B1 s + B2) / (A0 s^2 + A1 s + A2) with s = c (1 - z^-1) / (1 + z^-1).
BiquadSection bilinear(double B0, double B1, double B2, double A0, double A1, double A2,
                       double c) {
  const double c2 = c * c;
  const double a0 = A0 * c2 + A1 * c + A2;
  BiquadSection s;
  s.b0 = (B0 * c2 + B1 * c + B2) / a0;
  s.b1 = 2.0 * (B2 - B0 * c2) / a0;
  s.b2 = (B0 * c2 - B1 * c + B2) / a0;
  s.a1 = 2.0 * (A2 - A0 * c2) / a0;
  s.a2 = (A0 * c2 - A1 * c + A2) / a0;
  return s;
}

// Bilinear constant that maps analog frequency f_match onto itself.
double prewarped_constant(double f_match, double rate) {
  const double w = 2.0 * kPi * f_match;
  return w / std::tan(w / (2.0 * rate));
}

}  // namespace

bool BiquadSection::is_stable() const {
  // Jury criterion for 1 + a1 z^-1 + a2 z^-2.
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

std::complex<double> BiquadSection::response(double omega) const {
  const std::complex<double> z1 = std::polar(1.0, -omega);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

std::string_view to_string(WeightingCurve curve) {
  return curve == WeightingCurve::KWeighting ? "k" : "a";
}

BiquadCascade::BiquadCascade(std::vector<BiquadSection> sections, int design_rate,
                             WeightingCurve label)
    : sections_(std::move(sections)), design_rate_(design_rate), label_(label) {
  for (const auto& s : sections_)
    if (!s.is_stable()) throw Error("unstable biquad section");
}

std::complex<double> BiquadCascade::response(double hz) const {
  const double omega = 2.0 * kPi * hz / design_rate_;
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) h *= s.response(omega);
  return h;
}

double BiquadCascade::magnitude_db(double hz) const {
  return 20.0 * std::log10(std::abs(response(hz)));
}

BiquadCascade design_k_weighting(int rate) {
  check_rate(rate);
  const double fs = rate;

  // Stage 1: high-frequency shelf (+4 dB).
  BiquadSection shelf;
  {
    const double f0 = 1681.974450955533;
    const double gain_db = 3.999843853973347;
    const double q = 0.7071752369554196;
    const double k = std::tan(kPi * f0 / fs);
    const double vh = std::pow(10.0, gain_db / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + k / q + k * k;
    shelf.b0 = (vh + vb * k / q + k * k) / a0;
    shelf.b1 = 2.0 * (k * k - vh) / a0;
    shelf.b2 = (vh - vb * k / q + k * k) / a0;
    shelf.a1 = 2.0 * (k * k - 1.0) / a0;
    shelf.a2 = (1.0 - k / q + k * k) / a0;
  }

  // Stage 2: RLB high-pass. The published table keeps b = (1, -2, 1).
  BiquadSection highpass;
  {
    const double f0 = 38.13547087602444;
    const double q = 0.5003270373238773;
    const double k = std::tan(kPi * f0 / fs);
    const double a0 = 1.0 + k / q + k * k;
    highpass.b0 = 1.0;
    highpass.b1 = -2.0;
    highpass.b2 = 1.0;
    highpass.a1 = 2.0 * (k * k - 1.0) / a0;
    highpass.a2 = (1.0 - k / q + k * k) / a0;
  }

  return BiquadCascade({shelf, highpass}, rate, WeightingCurve::KWeighting);
}

BiquadCascade design_a_weighting(int rate) {
  check_rate(rate);
  const double fs = rate;
  const double w1 = 2.0 * kPi * 20.598997;
  const double w2 = 2.0 * kPi * 107.65265;
  const double w3 = 2.0 * kPi * 737.86223;
  const double w4 = 2.0 * kPi * 12194.217;

  // The low poles sit far below Nyquist and use the plain transform. The
  // 12.2 kHz pair is pre-warped so the digital curve tracks the analog one up
  // to 10 kHz (or 0.4 fs at low rates) instead of sagging toward Nyquist.
  const double c_plain = 2.0 * fs;
  const double c_high = prewarped_constant(std::min(10000.0, 0.4 * fs), fs);

  std::vector<BiquadSection> sections;
  sections.push_back(bilinear(1, 0, 0, 1, 2 * w1, w1 * w1, c_plain));            // s^2/(s+w1)^2
  sections.push_back(bilinear(1, 0, 0, 1, w2 + w3, w2 * w3, c_plain));           // s^2/((s+w2)(s+w3))
  sections.push_back(bilinear(0, 0, w4 * w4, 1, 2 * w4, w4 * w4, c_high));       // w4^2/(s+w4)^2

  BiquadCascade unnormalised(sections, rate, WeightingCurve::AWeighting);
  const double g = 1.0 / std::abs(unnormalised.response(1000.0));
  sections.front().b0 *= g;
  sections.front().b1 *= g;
  sections.front().b2 *= g;
  return BiquadCascade(std::move(sections), rate, WeightingCurve::AWeighting);
}

Samples apply_cascade(const BiquadCascade& filter, std::span<const double> x) {
  Samples y(x.begin(), x.end());
  for (const auto& s : filter.sections()) {
    double z1 = 0.0, z2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

AudioBuffer apply_cascade(const BiquadCascade& filter, const AudioBuffer& buf) {
  if (buf.sample_rate() != filter.design_rate())
    throw Error("rate mismatch: filter designed for " + std::to_string(filter.design_rate()) +
                " Hz, signal is " + std::to_string(buf.sample_rate()) + " Hz");
  std::vector<Samples> out;
  for (std::size_t c = 0; c < buf.num_channels(); ++c)
    out.push_back(apply_cascade(filter, buf.channel(c)));
  return AudioBuffer(std::move(out), buf.sample_rate());
}

}  // namespace earm
