#include "earmetrics/phase.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace earm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_shape(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  if (!a.same_shape(b))
    throw Error("spectrogram shape mismatch: " + std::to_string(a.num_frames()) + "x" +
                std::to_string(a.num_bins()) + " vs " + std::to_string(b.num_frames()) + "x" +
                std::to_string(b.num_bins()));
}

// sum(w * |err|) / (sum(w) + eps), or the plain mean when unweighted.
class ErrorMean {
 public:
  ErrorMean(bool weighted, double eps) : weighted_(weighted), eps_(eps) {}

  void add(double err, double w) {
    if (weighted_) {
      num_ += w * std::abs(err);
      den_ += w;
    } else {
      num_ += std::abs(err);
      den_ += 1.0;
    }
  }

  double value() const {
    if (weighted_) return num_ / (den_ + eps_);
    return den_ > 0.0 ? num_ / den_ : 0.0;
  }

 private:
  bool weighted_;
  double eps_;
  double num_ = 0.0;
  double den_ = 0.0;
};

}  // namespace

PhaseMatrix::PhaseMatrix(RealMatrix values) : m_(std::move(values)) {
  for (double v : m_.values)
    if (!(v > -kPi && v <= kPi)) throw Error("phase value outside (-pi, pi]");
}

double wrap_phase(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

PhaseMatrix phase_of(const ComplexSpectrogram& spec) {
  RealMatrix m(spec.num_frames(), spec.num_bins());
  for (std::size_t t = 0; t < m.rows; ++t)
    for (std::size_t f = 0; f < m.cols; ++f) {
      const Complex z = spec(t, f);
      // arg(-0 + 0i) would be pi; silent bins are pinned to 0.
      m(t, f) = (z.real() == 0.0 && z.imag() == 0.0) ? 0.0 : wrap_phase(std::arg(z));
    }
  return PhaseMatrix(std::move(m));
}

RealMatrix instantaneous_frequency(const PhaseMatrix& phase) {
  if (phase.frames() < 2) throw Error("instantaneous frequency needs at least 2 frames");
  RealMatrix out(phase.frames() - 1, phase.bins());
  for (std::size_t t = 0; t + 1 < phase.frames(); ++t)
    for (std::size_t f = 0; f < phase.bins(); ++f)
      out(t, f) = wrap_phase(phase(t + 1, f) - phase(t, f));
  return out;
}

RealMatrix group_delay(const PhaseMatrix& phase) {
  if (phase.bins() < 2) throw Error("group delay needs at least 2 bins");
  RealMatrix out(phase.frames(), phase.bins() - 1);
  for (std::size_t t = 0; t < phase.frames(); ++t)
    for (std::size_t f = 0; f + 1 < phase.bins(); ++f)
      out(t, f) = wrap_phase(phase(t, f) - phase(t, f + 1));
  return out;
}

void PhaseLossConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
}

double correlation_loss(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                        const PhaseLossConfig& cfg) {
  cfg.validate();
  require_same_shape(ref, rec);
  const auto r = ref.data();
  const auto e = rec.data();
  if (r.empty()) throw Error("empty spectrogram");
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Complex cross = e[i] * std::conj(r[i]);
    acc += cross.real() / (std::abs(e[i]) * std::abs(r[i]) + cfg.epsilon);
  }
  return 1.0 - acc / static_cast<double>(r.size());
}

double phase_loss(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                  const PhaseLossConfig& cfg) {
  cfg.validate();
  require_same_shape(ref, rec);
  if (ref.num_frames() < 2 || ref.num_bins() < 2)
    throw Error("phase loss needs at least 2 frames and 2 bins");

  const PhaseMatrix phi_ref = phase_of(ref);
  const PhaseMatrix phi_rec = phase_of(rec);
  const RealMatrix if_ref = instantaneous_frequency(phi_ref);
  const RealMatrix if_rec = instantaneous_frequency(phi_rec);
  const RealMatrix gd_ref = group_delay(phi_ref);
  const RealMatrix gd_rec = group_delay(phi_rec);

  ErrorMean if_term(cfg.magnitude_weighting, cfg.epsilon);
  for (std::size_t t = 0; t < if_ref.rows; ++t)
    for (std::size_t f = 0; f < if_ref.cols; ++f) {
      const double w = 0.5 * (std::abs(ref(t, f)) + std::abs(ref(t + 1, f)));
      if_term.add(wrap_phase(if_rec(t, f) - if_ref(t, f)), w);
    }

  ErrorMean gd_term(cfg.magnitude_weighting, cfg.epsilon);
  for (std::size_t t = 0; t < gd_ref.rows; ++t)
    for (std::size_t f = 0; f < gd_ref.cols; ++f) {
      const double w = 0.5 * (std::abs(ref(t, f)) + std::abs(ref(t, f + 1)));
      gd_term.add(wrap_phase(gd_rec(t, f) - gd_ref(t, f)), w);
    }

  return if_term.value() + gd_term.value();
}

}  // namespace earm
