#include "earmetrics/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

namespace earm {

MultiScaleConfig MultiScaleConfig::evaluation() { return MultiScaleConfig{}; }

MultiScaleConfig MultiScaleConfig::discriminator() {
  MultiScaleConfig c;
  c.fft_sizes = {2048, 1024, 512, 256, 128};
  return c;
}

void MultiScaleConfig::validate() const {
  if (fft_sizes.empty()) throw Error("at least one fft size is required");
  for (auto n : fft_sizes)
    if (n < 2 || !std::has_single_bit(n))
      throw Error("fft size " + std::to_string(n) + " is not a power of two");
  if (!(hop_ratio > 0.0 && hop_ratio <= 1.0)) throw Error("hop_ratio must be in (0, 1]");
  if (!(log_epsilon > 0.0)) throw Error("log_epsilon must be positive");
  if (!mel_bins.empty() && mel_bins.size() != fft_sizes.size())
    throw Error("mel_bins must list one count per fft size");
}

StftConfig MultiScaleConfig::stft_for(std::size_t fft_size) const {
  StftConfig c;
  c.fft_size = fft_size;
  c.hop = std::max<std::size_t>(1, static_cast<std::size_t>(
                                       std::llround(hop_ratio * static_cast<double>(fft_size))));
  c.window = window;
  c.center_pad = true;
  return c;
}

std::size_t MultiScaleConfig::mel_bins_for(std::size_t scale_index) const {
  if (!mel_bins.empty()) return mel_bins.at(scale_index);
  return std::min<std::size_t>(128, fft_sizes.at(scale_index) / 8);
}

std::size_t MultiScaleConfig::max_fft_size() const {
  return fft_sizes.empty() ? 0 : *std::max_element(fft_sizes.begin(), fft_sizes.end());
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

RealMatrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, int rate) {
  if (n_mels == 0) throw Error("mel filterbank needs at least one band");
  const std::size_t bins = fft_size / 2 + 1;
  const double mel_max = hz_to_mel(rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  RealMatrix fb(n_mels, bins);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (hz > lo && hz <= mid) w = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) w = (hi - hz) / (hi - mid);
      fb(m, k) = w;
    }
  }
  return fb;
}

double log_magnitude_l1(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                        double log_epsilon) {
  if (!ref.same_shape(rec)) throw Error("spectrogram shape mismatch");
  const auto a = ref.data();
  const auto b = rec.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += std::abs(std::log(std::abs(a[i]) + log_epsilon) -
                    std::log(std::abs(b[i]) + log_epsilon));
  return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

namespace {

void check_pair(std::span<const double> ref, std::span<const double> rec,
                const MultiScaleConfig& cfg) {
  cfg.validate();
  if (ref.size() != rec.size())
    throw Error("length mismatch: " + std::to_string(ref.size()) + " vs " +
                std::to_string(rec.size()));
  if (ref.size() < cfg.max_fft_size())
    throw Error("signal shorter than the largest fft size (" + std::to_string(ref.size()) +
                " < " + std::to_string(cfg.max_fft_size()) + ")");
}

RealMatrix mel_magnitudes(const ComplexSpectrogram& spec, const RealMatrix& fb) {
  // Each triangle is nonzero over one contiguous run of bins.
  std::vector<std::pair<std::size_t, std::size_t>> support(fb.rows, {0, 0});
  for (std::size_t m = 0; m < fb.rows; ++m) {
    std::size_t lo = fb.cols, hi = 0;
    for (std::size_t k = 0; k < fb.cols; ++k)
      if (fb(m, k) != 0.0) {
        lo = std::min(lo, k);
        hi = k + 1;
      }
    if (lo < hi) support[m] = {lo, hi};
  }

  RealMatrix out(spec.num_frames(), fb.rows);
  std::vector<double> mag(spec.num_bins());
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    const auto frame = spec.frame(t);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(frame[k]);
    for (std::size_t m = 0; m < fb.rows; ++m) {
      double acc = 0.0;
      for (std::size_t k = support[m].first; k < support[m].second; ++k) acc += fb(m, k) * mag[k];
      out(t, m) = acc;
    }
  }
  return out;
}

}  // namespace

double log_magnitude_distance(std::span<const double> ref, std::span<const double> rec, int rate,
                              const MultiScaleConfig& cfg) {
  check_pair(ref, rec, cfg);
  double total = 0.0;
  for (auto n : cfg.fft_sizes) {
    const StftConfig sc = cfg.stft_for(n);
    total += log_magnitude_l1(stft(ref, sc, rate), stft(rec, sc, rate), cfg.log_epsilon);
  }
  return total / static_cast<double>(cfg.fft_sizes.size());
}

double mel_distance(std::span<const double> ref, std::span<const double> rec, int rate,
                    const MultiScaleConfig& cfg) {
  check_pair(ref, rec, cfg);
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.fft_sizes.size(); ++i) {
    const std::size_t n = cfg.fft_sizes[i];
    const StftConfig sc = cfg.stft_for(n);
    const RealMatrix fb = mel_filterbank(cfg.mel_bins_for(i), n, rate);
    const RealMatrix a = mel_magnitudes(stft(ref, sc, rate), fb);
    const RealMatrix b = mel_magnitudes(stft(rec, sc, rate), fb);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j)
      acc += std::abs(std::log(a.values[j] + cfg.log_epsilon) -
                      std::log(b.values[j] + cfg.log_epsilon));
    total += acc / static_cast<double>(a.values.size());
  }
  return total / static_cast<double>(cfg.fft_sizes.size());
}

std::string_view to_string(Prefilter p) {
  switch (p) {
    case Prefilter::K: return "k";
    case Prefilter::A: return "a";
    case Prefilter::None: break;
  }
  return "none";
}

Prefilter parse_prefilter(std::string_view s) {
  if (s == "k" || s == "K") return Prefilter::K;
  if (s == "a" || s == "A") return Prefilter::A;
  if (s == "none") return Prefilter::None;
  throw Error("unknown prefilter '" + std::string(s) + "' (expected k, a or none)");
}

AudioBuffer apply_prefilter(Prefilter p, const AudioBuffer& buf) {
  switch (p) {
    case Prefilter::K: return apply_cascade(design_k_weighting(buf.sample_rate()), buf);
    case Prefilter::A: return apply_cascade(design_a_weighting(buf.sample_rate()), buf);
    case Prefilter::None: break;
  }
  return buf;
}

ObjectiveBreakdown composite_objective(const AudioBuffer& ref, const AudioBuffer& rec,
                                       const MultiScaleConfig& cfg,
                                       const ObjectiveOptions& options) {
  cfg.validate();
  if (!ref.is_stereo() || !rec.is_stereo()) throw Error("composite objective needs stereo input");
  if (ref.sample_rate() != rec.sample_rate())
    throw Error("rate mismatch: " + std::to_string(ref.sample_rate()) + " vs " +
                std::to_string(rec.sample_rate()));
  if (ref.num_frames() != rec.num_frames()) throw Error("length mismatch");
  if (options.magnitude_components.empty() || options.phase_components.empty())
    throw Error("component sets must be non-empty");

  const int rate = ref.sample_rate();
  const MslrSignals a = split_mslr(apply_prefilter(options.prefilter, ref));
  const MslrSignals b = split_mslr(apply_prefilter(options.prefilter, rec));

  ObjectiveBreakdown out;
  out.prefilter = options.prefilter;
  out.lambda_stft_mag = options.weights.stft_mag;
  out.lambda_corr = options.weights.corr;
  out.lambda_phase = options.weights.phase;

  auto entry = [&](StereoComponent c) -> ComponentTerms& {
    for (auto& e : out.per_component)
      if (e.component == c) return e;
    out.per_component.push_back(ComponentTerms{c, {}, {}, {}});
    return out.per_component.back();
  };

  for (auto c : options.magnitude_components) {
    const double d = log_magnitude_distance(a.get(c), b.get(c), rate, cfg);
    entry(c).stft_mag = d;
    out.stft_mag += d;
  }
  out.stft_mag /= static_cast<double>(options.magnitude_components.size());

  for (auto c : options.phase_components) {
    double corr = 0.0, phase = 0.0;
    for (auto n : cfg.fft_sizes) {
      const StftConfig sc = cfg.stft_for(n);
      const ComplexSpectrogram sa = stft(a.get(c), sc, rate);
      const ComplexSpectrogram sb = stft(b.get(c), sc, rate);
      corr += correlation_loss(sa, sb, options.phase);
      phase += phase_loss(sa, sb, options.phase);
    }
    const double scales = static_cast<double>(cfg.fft_sizes.size());
    entry(c).corr = corr / scales;
    entry(c).phase = phase / scales;
    out.corr += corr / scales;
    out.phase += phase / scales;
  }
  const double pc = static_cast<double>(options.phase_components.size());
  out.corr /= pc;
  out.phase /= pc;

  out.weighted_total = out.lambda_stft_mag * out.stft_mag + out.lambda_corr * out.corr +
                       out.lambda_phase * out.phase;
  return out;
}

std::string to_json(const ObjectiveBreakdown& b) {
  nlohmann::ordered_json j;
  j["stft_mag"] = b.stft_mag;
  j["corr"] = b.corr;
  j["phase"] = b.phase;
  j["weighted_total"] = b.weighted_total;
  j["lambda_stft_mag"] = b.lambda_stft_mag;
  j["lambda_corr"] = b.lambda_corr;
  j["lambda_phase"] = b.lambda_phase;
  j["prefilter"] = std::string(to_string(b.prefilter));
  auto& comps = j["components"] = nlohmann::ordered_json::object();
  for (const auto& c : b.per_component) {
    nlohmann::ordered_json e = nlohmann::ordered_json::object();
    if (c.stft_mag) e["stft_mag"] = *c.stft_mag;
    if (c.corr) e["corr"] = *c.corr;
    if (c.phase) e["phase"] = *c.phase;
    comps[std::string(to_string(c.component))] = e;
  }
  return j.dump();
}

}  // namespace earm
