#include "earmetrics/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <nlohmann/json.hpp>

#include "earmetrics/loudness.hpp"
#include "earmetrics/phase.hpp"

namespace earm {

namespace {

// Accumulates the per-frame mean resultant length and its energy weighting.
class ResultantAverage {
 public:
  explicit ResultantAverage(double eps) : eps_(eps) {}

  void begin_frame() { frame_sum_ = {0.0, 0.0}, frame_weight_ = 0.0; }
  void add(double weight, double angle) {
    frame_sum_ += std::polar(weight, angle);
    frame_weight_ += weight;
  }
  void end_frame() {
    const double c_t = std::abs(frame_sum_) / (frame_weight_ + eps_);
    num_ += c_t * frame_weight_;
    den_ += frame_weight_;
  }

  CoherenceScore score() const {
    if (den_ < eps_) return {100.0, true};
    return {std::clamp(100.0 * num_ / (den_ + eps_), 0.0, 100.0), false};
  }

 private:
  double eps_;
  Complex frame_sum_;
  double frame_weight_ = 0.0;
  double num_ = 0.0;
  double den_ = 0.0;
};

CoherenceScore mean_score(const std::vector<CoherenceScore>& scores) {
  CoherenceScore out{0.0, false};
  for (const auto& s : scores) {
    out.percent += s.percent;
    out.degenerate = out.degenerate || s.degenerate;
  }
  out.percent /= static_cast<double>(scores.size());
  return out;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b)
    throw Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

void CoherenceConfig::validate() const {
  stft.validate();
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
}

CoherenceScore icpc(const ComplexSpectrogram& ref, const ComplexSpectrogram& rec,
                    const CoherenceConfig& cfg) {
  cfg.validate();
  if (!ref.same_shape(rec)) throw Error("spectrogram shape mismatch");
  const PhaseMatrix phi_ref = phase_of(ref);
  const PhaseMatrix phi_rec = phase_of(rec);
  ResultantAverage avg(cfg.epsilon);
  for (std::size_t t = 0; t < ref.num_frames(); ++t) {
    avg.begin_frame();
    for (std::size_t f = 0; f < ref.num_bins(); ++f) {
      const double a = std::abs(ref(t, f));
      const double w = cfg.weight_mode == WeightMode::Product ? a * std::abs(rec(t, f)) : a * a;
      avg.add(w, wrap_phase(phi_rec(t, f) - phi_ref(t, f)));
    }
    avg.end_frame();
  }
  return avg.score();
}

CoherenceScore icpc(std::span<const double> ref, std::span<const double> rec, int rate,
                    const CoherenceConfig& cfg) {
  check_lengths(ref.size(), rec.size());
  return icpc(stft(ref, cfg.stft, rate), stft(rec, cfg.stft, rate), cfg);
}

CoherenceScore icpc(const AudioBuffer& ref, const AudioBuffer& rec, const CoherenceConfig& cfg) {
  if (ref.num_channels() != rec.num_channels()) throw Error("channel count mismatch");
  std::vector<CoherenceScore> scores;
  for (std::size_t c = 0; c < ref.num_channels(); ++c)
    scores.push_back(icpc(ref.channel(c), rec.channel(c), ref.sample_rate(), cfg));
  return mean_score(scores);
}

CoherenceScore ccpc(const ComplexSpectrogram& ref_l, const ComplexSpectrogram& ref_r,
                    const ComplexSpectrogram& rec_l, const ComplexSpectrogram& rec_r,
                    const CoherenceConfig& cfg) {
  cfg.validate();
  if (!ref_l.same_shape(ref_r) || !ref_l.same_shape(rec_l) || !ref_l.same_shape(rec_r))
    throw Error("spectrogram shape mismatch");
  const PhaseMatrix pl_ref = phase_of(ref_l), pr_ref = phase_of(ref_r);
  const PhaseMatrix pl_rec = phase_of(rec_l), pr_rec = phase_of(rec_r);
  ResultantAverage avg(cfg.epsilon);
  for (std::size_t t = 0; t < ref_l.num_frames(); ++t) {
    avg.begin_frame();
    for (std::size_t f = 0; f < ref_l.num_bins(); ++f) {
      const double ref_mag = std::abs(ref_l(t, f)) * std::abs(ref_r(t, f));
      const double w = cfg.weight_mode == WeightMode::Product
                           ? std::sqrt(ref_mag * std::abs(rec_l(t, f)) * std::abs(rec_r(t, f)))
                           : ref_mag;
      const double ipd_ref = wrap_phase(pl_ref(t, f) - pr_ref(t, f));
      const double ipd_rec = wrap_phase(pl_rec(t, f) - pr_rec(t, f));
      avg.add(w, wrap_phase(ipd_rec - ipd_ref));
    }
    avg.end_frame();
  }
  return avg.score();
}

CoherenceScore ccpc(const AudioBuffer& ref, const AudioBuffer& rec, const CoherenceConfig& cfg) {
  if (!ref.is_stereo() || !rec.is_stereo()) throw Error("CCPC needs stereo input");
  check_lengths(ref.num_frames(), rec.num_frames());
  const int rate = ref.sample_rate();
  return ccpc(stft(ref.channel(0), cfg.stft, rate), stft(ref.channel(1), cfg.stft, rate),
              stft(rec.channel(0), cfg.stft, rate), stft(rec.channel(1), cfg.stft, rate), cfg);
}

double si_sdr(std::span<const double> ref, std::span<const double> rec) {
  check_lengths(ref.size(), rec.size());
  double ref_energy = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref_energy += ref[i] * ref[i];
    cross += ref[i] * rec[i];
  }
  if (ref_energy == 0.0) throw Error("SI-SDR undefined for an all-zero reference");
  const double alpha = cross / ref_energy;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * ref[i];
    const double e = s - rec[i];
    target += s * s;
    noise += e * e;
  }
  if (noise == 0.0) return target == 0.0 ? -kSiSdrCapDb : kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / noise), -kSiSdrCapDb, kSiSdrCapDb);
}

// ---------------------------------------------------------------------------

AlignedPair align_pair(const AudioBuffer& ref_in, const AudioBuffer& rec_in) {
  AlignedPair out{ref_in, rec_in};
  if (out.rec.sample_rate() != out.ref.sample_rate()) {
    out.rec = resample(out.rec, out.ref.sample_rate());
    out.resampled = true;
  }
  if (!out.ref.is_stereo() || !out.rec.is_stereo()) {
    out.mono_duplicated = true;
    out.ref = out.ref.as_stereo();
    out.rec = out.rec.as_stereo();
  }
  const std::size_t frames = std::min(out.ref.num_frames(), out.rec.num_frames());
  if (frames == 0) throw Error("empty overlap between reference and reconstruction");
  if (out.ref.num_frames() != out.rec.num_frames()) {
    out.truncated = true;
    out.ref = out.ref.truncated(frames);
    out.rec = out.rec.truncated(frames);
  }
  return out;
}

MetricReport evaluate_pair(const AudioBuffer& ref_in, const AudioBuffer& rec_in,
                           const EvalConfig& cfg, std::string ref_id, std::string rec_id) {
  cfg.multiscale.validate();
  cfg.coherence.validate();

  MetricReport report;
  report.ref_id = std::move(ref_id);
  report.rec_id = std::move(rec_id);
  report.config = cfg;

  AlignedPair aligned = align_pair(ref_in, rec_in);
  report.mono_duplicated = aligned.mono_duplicated;
  report.truncated = aligned.truncated;
  report.resampled = aligned.resampled;
  const AudioBuffer& ref = aligned.ref;
  const AudioBuffer& rec = aligned.rec;
  const std::size_t frames = ref.num_frames();
  report.sample_rate = ref.sample_rate();
  report.frames = frames;

  // True peak is a level measurement on the signals as delivered.
  auto dbtp = std::async(std::launch::async, [&] { return dbtp_distance(ref, rec); });

  const AudioBuffer fref = apply_prefilter(cfg.prefilter, ref);
  const AudioBuffer frec = apply_prefilter(cfg.prefilter, rec);
  const int rate = fref.sample_rate();

  std::vector<std::future<double>> mel, mag;
  for (std::size_t c = 0; c < 2; ++c) {
    mel.push_back(std::async(std::launch::async, [&, c] {
      return mel_distance(fref.channel(c), frec.channel(c), rate, cfg.multiscale);
    }));
    mag.push_back(std::async(std::launch::async, [&, c] {
      return log_magnitude_distance(fref.channel(c), frec.channel(c), rate, cfg.multiscale);
    }));
  }
  auto icpc_score = std::async(std::launch::async, [&] { return icpc(fref, frec, cfg.coherence); });
  auto ccpc_score = std::async(std::launch::async, [&] { return ccpc(fref, frec, cfg.coherence); });

  double sdr_sum = 0.0;
  std::size_t sdr_channels = 0;
  bool rec_silent = true;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto r = fref.channel(c);
    const auto e = frec.channel(c);
    rec_silent = rec_silent && std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
    if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) continue;
    sdr_sum += si_sdr(r, e);
    ++sdr_channels;
  }
  if (sdr_channels < 2) report.zero_reference = true;
  if (sdr_channels > 0) {
    report.si_sdr_db = sdr_sum / static_cast<double>(sdr_channels);
  } else {
    // Silent reference: silent reconstruction is perfect, anything else is not.
    report.si_sdr_db = rec_silent ? kSiSdrCapDb : -kSiSdrCapDb;
  }

  report.mel_dist = (mel[0].get() + mel[1].get()) / 2.0;
  report.stft_dist = (mag[0].get() + mag[1].get()) / 2.0;
  const CoherenceScore ic = icpc_score.get();
  const CoherenceScore cc = ccpc_score.get();
  report.icpc_percent = ic.percent;
  report.icpc_degenerate = ic.degenerate;
  report.ccpc_percent = cc.percent;
  report.ccpc_degenerate = cc.degenerate;
  report.dbtp_dist = dbtp.get();
  return report;
}

MetricReport evaluate_chunked(const AudioBuffer& ref_in, const AudioBuffer& rec_in,
                              double chunk_seconds, const EvalConfig& cfg, std::string ref_id,
                              std::string rec_id) {
  if (!(chunk_seconds > 0.0)) throw Error("chunk length must be positive");
  const AlignedPair aligned = align_pair(ref_in, rec_in);
  const std::size_t total = aligned.ref.num_frames();
  const std::size_t min_frames = cfg.multiscale.max_fft_size();
  const auto chunk = std::max<std::size_t>(
      min_frames,
      static_cast<std::size_t>(std::llround(chunk_seconds * aligned.ref.sample_rate())));

  std::vector<MetricReport> parts;
  std::size_t begin = 0;
  while (begin < total) {
    std::size_t count = std::min(chunk, total - begin);
    if (total - (begin + count) < min_frames) count = total - begin;
    parts.push_back(evaluate_pair(aligned.ref.slice(begin, count), aligned.rec.slice(begin, count),
                                  cfg, ref_id, rec_id));
    begin += count;
  }
  MetricReport out = average_reports(parts);
  out.mono_duplicated = out.mono_duplicated || aligned.mono_duplicated;
  out.truncated = out.truncated || aligned.truncated;
  out.resampled = out.resampled || aligned.resampled;
  return out;
}

MetricReport average_reports(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw Error("no reports to average");
  MetricReport out = reports.front();
  out.mel_dist = out.stft_dist = out.icpc_percent = out.ccpc_percent = out.si_sdr_db =
      out.dbtp_dist = 0.0;
  out.frames = 0;
  for (const auto& r : reports) {
    out.mel_dist += r.mel_dist;
    out.stft_dist += r.stft_dist;
    out.icpc_percent += r.icpc_percent;
    out.ccpc_percent += r.ccpc_percent;
    out.si_sdr_db += r.si_sdr_db;
    out.dbtp_dist += r.dbtp_dist;
    out.frames += r.frames;
    out.mono_duplicated = out.mono_duplicated || r.mono_duplicated;
    out.truncated = out.truncated || r.truncated;
    out.resampled = out.resampled || r.resampled;
    out.icpc_degenerate = out.icpc_degenerate || r.icpc_degenerate;
    out.ccpc_degenerate = out.ccpc_degenerate || r.ccpc_degenerate;
    out.zero_reference = out.zero_reference || r.zero_reference;
  }
  const double n = static_cast<double>(reports.size());
  out.mel_dist /= n;
  out.stft_dist /= n;
  out.icpc_percent /= n;
  out.ccpc_percent /= n;
  out.si_sdr_db /= n;
  out.dbtp_dist /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation

std::string format_fixed2(double v) {
  if (!std::isfinite(v)) return "null";
  const double r = std::round(v * 100.0) / 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", r == 0.0 ? 0.0 : r);
  return buf;
}

namespace {

const char* weight_mode_name(WeightMode m) {
  return m == WeightMode::Product ? "product" : "reference_energy";
}

nlohmann::ordered_json report_tail(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["ref"] = r.ref_id;
  j["rec"] = r.rec_id;
  j["sample_rate"] = r.sample_rate;
  j["frames"] = r.frames;
  const auto& ms = r.config.multiscale;
  j["config"] = {
      {"fft_sizes", ms.fft_sizes},
      {"hop_ratio", ms.hop_ratio},
      {"log_epsilon", ms.log_epsilon},
      {"prefilter", std::string(to_string(r.config.prefilter))},
      {"coherence",
       {{"fft_size", r.config.coherence.stft.fft_size},
        {"hop", r.config.coherence.stft.effective_hop()},
        {"epsilon", r.config.coherence.epsilon},
        {"weight_mode", weight_mode_name(r.config.coherence.weight_mode)}}},
  };
  j["flags"] = {
      {"mono_duplicated", r.mono_duplicated}, {"truncated", r.truncated},
      {"resampled", r.resampled},             {"icpc_degenerate", r.icpc_degenerate},
      {"ccpc_degenerate", r.ccpc_degenerate}, {"zero_reference", r.zero_reference},
  };
  return j;
}

}  // namespace

std::string to_json(const MetricReport& r) {
  std::string out = "{\"mel_dist\":" + format_fixed2(r.mel_dist) +
                    ",\"stft_dist\":" + format_fixed2(r.stft_dist) +
                    ",\"icpc_percent\":" + format_fixed2(r.icpc_percent) +
                    ",\"ccpc_percent\":" + format_fixed2(r.ccpc_percent) +
                    ",\"si_sdr_db\":" + format_fixed2(r.si_sdr_db) +
                    ",\"dbtp_dist\":" + format_fixed2(r.dbtp_dist);
  const std::string tail = report_tail(r).dump();
  // tail is "{...}"; splice its members after the metrics.
  out += ',';
  out.append(tail, 1, std::string::npos);
  return out;
}

std::string csv_header() {
  return "mel_dist,stft_dist,icpc_percent,ccpc_percent,si_sdr_db,dbtp_dist,ref,rec";
}

std::string to_csv_row(const MetricReport& r) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  return format_fixed2(r.mel_dist) + "," + format_fixed2(r.stft_dist) + "," +
         format_fixed2(r.icpc_percent) + "," + format_fixed2(r.ccpc_percent) + "," +
         format_fixed2(r.si_sdr_db) + "," + format_fixed2(r.dbtp_dist) + "," + quote(r.ref_id) +
         "," + quote(r.rec_id);
}

}  // namespace earm
