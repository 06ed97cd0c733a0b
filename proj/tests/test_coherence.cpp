#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <nlohmann/json.hpp>

#include "earmetrics/coherence.hpp"
#include "earmetrics/stereo.hpp"
#include "oracle.hpp"

using namespace earm;
using oracle::kPi;

namespace {

oracle::Grid to_grid(const ComplexSpectrogram& s) {
  oracle::Grid g(s.num_frames(), std::vector<oracle::cd>(s.num_bins()));
  for (std::size_t t = 0; t < s.num_frames(); ++t)
    for (std::size_t f = 0; f < s.num_bins(); ++f) g[t][f] = s(t, f);
  return g;
}

ComplexSpectrogram rotated(const ComplexSpectrogram& s, const std::function<double(std::size_t, std::size_t)>& angle) {
  ComplexSpectrogram out = s;
  for (std::size_t t = 0; t < s.num_frames(); ++t)
    for (std::size_t f = 0; f < s.num_bins(); ++f) out(t, f) *= std::polar(1.0, angle(t, f));
  return out;
}

// Stereo fixture whose inter-channel phase difference varies with frequency.
AudioBuffer ipd_fixture(std::size_t n, int rate) {
  const auto l = oracle::noise(n, 31, 0.3);
  std::vector<double> r(n, 0.0);
  // Fractional-ish delay by a short FIR gives an IPD that grows with frequency.
  for (std::size_t i = 3; i < n; ++i) r[i] = 0.6 * l[i - 3] + 0.3 * l[i - 2] - 0.1 * l[i];
  return AudioBuffer::stereo(l, r, rate);
}

CoherenceConfig small_cfg() {
  CoherenceConfig cfg;
  cfg.stft = StftConfig::with_default_hop(256);
  return cfg;
}

}  // namespace

TEST_CASE("icpc examples") {
  const auto x = oracle::noise(44100, 1);
  CHECK(icpc(x, x, 44100).percent >= 99.99);

  const auto ref = stft(x, StftConfig::with_default_hop(2048), 44100);
  for (double c : {0.4, 2.0, kPi}) CHECK(icpc(ref, rotated(ref, [c](auto, auto) { return c; })).percent >= 99.99);
  std::vector<double> neg(x);
  for (auto& v : neg) v = -v;
  CHECK(icpc(x, neg, 44100).percent >= 99.99);

  // Uniform random phases over about 10^5 bins.
  const auto noise = oracle::noise(44100 * 5, 2);
  const auto big = stft(noise, StftConfig::with_default_hop(2048), 44100);
  REQUIRE(big.data().size() >= 100000);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const auto scrambled = rotated(big, [&](auto, auto) { return u(rng); });
  CHECK(icpc(big, scrambled).percent <= 5.0);

  CHECK_THROWS_AS(icpc(x, oracle::noise(1000, 1), 44100), Error);
  CHECK_THROWS_AS(icpc(ref, stft(x, StftConfig::with_default_hop(1024), 44100)), Error);
}

TEST_CASE("ccpc examples") {
  const auto ref = ipd_fixture(4096, 22050);
  CHECK(ccpc(ref, ref).percent >= 99.99);

  const auto cfg = small_cfg();
  const auto rl = stft(ref.channel(0), cfg.stft, 22050), rr = stft(ref.channel(1), cfg.stft, 22050);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> angles(rl.data().size());
  for (auto& a : angles) a = u(rng);
  auto common = [&](std::size_t t, std::size_t f) { return angles[t * rl.num_bins() + f]; };
  CHECK(ccpc(rl, rr, rotated(rl, common), rotated(rr, common), cfg).percent >= 99.99);

  // Swapped channels: the IPD error is twice the reference IPD.
  const auto swapped = AudioBuffer::stereo(Samples(ref.channel(1).begin(), ref.channel(1).end()),
                                           Samples(ref.channel(0).begin(), ref.channel(0).end()), 22050);
  const double got = ccpc(ref, swapped, cfg).percent;
  const double expected = oracle::ccpc(to_grid(rl), to_grid(rr), to_grid(rr), to_grid(rl), cfg.epsilon);
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  CHECK(got < 99.0);

  CHECK_THROWS_AS(ccpc(AudioBuffer::mono(Samples(4096, 0.1), 22050), ref), Error);
  CHECK_THROWS_AS(ccpc(ref, ref.truncated(4000)), Error);
}

TEST_CASE("coherence scores match direct summation") {
  const auto ref = ipd_fixture(3000, 16000);
  const auto rec = AudioBuffer::stereo(oracle::noise(3000, 40, 0.2), oracle::chirp(100, 7000, 16000, 3000), 16000);
  const auto cfg = small_cfg();
  const auto rl = stft(ref.channel(0), cfg.stft, 16000), rr = stft(ref.channel(1), cfg.stft, 16000);
  const auto el = stft(rec.channel(0), cfg.stft, 16000), er = stft(rec.channel(1), cfg.stft, 16000);
  CHECK(icpc(rl, el, cfg).percent == doctest::Approx(oracle::icpc(to_grid(rl), to_grid(el), cfg.epsilon)).epsilon(1e-9));
  CHECK(ccpc(rl, rr, el, er, cfg).percent ==
        doctest::Approx(oracle::ccpc(to_grid(rl), to_grid(rr), to_grid(el), to_grid(er), cfg.epsilon)).epsilon(1e-9));
  const double per_channel = (icpc(rl, el, cfg).percent + icpc(rr, er, cfg).percent) / 2;
  CHECK(icpc(ref, rec, cfg).percent == doctest::Approx(per_channel).epsilon(1e-12));
}

TEST_CASE("coherence is gain invariant and silence-safe") {
  const auto ref = ipd_fixture(8192, 44100);
  const auto rec = AudioBuffer::stereo(oracle::noise(8192, 50, 0.3), oracle::noise(8192, 51, 0.1), 44100);
  for (auto mode : {WeightMode::Product, WeightMode::ReferenceEnergy}) {
    CoherenceConfig cfg;
    cfg.weight_mode = mode;
    const double i0 = icpc(ref, rec, cfg).percent, c0 = ccpc(ref, rec, cfg).percent;
    for (double g : {0.01, 0.5, 7.0}) {
      CHECK(std::abs(icpc(ref, rec.scaled(g), cfg).percent - i0) <= 0.01);
      CHECK(std::abs(ccpc(ref, rec.scaled(g), cfg).percent - c0) <= 0.01);
      CHECK(std::abs(icpc(ref.scaled(g), rec, cfg).percent - i0) <= 0.01);
      CHECK(std::abs(ccpc(ref.scaled(g), rec, cfg).percent - c0) <= 0.01);
    }
    CHECK((i0 >= 0 && i0 <= 100));
    CHECK((c0 >= 0 && c0 <= 100));
  }
  const auto silent = AudioBuffer::stereo(Samples(8192, 0.0), Samples(8192, 0.0), 44100);
  const auto i = icpc(silent, silent), c = ccpc(silent, silent);
  CHECK(i.percent == 100.0);
  CHECK(i.degenerate);
  CHECK(c.percent == 100.0);
  CHECK(c.degenerate);
  CHECK(icpc(ref, silent).degenerate);
}

TEST_CASE("si_sdr examples") {
  const auto x = oracle::noise(10000, 3);
  std::vector<double> triple(x);
  for (auto& v : triple) v *= 3;
  CHECK(si_sdr(x, triple) == kSiSdrCapDb);
  CHECK(si_sdr(x, x) == kSiSdrCapDb);

  // Noise made exactly orthogonal to x with 1% of its energy.
  auto n = oracle::noise(10000, 4);
  double dot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += n[i] * x[i];
  for (std::size_t i = 0; i < x.size(); ++i) n[i] -= dot / oracle::energy(x) * x[i];
  const double scale = std::sqrt(0.01 * oracle::energy(x) / oracle::energy(n));
  std::vector<double> rec(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) rec[i] = x[i] + scale * n[i];
  CHECK(std::abs(si_sdr(x, rec) - 20.0) <= 0.01);

  // Nearly orthogonal reconstruction against the direct formula.
  const auto other = oracle::noise(10000, 5);
  double xy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) xy += x[i] * other[i];
  const double alpha = xy / oracle::energy(x);
  double target = 0, err = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    target += alpha * x[i] * alpha * x[i];
    err += (alpha * x[i] - other[i]) * (alpha * x[i] - other[i]);
  }
  const double brute = 10 * std::log10(target / err);
  CHECK(brute < -10.0);
  CHECK(si_sdr(x, other) == doctest::Approx(brute).epsilon(1e-9));

  n.assign(x.size(), 0.0);
  n[7] = 1.0;
  std::vector<double> impulse_only(x.size(), 0.0);
  impulse_only[8] = 1.0;
  CHECK(si_sdr(n, impulse_only) == -kSiSdrCapDb);
  CHECK_THROWS_AS(si_sdr(std::vector<double>(100, 0.0), x), Error);
  CHECK_THROWS_AS(si_sdr(x, std::vector<double>(100, 0.0)), Error);
}

TEST_CASE("evaluate_pair perfect reconstruction row") {
  const auto x = AudioBuffer::stereo(oracle::chirp(50, 15000, 44100, 44100), oracle::noise(44100, 8, 0.2), 44100);
  const auto r = evaluate_pair(x, x, {}, "a.wav", "b.wav");
  CHECK(r.mel_dist == 0.0);
  CHECK(r.stft_dist == 0.0);
  CHECK(format_fixed2(r.icpc_percent) == "100.00");
  CHECK(format_fixed2(r.ccpc_percent) == "100.00");
  CHECK(r.si_sdr_db == kSiSdrCapDb);
  CHECK(r.dbtp_dist == 0.0);
  CHECK(r.ref_id == "a.wav");
  CHECK(r.frames == 44100);
  CHECK(r.sample_rate == 44100);
  CHECK_FALSE((r.truncated || r.resampled || r.mono_duplicated));

  const auto neg = evaluate_pair(x, x.scaled(-1.0));
  CHECK(neg.si_sdr_db == kSiSdrCapDb);
  CHECK(format_fixed2(neg.icpc_percent) == "100.00");
  CHECK(neg.mel_dist == 0.0);
}

TEST_CASE("evaluate_pair alignment flags and degenerate inputs") {
  const auto x = AudioBuffer::stereo(oracle::noise(30000, 1, 0.3), oracle::noise(30000, 2, 0.3), 44100);
  const auto shorter = evaluate_pair(x, x.truncated(25000));
  CHECK(shorter.truncated);
  CHECK(shorter.frames == 25000);
  CHECK(shorter.mel_dist == 0.0);

  const auto mono = evaluate_pair(AudioBuffer::mono(oracle::noise(20000, 3), 44100), x);
  CHECK(mono.mono_duplicated);

  // Band-limited content survives the rate change almost untouched.
  const auto tonal = AudioBuffer::stereo(oracle::chirp(100, 15000, 44100, 30000), oracle::sine(3000, 44100, 30000), 44100);
  const auto rs = evaluate_pair(tonal, resample(tonal, 48000));
  CHECK(rs.resampled);
  CHECK(rs.sample_rate == 44100);
  CHECK(rs.si_sdr_db > 20.0);

  const auto silent = AudioBuffer::stereo(Samples(30000, 0.0), Samples(30000, 0.0), 44100);
  const auto s = evaluate_pair(x, silent);
  for (double v : {s.mel_dist, s.stft_dist, s.icpc_percent, s.ccpc_percent, s.si_sdr_db, s.dbtp_dist})
    CHECK(std::isfinite(v));
  CHECK(s.si_sdr_db == -kSiSdrCapDb);
  CHECK(s.icpc_degenerate);

  const auto z = evaluate_pair(silent, x);
  CHECK(z.zero_reference);
  CHECK(z.si_sdr_db == -kSiSdrCapDb);
  CHECK(evaluate_pair(silent, silent).si_sdr_db == kSiSdrCapDb);

  CHECK_THROWS_AS(evaluate_pair(x, x.truncated(1000)), Error);
}

TEST_CASE("chunked evaluation and averaging") {
  const auto x = AudioBuffer::stereo(oracle::noise(44100 * 3 + 1000, 1, 0.3), oracle::noise(44100 * 3 + 1000, 2, 0.3), 44100);
  const auto c = evaluate_chunked(x, x, 1.0);
  CHECK(c.mel_dist == 0.0);
  CHECK(format_fixed2(c.icpc_percent) == "100.00");
  CHECK(c.frames == x.num_frames());

  MetricReport a, b;
  a.mel_dist = 1.0;
  b.mel_dist = 3.0;
  a.truncated = true;
  const auto m = average_reports({a, b});
  CHECK(m.mel_dist == 2.0);
  CHECK(m.truncated);
  CHECK_THROWS_AS(evaluate_chunked(x, x, 0.0), Error);
}

TEST_CASE("report formats") {
  CHECK(format_fixed2(1.005) == "1.00");
  CHECK(format_fixed2(-0.001) == "0.00");
  CHECK(format_fixed2(100.0) == "100.00");
  CHECK(format_fixed2(std::nan("")) == "null");
  CHECK(format_fixed2(INFINITY) == "null");

  MetricReport r;
  r.mel_dist = 0.123;
  r.stft_dist = 4.5;
  r.icpc_percent = 99.999;
  r.ccpc_percent = 87.654;
  r.si_sdr_db = -3.2;
  r.dbtp_dist = 0.0;
  r.ref_id = "ref.wav";
  r.rec_id = "rec, v2.wav";
  const auto text = to_json(r);
  CHECK(text.rfind("{\"mel_dist\":0.12,\"stft_dist\":4.50,\"icpc_percent\":100.00,\"ccpc_percent\":87.65,"
                   "\"si_sdr_db\":-3.20,\"dbtp_dist\":0.00",
                   0) == 0);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("ref") == "ref.wav");
  CHECK(j.at("flags").at("truncated") == false);

  CHECK(csv_header() == "mel_dist,stft_dist,icpc_percent,ccpc_percent,si_sdr_db,dbtp_dist,ref,rec");
  CHECK(to_csv_row(r) == "0.12,4.50,100.00,87.65,-3.20,0.00,\"ref.wav\",\"rec, v2.wav\"");
}
