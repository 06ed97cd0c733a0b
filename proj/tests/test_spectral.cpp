#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "earmetrics/spectral.hpp"
#include "oracle.hpp"

using namespace earm;

namespace {

MultiScaleConfig small_scales(std::vector<std::size_t> sizes) {
  MultiScaleConfig cfg;
  cfg.fft_sizes = std::move(sizes);
  return cfg;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b, double gb = 1.0) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + gb * b[i];
  return out;
}

double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double htk_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

TEST_CASE("MultiScaleConfig presets and validation") {
  CHECK(MultiScaleConfig::evaluation().fft_sizes == std::vector<std::size_t>{4096, 2048, 1024, 512, 256, 128});
  CHECK(MultiScaleConfig::discriminator().fft_sizes == std::vector<std::size_t>{2048, 1024, 512, 256, 128});
  CHECK(MultiScaleConfig::evaluation().max_fft_size() == 4096);
  CHECK(MultiScaleConfig::evaluation().mel_bins_for(0) == 128);
  CHECK(MultiScaleConfig::evaluation().mel_bins_for(5) == 16);
  CHECK(MultiScaleConfig::evaluation().stft_for(1024).effective_hop() == 256);
  CHECK_THROWS_AS(small_scales({}).validate(), Error);
  CHECK_THROWS_AS(small_scales({1000}).validate(), Error);
  auto bad = small_scales({256});
  bad.log_epsilon = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("log_magnitude_distance examples") {
  const auto cfg = MultiScaleConfig::evaluation();
  const auto x = oracle::noise(16384, 1);
  CHECK(log_magnitude_distance(x, x, 44100, cfg) == 0.0);

  std::vector<double> twice(x);
  for (auto& v : twice) v *= 2;
  CHECK(std::abs(log_magnitude_distance(x, twice, 44100, cfg) - std::log(2.0)) <= 0.05);

  // Pure tone: every bin well above epsilon shifts by exactly log 2.
  const auto tone = oracle::sine(1000, 44100, 2048);
  std::vector<double> tone2(tone);
  for (auto& v : tone2) v *= 2;
  const auto a = stft(tone, StftConfig::with_default_hop(512), 44100);
  const auto b = stft(tone2, StftConfig::with_default_hop(512), 44100);
  std::size_t energetic = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (std::abs(a.data()[i]) < 1.0) continue;
    ++energetic;
    const double d = std::log(std::abs(b.data()[i]) + 1e-5) - std::log(std::abs(a.data()[i]) + 1e-5);
    CHECK(std::abs(d - std::log(2.0)) <= 0.05);
  }
  CHECK(energetic > 0);
}

TEST_CASE("log_magnitude_distance against zero matches direct summation") {
  const auto cfg = small_scales({256, 128});
  const auto ref = oracle::sine(1500, 16000, 1024, 0.8);
  const std::vector<double> zero(ref.size(), 0.0);
  double expected = 0;
  for (std::size_t n : cfg.fft_sizes) {
    const auto frames = oracle::naive_stft(ref, n, n / 4, true);
    double sum = 0;
    std::size_t count = 0;
    for (const auto& row : frames)
      for (const auto& z : row) {
        sum += std::abs(std::log(std::abs(z) + 1e-5) - std::log(1e-5));
        ++count;
      }
    expected += sum / count / cfg.fft_sizes.size();
  }
  CHECK(log_magnitude_distance(ref, zero, 16000, cfg) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("distance preconditions") {
  const auto cfg = small_scales({512});
  const auto x = oracle::noise(1000, 2);
  CHECK_THROWS_AS(log_magnitude_distance(x, oracle::noise(999, 2), 8000, cfg), Error);
  CHECK_THROWS_AS(log_magnitude_distance(oracle::noise(300, 1), oracle::noise(300, 2), 8000, cfg), Error);
  CHECK_THROWS_AS(mel_distance(x, oracle::noise(999, 2), 8000, cfg), Error);
  CHECK_THROWS_AS(mel_distance(oracle::noise(300, 1), oracle::noise(300, 2), 8000, cfg), Error);
}

TEST_CASE("mel filterbank geometry") {
  const auto fb = mel_filterbank(40, 1024, 16000);
  REQUIRE(fb.rows == 40);
  REQUIRE(fb.cols == 513);
  for (std::size_t m = 0; m < fb.rows; ++m) {
    double peak = 0;
    for (std::size_t f = 0; f < fb.cols; ++f) {
      CHECK(fb(m, f) >= 0.0);
      peak = std::max(peak, fb(m, f));
    }
    CHECK(peak <= 1.0);
    CHECK(peak > 0.5);
  }
  CHECK(hz_to_mel(1000) == doctest::Approx(htk_mel(1000)));
  CHECK(mel_to_hz(hz_to_mel(3210.0)) == doctest::Approx(3210.0));
}

TEST_CASE("mel projection of a 1 kHz tone lands in the straddling filters") {
  const double rate = 44100;
  const auto tone = oracle::sine(1000, rate, 16384);
  const auto cfg = MultiScaleConfig::evaluation();
  const double top = htk_mel(rate / 2);
  std::size_t resolved = 0;
  for (std::size_t s = 0; s < cfg.fft_sizes.size(); ++s) {
    const std::size_t n = cfg.fft_sizes[s];
    const std::size_t mels = cfg.mel_bins_for(s);
    CAPTURE(n);
    const auto fb = mel_filterbank(mels, n, 44100);
    const double bin_hz = rate / n;
    // Filter m is centred at the (m+1)-th of mels+2 equally spaced mel points.
    auto centre = [&](std::size_t m) { return htk_hz((m + 1) * top / (mels + 1)); };
    auto projected_share = [&](const std::vector<double>& mag, double hz) {
      std::size_t lower = 0;
      for (std::size_t m = 0; m < mels; ++m)
        if (centre(m) <= hz) lower = m;
      double total = 0, straddle = 0;
      for (std::size_t m = 0; m < mels; ++m) {
        double acc = 0;
        for (std::size_t f = 0; f < fb.cols; ++f) acc += fb(m, f) * mag[f];
        total += acc * acc;
        if (m == lower || m == lower + 1) straddle += acc * acc;
      }
      return straddle / total;
    };

    // Ideal line at the bin nearest 1 kHz: only the two filters around it respond.
    const auto k = static_cast<std::size_t>(std::lround(1000.0 / bin_hz));
    std::vector<double> line(fb.cols, 0.0);
    line[k] = 1.0;
    CHECK(projected_share(line, k * bin_hz) == doctest::Approx(1.0).epsilon(1e-12));

    // A windowed tone occupies about two bins; the claim holds once the
    // straddling pair is at least that wide.
    std::size_t lower = 0;
    for (std::size_t m = 0; m < mels; ++m)
      if (centre(m) <= 1000.0) lower = m;
    if (centre(lower + 1) - centre(lower) < 2 * bin_hz) continue;
    ++resolved;
    const auto spec = stft(tone, cfg.stft_for(n), 44100);
    std::vector<double> mag(fb.cols);
    for (std::size_t f = 0; f < fb.cols; ++f) mag[f] = std::abs(spec(spec.num_frames() / 2, f));
    CHECK(projected_share(mag, 1000.0) >= 0.9);
  }
  CHECK(resolved >= 2);
}

TEST_CASE("mel_distance examples") {
  const auto cfg = MultiScaleConfig::evaluation();
  const auto x = oracle::chirp(100, 8000, 44100, 16384);
  CHECK(mel_distance(x, x, 44100, cfg) == 0.0);
  const auto n = oracle::noise(x.size(), 77);
  const double sig_rms = std::sqrt(oracle::energy(x) / x.size());
  const double n_rms = std::sqrt(oracle::energy(n) / n.size());
  const double d20 = mel_distance(x, add(x, n, 0.1 * sig_rms / n_rms), 44100, cfg);
  const double d40 = mel_distance(x, add(x, n, 0.01 * sig_rms / n_rms), 44100, cfg);
  CHECK(d20 > d40);
  CHECK(d40 > 0.0);
}

TEST_CASE("adding a scale moves the mean by a convex-combination amount") {
  const auto x = oracle::noise(8192, 5), y = oracle::noise(8192, 6);
  const auto base = small_scales({1024, 512});
  const auto extra = small_scales({1024, 512, 256});
  const double d_base = log_magnitude_distance(x, y, 22050, base);
  const double d_new_scale = log_magnitude_distance(x, y, 22050, small_scales({256}));
  const double d_extra = log_magnitude_distance(x, y, 22050, extra);
  CHECK(d_extra == doctest::Approx((2 * d_base + d_new_scale) / 3).epsilon(1e-12));
  CHECK(std::abs(d_extra - d_base) <= std::max(d_new_scale, d_base) / 3 + 1e-12);

  const double m_base = mel_distance(x, y, 22050, base);
  const double m_scale = mel_distance(x, y, 22050, small_scales({256}));
  CHECK(mel_distance(x, y, 22050, extra) == doctest::Approx((2 * m_base + m_scale) / 3).epsilon(1e-12));
}

TEST_CASE("prefilter names") {
  CHECK(parse_prefilter("k") == Prefilter::K);
  CHECK(parse_prefilter("a") == Prefilter::A);
  CHECK(parse_prefilter("none") == Prefilter::None);
  CHECK_THROWS_AS(parse_prefilter("z"), Error);
  for (auto p : {Prefilter::None, Prefilter::K, Prefilter::A}) CHECK(parse_prefilter(to_string(p)) == p);
  const auto buf = AudioBuffer::mono(oracle::noise(100, 1), 44100);
  CHECK(apply_prefilter(Prefilter::None, buf).channels() == buf.channels());
}

// ---------------------------------------------------------------------------
// Composite objective

TEST_CASE("composite objective of identical signals is zero") {
  const auto l = oracle::noise(8192, 10), r = oracle::noise(8192, 11);
  const auto ref = AudioBuffer::stereo(l, r, 44100);
  const auto b = composite_objective(ref, ref, small_scales({2048, 512, 128}));
  CHECK(b.stft_mag == 0.0);
  CHECK(b.corr <= 1e-6);
  CHECK(b.phase <= 1e-12);
  CHECK(b.weighted_total <= 1e-4);
  CHECK(b.lambda_stft_mag == 50.0);
  CHECK(b.lambda_corr == 10.0);
  CHECK(b.lambda_phase == 10.0);
  CHECK(b.prefilter == Prefilter::K);
}

TEST_CASE("channel swap leaves mid unchanged") {
  const auto l = oracle::noise(8192, 12), r = oracle::chirp(200, 5000, 44100, 8192);
  const auto ref = AudioBuffer::stereo(l, r, 44100);
  const auto rec = AudioBuffer::stereo(r, l, 44100);
  const auto cfg = small_scales({1024, 256});
  ObjectiveOptions opts;
  opts.prefilter = Prefilter::None;
  const auto b = composite_objective(ref, rec, cfg, opts);
  REQUIRE(b.per_component.size() == 4);

  std::vector<double> mid(l.size()), side_ref(l.size()), side_rec(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    mid[i] = (l[i] + r[i]) / 2;
    side_ref[i] = (l[i] - r[i]) / 2;
    side_rec[i] = (r[i] - l[i]) / 2;
  }
  for (const auto& term : b.per_component) {
    REQUIRE(term.stft_mag.has_value());
    switch (term.component) {
      case StereoComponent::Mid:
        CHECK(*term.stft_mag == 0.0);
        break;
      case StereoComponent::Side:
        // |S| is unchanged by negation, so only the epsilon-free identity holds.
        CHECK(*term.stft_mag == doctest::Approx(log_magnitude_distance(side_ref, side_rec, 44100, cfg)));
        break;
      case StereoComponent::Left:
        CHECK(*term.stft_mag > 0.0);
        CHECK(*term.stft_mag == doctest::Approx(log_magnitude_distance(l, r, 44100, cfg)).epsilon(1e-12));
        break;
      case StereoComponent::Right:
        CHECK(*term.stft_mag > 0.0);
        CHECK(*term.stft_mag == doctest::Approx(log_magnitude_distance(r, l, 44100, cfg)).epsilon(1e-12));
        break;
    }
  }
  CHECK(b.stft_mag > 0.0);
}

TEST_CASE("weights and single-component composition") {
  const auto l = oracle::noise(4096, 20), r = oracle::noise(4096, 21);
  const auto el = add(l, oracle::noise(4096, 22), 0.3), er = add(r, oracle::noise(4096, 23), 0.3);
  const auto ref = AudioBuffer::stereo(l, r, 22050);
  const auto rec = AudioBuffer::stereo(el, er, 22050);
  const auto cfg = small_scales({1024, 512, 256});

  ObjectiveOptions ones;
  ones.weights = {1, 1, 1};
  const auto b1 = composite_objective(ref, rec, cfg, ones);
  CHECK(b1.weighted_total == doctest::Approx(b1.stft_mag + b1.corr + b1.phase).epsilon(1e-12));
  const auto bd = composite_objective(ref, rec, cfg);
  CHECK(std::abs(bd.weighted_total - (50 * bd.stft_mag + 10 * bd.corr + 10 * bd.phase)) <= 1e-9);

  ObjectiveOptions single;
  single.prefilter = Prefilter::None;
  single.magnitude_components = {StereoComponent::Left};
  single.phase_components = {StereoComponent::Left};
  const auto b = composite_objective(ref, rec, cfg, single);
  double corr = 0, phase = 0;
  for (std::size_t n : cfg.fft_sizes) {
    const auto a = stft(l, cfg.stft_for(n), 22050);
    const auto e = stft(el, cfg.stft_for(n), 22050);
    corr += correlation_loss(a, e) / 3;
    phase += phase_loss(a, e) / 3;
  }
  const double mag = log_magnitude_distance(l, el, 22050, cfg);
  CHECK(std::abs(b.stft_mag - mag) <= 1e-9);
  CHECK(std::abs(b.corr - corr) <= 1e-9);
  CHECK(std::abs(b.phase - phase) <= 1e-9);
  CHECK(std::abs(b.weighted_total - (50 * mag + 10 * corr + 10 * phase)) <= 1e-9);

  const auto j = nlohmann::json::parse(to_json(bd));
  CHECK(j.at("prefilter") == "k");
  CHECK(j.at("weighted_total").get<double>() == doctest::Approx(bd.weighted_total));
  CHECK(j.at("components").size() == 4);
}

TEST_CASE("composite objective preconditions") {
  const auto x = oracle::noise(4096, 1);
  const auto st = AudioBuffer::stereo(x, x, 44100);
  const auto cfg = small_scales({512});
  CHECK_THROWS_AS(composite_objective(AudioBuffer::mono(x, 44100), st, cfg), Error);
  CHECK_THROWS_AS(composite_objective(st, AudioBuffer::stereo(x, x, 48000), cfg), Error);
  CHECK_THROWS_AS(composite_objective(st, st.truncated(4000), cfg), Error);
}
