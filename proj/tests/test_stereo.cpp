#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "earmetrics/stereo.hpp"
#include "oracle.hpp"

using namespace earm;

TEST_CASE("split_mslr examples") {
  const auto same = split_mslr(AudioBuffer::stereo({0.3, -0.2, 0.9}, {0.3, -0.2, 0.9}, 8000));
  CHECK(same.side == Samples{0, 0, 0});
  CHECK(same.mid == same.left);

  const auto anti = split_mslr(AudioBuffer::stereo({0.3, -0.2}, {-0.3, 0.2}, 8000));
  CHECK(anti.mid == Samples{0, 0});
  CHECK(anti.side == anti.left);

  const auto s = split_mslr(AudioBuffer::stereo({1, 0}, {0, 1}, 8000));
  CHECK(s.mid == Samples{0.5, 0.5});
  CHECK(s.side == Samples{0.5, -0.5});
  CHECK(s.rate == 8000);
  CHECK(&s.get(StereoComponent::Left) == &s.left);
  CHECK(&s.get(StereoComponent::Side) == &s.side);

  CHECK_THROWS_AS(split_mslr(AudioBuffer::mono({1, 2}, 8000)), Error);
}

TEST_CASE("merge_mslr inverts split_mslr") {
  const auto l = oracle::noise(1000, 1), r = oracle::noise(1000, 2);
  const auto s = split_mslr(AudioBuffer::stereo(l, r, 44100));
  const auto back = merge_mslr(s.mid, s.side, 44100);
  for (std::size_t i = 0; i < l.size(); ++i) {
    CHECK(std::abs(back.channel(0)[i] - l[i]) <= 1e-12);
    CHECK(std::abs(back.channel(1)[i] - r[i]) <= 1e-12);
    CHECK(std::abs(s.mid[i] - (l[i] + r[i]) / 2) <= 1e-9);
    CHECK(std::abs(s.side[i] - (l[i] - r[i]) / 2) <= 1e-9);
  }

  const auto centre = merge_mslr(l, Samples(l.size(), 0.0), 44100);
  CHECK(std::equal(l.begin(), l.end(), centre.channel(0).begin()));
  CHECK(std::equal(l.begin(), l.end(), centre.channel(1).begin()));

  const auto wide = merge_mslr(Samples(l.size(), 0.0), l, 44100);
  for (std::size_t i = 0; i < l.size(); ++i) CHECK(wide.channel(1)[i] == -wide.channel(0)[i]);

  CHECK_THROWS_AS(merge_mslr(Samples(3), Samples(4), 44100), Error);
}

TEST_CASE("energy identity holds for random stereo signals") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto s = split_mslr(AudioBuffer::stereo(oracle::noise(500, seed), oracle::noise(500, seed + 50, 0.1),
                                                  16000));
    const double lr = oracle::energy(s.left) + oracle::energy(s.right);
    const double ms = 2 * (oracle::energy(s.mid) + oracle::energy(s.side));
    CHECK(std::abs(lr - ms) <= 1e-9 * lr);
  }
}

TEST_CASE("mslr_spectra shares one configuration and respects linearity") {
  const auto cfg = StftConfig::with_default_hop(256);
  const auto l = oracle::noise(3000, 4), r = oracle::noise(3000, 5);
  const auto spec = mslr_spectra(AudioBuffer::stereo(l, r, 22050), cfg);
  for (auto c : kAllComponents) {
    CHECK(spec.get(c).config() == cfg);
    CHECK(spec.get(c).same_shape(spec.l_spec));
  }
  double err = 0;
  for (std::size_t i = 0; i < spec.m_spec.data().size(); ++i)
    err = std::max(err, std::abs(spec.m_spec.data()[i] - (spec.l_spec.data()[i] + spec.r_spec.data()[i]) / 2.0));
  CHECK(err <= 1e-6);

  const auto centred = mslr_spectra(AudioBuffer::stereo(l, l, 22050), cfg);
  for (auto z : centred.s_spec.data()) CHECK(z == Complex{0, 0});

  const auto panned = mslr_spectra(AudioBuffer::stereo(l, Samples(l.size(), 0.0), 22050), cfg);
  for (std::size_t i = 0; i < panned.m_spec.data().size(); ++i)
    CHECK(std::abs(std::abs(panned.m_spec.data()[i]) - std::abs(panned.s_spec.data()[i])) <= 1e-6);

  CHECK_THROWS_AS(mslr_spectra(AudioBuffer::mono(l, 22050), cfg), Error);
}
