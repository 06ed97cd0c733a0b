#include "earmetrics/stereo.hpp"

namespace earm {

std::string_view to_string(StereoComponent c) {
  switch (c) {
    case StereoComponent::Mid: return "mid";
    case StereoComponent::Side: return "side";
    case StereoComponent::Left: return "left";
    case StereoComponent::Right: return "right";
  }
  return "?";
}

const Samples& MslrSignals::get(StereoComponent c) const {
  switch (c) {
    case StereoComponent::Mid: return mid;
    case StereoComponent::Side: return side;
    case StereoComponent::Left: return left;
    case StereoComponent::Right: break;
  }
  return right;
}

const ComplexSpectrogram& MslrSpectra::get(StereoComponent c) const {
  switch (c) {
    case StereoComponent::Mid: return m_spec;
    case StereoComponent::Side: return s_spec;
    case StereoComponent::Left: return l_spec;
    case StereoComponent::Right: break;
  }
  return r_spec;
}

MslrSignals split_mslr(const AudioBuffer& buf) {
  if (!buf.is_stereo()) throw Error("M/S split needs a stereo signal");
  MslrSignals out;
  out.rate = buf.sample_rate();
  const auto l = buf.channel(0);
  const auto r = buf.channel(1);
  out.left.assign(l.begin(), l.end());
  out.right.assign(r.begin(), r.end());
  out.mid.resize(l.size());
  out.side.resize(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    out.mid[i] = (l[i] + r[i]) / 2.0;
    out.side[i] = (l[i] - r[i]) / 2.0;
  }
  return out;
}

AudioBuffer merge_mslr(std::span<const double> mid, std::span<const double> side, int rate) {
  if (mid.size() != side.size()) throw Error("mid and side lengths differ");
  Samples left(mid.size()), right(mid.size());
  for (std::size_t i = 0; i < mid.size(); ++i) {
    left[i] = mid[i] + side[i];
    right[i] = mid[i] - side[i];
  }
  return AudioBuffer::stereo(std::move(left), std::move(right), rate);
}

MslrSpectra mslr_spectra(const AudioBuffer& buf, const StftConfig& config) {
  const MslrSignals sig = split_mslr(buf);
  const int rate = buf.sample_rate();
  return MslrSpectra{stft(sig.left, config, rate), stft(sig.right, config, rate),
                     stft(sig.mid, config, rate), stft(sig.side, config, rate)};
}

}  // namespace earm
