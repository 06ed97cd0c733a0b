#pragma once

#include <array>
#include <string_view>

#include "earmetrics/audio.hpp"
#include "earmetrics/stft.hpp"

namespace earm {

/// The four stereo views: left/right pass through, mid = (L+R)/2, side = (L-R)/2.
enum class StereoComponent { Mid, Side, Left, Right };

inline constexpr std::array<StereoComponent, 4> kAllComponents = {
    StereoComponent::Mid, StereoComponent::Side, StereoComponent::Left, StereoComponent::Right};
inline constexpr std::array<StereoComponent, 2> kLeftRight = {StereoComponent::Left,
                                                              StereoComponent::Right};

std::string_view to_string(StereoComponent c);

struct MslrSignals {
  Samples left, right, mid, side;
  int rate = 0;

  const Samples& get(StereoComponent c) const;
};

struct MslrSpectra {
  ComplexSpectrogram l_spec, r_spec, m_spec, s_spec;

  const ComplexSpectrogram& get(StereoComponent c) const;
};

MslrSignals split_mslr(const AudioBuffer& buf);

/// Inverse of split_mslr: left = mid + side, right = mid - side.
AudioBuffer merge_mslr(std::span<const double> mid, std::span<const double> side, int rate);

/// STFT of all four components under one configuration. M and S are formed in
/// the time domain before analysis.
MslrSpectra mslr_spectra(const AudioBuffer& buf, const StftConfig& config);

}  // namespace earm
