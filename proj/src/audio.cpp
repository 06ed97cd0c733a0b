#include "earmetrics/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

namespace earm {

AudioBuffer::AudioBuffer(std::vector<Samples> channels, int sample_rate)
    : channels_(std::move(channels)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) throw Error("sample rate must be positive");
  if (channels_.empty() || channels_.size() > 2)
    throw Error("unsupported channel count " + std::to_string(channels_.size()));
  for (const auto& ch : channels_)
    if (ch.size() != channels_.front().size()) throw Error("channels must have equal length");
}

AudioBuffer AudioBuffer::mono(Samples samples, int sample_rate) {
  std::vector<Samples> chans;
  chans.push_back(std::move(samples));
  return AudioBuffer(std::move(chans), sample_rate);
}

AudioBuffer AudioBuffer::stereo(Samples left, Samples right, int sample_rate) {
  std::vector<Samples> chans;
  chans.push_back(std::move(left));
  chans.push_back(std::move(right));
  return AudioBuffer(std::move(chans), sample_rate);
}

AudioBuffer AudioBuffer::scaled(double gain) const {
  auto chans = channels_;
  for (auto& ch : chans)
    for (auto& s : ch) s *= gain;
  return AudioBuffer(std::move(chans), sample_rate_);
}

AudioBuffer AudioBuffer::truncated(std::size_t frames) const { return slice(0, frames); }

AudioBuffer AudioBuffer::slice(std::size_t begin, std::size_t count) const {
  const std::size_t n = num_frames();
  begin = std::min(begin, n);
  const std::size_t end = begin + std::min(count, n - begin);
  std::vector<Samples> chans;
  for (const auto& ch : channels_)
    chans.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(begin),
                       ch.begin() + static_cast<std::ptrdiff_t>(end));
  return AudioBuffer(std::move(chans), sample_rate_);
}

AudioBuffer AudioBuffer::as_stereo() const {
  if (is_stereo()) return *this;
  return stereo(channels_.front(), channels_.front(), sample_rate_);
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const unsigned char* p, const FmtChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    if (fmt.bits == 32) {
      std::uint32_t u = read_u32(p);
      return static_cast<double>(std::bit_cast<float>(u));
    }
    std::uint64_t u = static_cast<std::uint64_t>(read_u32(p)) |
                      (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
    return std::bit_cast<double>(u);
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(
          static_cast<std::uint32_t>(p[0] << 8) | (static_cast<std::uint32_t>(p[1]) << 16) |
          (static_cast<std::uint32_t>(p[2]) << 24));
      return (v >> 8) / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
  }
}

}  // namespace

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(path.string() + ": not a RIFF/WAVE file");

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw Error(path.string() + ": truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      fmt.format = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.rate = read_u32(f + 4);
      fmt.bits = read_u16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40 || avail < 40) throw Error(path.string() + ": truncated extensible fmt");
        fmt.format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw Error(path.string() + ": missing fmt chunk");
  if (data == nullptr) throw Error(path.string() + ": missing data chunk");
  const bool pcm_ok = fmt.format == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.format == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
  if (!pcm_ok && !float_ok)
    throw Error(path.string() + ": unsupported codec (format " + std::to_string(fmt.format) +
                ", " + std::to_string(fmt.bits) + " bits)");
  if (fmt.channels < 1 || fmt.channels > 2)
    throw Error("unsupported channel count " + std::to_string(fmt.channels));
  if (fmt.rate == 0) throw Error(path.string() + ": zero sample rate");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  std::vector<Samples> chans(fmt.channels, Samples(frames));
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t c = 0; c < fmt.channels; ++c)
      chans[c][i] = decode_sample(data + i * frame_bytes + c * bytes_per_sample, fmt);
  return AudioBuffer(std::move(chans), static_cast<int>(fmt.rate));
}

void save_wav(const std::filesystem::path& path, const AudioBuffer& buf, WavEncoding encoding) {
  std::uint16_t bits = 32;
  std::uint16_t format = kFormatPcm;
  switch (encoding) {
    case WavEncoding::Pcm16: bits = 16; break;
    case WavEncoding::Pcm24: bits = 24; break;
    case WavEncoding::Pcm32: bits = 32; break;
    case WavEncoding::Float32: bits = 32; format = kFormatFloat; break;
  }
  const auto channels = static_cast<std::uint16_t>(buf.num_channels());
  const std::uint32_t rate = static_cast<std::uint32_t>(buf.sample_rate());
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.num_frames() * block_align);

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  out.append("data");
  put_u32(out, data_bytes);

  const double full_scale = std::ldexp(1.0, bits - 1);
  for (std::size_t i = 0; i < buf.num_frames(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double s = buf.channel(c)[i];
      if (format == kFormatFloat) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
        continue;
      }
      const double q = std::clamp(std::round(s * full_scale), -full_scale, full_scale - 1.0);
      const auto v = static_cast<std::int64_t>(q);
      for (int b = 0; b < bits / 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

// Kaiser-windowed sinc, band edge at 95.5% of the lower Nyquist.
constexpr double kCutoffFraction = 0.955;
constexpr double kZeroCrossings = 96.0;
constexpr double kKaiserBeta = 10.0;
constexpr std::int64_t kMaxPolyphases = 4096;

class SincKernel {
 public:
  SincKernel(int source_rate, int target_rate)
      : scale_(kCutoffFraction * std::min(1.0, static_cast<double>(target_rate) / source_rate)),
        half_width_(kZeroCrossings / scale_),
        i0_beta_(std::cyl_bessel_i(0.0, kKaiserBeta)) {}

  double half_width() const { return half_width_; }

  // t is measured in input samples.
  double operator()(double t) const {
    const double r = t / half_width_;
    if (std::abs(r) >= 1.0) return 0.0;
    const double x = std::numbers::pi * scale_ * t;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta_;
    return scale_ * sinc * w;
  }

 private:
  double scale_;
  double half_width_;
  double i0_beta_;
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0) throw Error("target rate must be positive");
  const int source_rate = buf.sample_rate();
  if (source_rate == target_rate) return buf;

  const std::int64_t g = std::gcd<std::int64_t>(source_rate, target_rate);
  const std::int64_t up = target_rate / g;   // output step numerator
  const std::int64_t down = source_rate / g;
  const std::size_t in_len = buf.num_frames();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) * target_rate / source_rate));

  const SincKernel kernel(source_rate, target_rate);
  const auto reach = static_cast<std::int64_t>(std::ceil(kernel.half_width()));
  const std::size_t taps = static_cast<std::size_t>(2 * reach + 1);

  // Output n sits at input time n*down/up = base + phase/up.
  const bool polyphase = up <= kMaxPolyphases;
  std::vector<double> table;
  if (polyphase) {
    table.resize(static_cast<std::size_t>(up) * taps);
    for (std::int64_t p = 0; p < up; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(up);
      for (std::size_t k = 0; k < taps; ++k)
        table[static_cast<std::size_t>(p) * taps + k] =
            kernel(frac - static_cast<double>(static_cast<std::int64_t>(k) - reach));
    }
  }

  std::vector<Samples> out(buf.num_channels(), Samples(out_len, 0.0));
  std::vector<double> local(taps);
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::int64_t num = static_cast<std::int64_t>(n) * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const double* h = nullptr;
    if (polyphase) {
      h = table.data() + static_cast<std::size_t>(phase) * taps;
    } else {
      const double frac = static_cast<double>(phase) / static_cast<double>(up);
      for (std::size_t k = 0; k < taps; ++k)
        local[k] = kernel(frac - static_cast<double>(static_cast<std::int64_t>(k) - reach));
      h = local.data();
    }
    const std::int64_t first = base - reach;
    const std::size_t k_lo = static_cast<std::size_t>(std::max<std::int64_t>(0, -first));
    const std::size_t k_hi = static_cast<std::size_t>(std::clamp<std::int64_t>(
        static_cast<std::int64_t>(in_len) - first, 0, static_cast<std::int64_t>(taps)));
    for (std::size_t c = 0; c < buf.num_channels(); ++c) {
      const auto x = buf.channel(c);
      double acc = 0.0;
      for (std::size_t k = k_lo; k < k_hi; ++k)
        acc += h[k] * x[static_cast<std::size_t>(first + static_cast<std::int64_t>(k))];
      out[c][n] = acc;
    }
  }
  return AudioBuffer(std::move(out), target_rate);
}

}  // namespace earm
