#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "earmetrics/coherence.hpp"
#include "earmetrics/loudness.hpp"
#include "earmetrics/pipeline.hpp"
#include "earmetrics/spectral.hpp"
#include "earmetrics/stft.hpp"
#include "earmetrics/weighting.hpp"

namespace py = pybind11;
using namespace earm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts (frames,) for mono or (channels, frames).
AudioBuffer to_buffer(const Array& a, int rate) {
  if (a.ndim() == 1) return AudioBuffer::mono(Samples(a.data(), a.data() + a.shape(0)), rate);
  if (a.ndim() != 2) throw Error("audio must be 1-D or (channels, frames)");
  std::vector<Samples> chans;
  for (py::ssize_t c = 0; c < a.shape(0); ++c)
    chans.emplace_back(a.data(c, 0), a.data(c, 0) + a.shape(1));
  return AudioBuffer(std::move(chans), rate);
}

Array to_array(const AudioBuffer& buf) {
  Array out({static_cast<py::ssize_t>(buf.num_channels()), static_cast<py::ssize_t>(buf.num_frames())});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t c = 0; c < buf.num_channels(); ++c)
    for (std::size_t i = 0; i < buf.num_frames(); ++i) m(c, i) = buf.channel(c)[i];
  return out;
}

std::span<const double> as_span(const Array& a) {
  if (a.ndim() != 1) throw Error("expected a 1-D array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

MultiScaleConfig multiscale(const std::optional<std::vector<std::size_t>>& fft_sizes) {
  MultiScaleConfig cfg;
  if (fft_sizes) cfg.fft_sizes = *fft_sizes;
  cfg.validate();
  return cfg;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["mel_dist"] = r.mel_dist;
  d["stft_dist"] = r.stft_dist;
  d["icpc_percent"] = r.icpc_percent;
  d["ccpc_percent"] = r.ccpc_percent;
  d["si_sdr_db"] = r.si_sdr_db;
  d["dbtp_dist"] = r.dbtp_dist;
  d["sample_rate"] = r.sample_rate;
  d["frames"] = r.frames;
  py::dict flags;
  flags["mono_duplicated"] = r.mono_duplicated;
  flags["truncated"] = r.truncated;
  flags["resampled"] = r.resampled;
  flags["icpc_degenerate"] = r.icpc_degenerate;
  flags["ccpc_degenerate"] = r.ccpc_degenerate;
  flags["zero_reference"] = r.zero_reference;
  d["flags"] = flags;
  return d;
}

py::dict decision_dict(const CurateDecision& dec) {
  py::dict d;
  d["input"] = dec.input_path;
  d["verdict"] = std::string(to_string(dec.verdict));
  d["reason"] = std::string(to_string(dec.reason));
  d["native_rate"] = dec.measured.native_rate;
  d["lufs_i"] = dec.measured.lufs_i;
  d["dbtp"] = dec.measured.dbtp;
  d["output"] = dec.output_path;
  d["detail"] = dec.detail;
  return d;
}

py::list sections_list(const BiquadCascade& c) {
  py::list out;
  for (const auto& s : c.sections()) out.append(py::make_tuple(s.b0, s.b1, s.b2, s.a1, s.a2));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stereo codec evaluation metrics and dataset curation";
  py::register_exception<Error>(m, "EarmetricsError", PyExc_ValueError);

  m.def(
      "load_wav",
      [](const std::filesystem::path& p) {
        const auto buf = load_wav(p);
        return py::make_tuple(to_array(buf), buf.sample_rate());
      },
      py::arg("path"), "Returns (samples[channels, frames], rate).");
  m.def(
      "save_wav",
      [](const std::filesystem::path& p, const Array& a, int rate, const std::string& encoding) {
        WavEncoding enc = WavEncoding::Float32;
        if (encoding == "pcm16") enc = WavEncoding::Pcm16;
        else if (encoding == "pcm24") enc = WavEncoding::Pcm24;
        else if (encoding == "pcm32") enc = WavEncoding::Pcm32;
        else if (encoding != "float32") throw Error("unknown encoding " + encoding);
        save_wav(p, to_buffer(a, rate), enc);
      },
      py::arg("path"), py::arg("samples"), py::arg("rate"), py::arg("encoding") = "float32");
  m.def(
      "resample", [](const Array& a, int rate, int target) { return to_array(resample(to_buffer(a, rate), target)); },
      py::arg("samples"), py::arg("rate"), py::arg("target_rate"));

  m.def(
      "stft",
      [](const Array& x, int rate, std::size_t fft_size, std::size_t hop, bool center) {
        const auto spec = stft(as_span(x), StftConfig{fft_size, hop, Window::Hann, center}, rate);
        py::array_t<std::complex<double>> out(
            {static_cast<py::ssize_t>(spec.num_frames()), static_cast<py::ssize_t>(spec.num_bins())});
        std::copy(spec.data().begin(), spec.data().end(), out.mutable_data());
        return out;
      },
      py::arg("x"), py::arg("rate"), py::arg("fft_size") = 2048, py::arg("hop") = 0, py::arg("center") = true,
      "Complex spectrogram [frames, bins]; hop 0 means fft_size/4.");
  m.def(
      "istft",
      [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& s, std::size_t fft_size,
         std::size_t hop, std::optional<std::size_t> length, bool center) {
        if (s.ndim() != 2) throw Error("spectrogram must be 2-D");
        const StftConfig cfg{fft_size, hop, Window::Hann, center};
        if (static_cast<std::size_t>(s.shape(1)) != cfg.num_bins()) throw Error("bin count does not match fft_size");
        ComplexSpectrogram spec(static_cast<std::size_t>(s.shape(0)), cfg, 0);
        std::copy(s.data(), s.data() + s.size(), spec.data().begin());
        const auto y = istft(spec, length);
        return Array(static_cast<py::ssize_t>(y.size()), y.data());
      },
      py::arg("spec"), py::arg("fft_size"), py::arg("hop") = 0, py::arg("length") = std::nullopt,
      py::arg("center") = true);

  m.def("k_weighting", [](int rate) { return sections_list(design_k_weighting(rate)); }, py::arg("rate"),
        "K-weighting biquads as (b0, b1, b2, a1, a2) tuples.");
  m.def("a_weighting", [](int rate) { return sections_list(design_a_weighting(rate)); }, py::arg("rate"));

  m.def(
      "integrated_lufs", [](const Array& a, int rate) { return integrated_lufs(to_buffer(a, rate)).lufs_i; },
      py::arg("samples"), py::arg("rate"));
  m.def(
      "true_peak_dbtp", [](const Array& a, int rate) { return true_peak_dbtp(to_buffer(a, rate)).dbtp; },
      py::arg("samples"), py::arg("rate"));

  m.def(
      "icpc",
      [](const Array& ref, const Array& rec, int rate) { return icpc(to_buffer(ref, rate), to_buffer(rec, rate)).percent; },
      py::arg("ref"), py::arg("rec"), py::arg("rate"));
  m.def(
      "ccpc",
      [](const Array& ref, const Array& rec, int rate) { return ccpc(to_buffer(ref, rate), to_buffer(rec, rate)).percent; },
      py::arg("ref"), py::arg("rec"), py::arg("rate"));
  m.def(
      "si_sdr", [](const Array& ref, const Array& rec) { return si_sdr(as_span(ref), as_span(rec)); }, py::arg("ref"),
      py::arg("rec"));

  m.def(
      "evaluate",
      [](const Array& ref, const Array& rec, int rate, std::optional<int> rec_rate,
         std::optional<std::vector<std::size_t>> fft_sizes, const std::string& prefilter) {
        EvalConfig cfg;
        cfg.multiscale = multiscale(fft_sizes);
        cfg.prefilter = parse_prefilter(prefilter);
        const auto a = to_buffer(ref, rate);
        const auto b = to_buffer(rec, rec_rate.value_or(rate));
        MetricReport r;
        {
          py::gil_scoped_release release;
          r = evaluate_pair(a, b, cfg);
        }
        return report_dict(r);
      },
      py::arg("ref"), py::arg("rec"), py::arg("rate"), py::arg("rec_rate") = std::nullopt,
      py::arg("fft_sizes") = std::nullopt, py::arg("prefilter") = "none",
      "Full metric battery for a (reference, reconstruction) pair.");

  m.def(
      "composite_objective",
      [](const Array& ref, const Array& rec, int rate, std::tuple<double, double, double> weights,
         const std::string& prefilter, std::optional<std::vector<std::size_t>> fft_sizes) {
        ObjectiveOptions opts;
        opts.weights = {std::get<0>(weights), std::get<1>(weights), std::get<2>(weights)};
        opts.prefilter = parse_prefilter(prefilter);
        const auto b = composite_objective(to_buffer(ref, rate), to_buffer(rec, rate), multiscale(fft_sizes), opts);
        py::dict d;
        d["stft_mag"] = b.stft_mag;
        d["corr"] = b.corr;
        d["phase"] = b.phase;
        d["weighted_total"] = b.weighted_total;
        d["weights"] = py::make_tuple(b.lambda_stft_mag, b.lambda_corr, b.lambda_phase);
        d["prefilter"] = std::string(to_string(b.prefilter));
        return d;
      },
      py::arg("ref"), py::arg("rec"), py::arg("rate"), py::arg("weights") = std::make_tuple(50.0, 10.0, 10.0),
      py::arg("prefilter") = "k", py::arg("fft_sizes") = std::nullopt);

  m.def(
      "curate_file",
      [](const std::filesystem::path& in, const std::filesystem::path& out, const std::string& stage, double lufs_min,
         double lufs_max, double dbtp_max) {
        CurateOptions opts;
        opts.lufs_min = lufs_min;
        opts.lufs_max = lufs_max;
        opts.dbtp_max = dbtp_max;
        return decision_dict(curate_file(in, out, parse_stage(stage), opts));
      },
      py::arg("input"), py::arg("output"), py::arg("stage") = "all", py::arg("lufs_min") = -22.0,
      py::arg("lufs_max") = -5.0, py::arg("dbtp_max") = 1.0);
}
