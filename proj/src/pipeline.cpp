#include "earmetrics/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "earmetrics/loudness.hpp"

namespace fs = std::filesystem;

namespace earm {

std::string_view to_string(Verdict v) { return v == Verdict::Keep ? "keep" : "reject"; }

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::BelowRate: return "below_rate";
    case RejectReason::LufsLow: return "lufs_low";
    case RejectReason::LufsHigh: return "lufs_high";
    case RejectReason::TruePeakExceeded: return "true_peak_exceeded";
    case RejectReason::DecodeError: return "decode_error";
  }
  return "?";
}

CurateStage parse_stage(std::string_view s) {
  if (s == "stage1") return CurateStage::Stage1;
  if (s == "stage2") return CurateStage::Stage2;
  if (s == "all") return CurateStage::All;
  throw Error("unknown stage '" + std::string(s) + "' (expected stage1, stage2 or all)");
}

namespace {

// What a 32-bit float WAV will actually store.
AudioBuffer quantize_float32(const AudioBuffer& buf) {
  std::vector<Samples> chans;
  for (std::size_t c = 0; c < buf.num_channels(); ++c) {
    const auto x = buf.channel(c);
    Samples q(x.size());
    std::transform(x.begin(), x.end(), q.begin(),
                   [](double v) { return static_cast<double>(static_cast<float>(v)); });
    chans.push_back(std::move(q));
  }
  return AudioBuffer(std::move(chans), buf.sample_rate());
}

CurateDecision keep(CurateDecision d) {
  d.verdict = Verdict::Keep;
  d.reason = RejectReason::None;
  return d;
}

CurateDecision reject(CurateDecision d, RejectReason reason, std::string detail = {}) {
  d.verdict = Verdict::Reject;
  d.reason = reason;
  d.detail = std::move(detail);
  return d;
}

CurateDecision decode_failure(const fs::path& path, const std::exception& e) {
  CurateDecision d;
  d.input_path = path.string();
  return reject(std::move(d), RejectReason::DecodeError, e.what());
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

fs::path resolve_against(const fs::path& base_dir, const std::string& entry) {
  fs::path p(entry);
  return p.is_absolute() ? p : base_dir / p;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Stage1Result curate_stage1(const AudioBuffer& buf, const CurateOptions& opts) {
  Stage1Result result;
  CurateDecision d;
  d.measured.native_rate = buf.sample_rate();
  if (buf.sample_rate() < opts.target_rate) {
    result.decision = reject(std::move(d), RejectReason::BelowRate);
    return result;
  }
  AudioBuffer std_buf = buf.sample_rate() == opts.target_rate ? buf : resample(buf, opts.target_rate);
  std_buf = quantize_float32(std_buf.as_stereo());

  LoudnessResult loud;
  try {
    loud = integrated_lufs(std_buf);
  } catch (const Error& e) {
    result.decision = reject(std::move(d), RejectReason::LufsLow, e.what());
    return result;
  }
  if (!loud.is_silent()) d.measured.lufs_i = loud.lufs_i;
  if (loud.is_silent() || loud.lufs_i < opts.lufs_min) {
    result.decision = reject(std::move(d), RejectReason::LufsLow);
    return result;
  }
  if (loud.lufs_i > opts.lufs_max) {
    result.decision = reject(std::move(d), RejectReason::LufsHigh);
    return result;
  }
  result.decision = keep(std::move(d));
  result.standardized = std::move(std_buf);
  return result;
}

Stage1Result curate_stage1(const fs::path& path, const CurateOptions& opts) {
  AudioBuffer buf;
  try {
    buf = load_wav(path);
  } catch (const std::exception& e) {
    return {decode_failure(path, e), std::nullopt};
  }
  Stage1Result r = curate_stage1(buf, opts);
  r.decision.input_path = path.string();
  return r;
}

CurateDecision curate_stage2(const AudioBuffer& buf, const CurateOptions& opts) {
  CurateDecision d;
  d.measured.native_rate = buf.sample_rate();
  const double dbtp = true_peak_dbtp(buf).dbtp;
  d.measured.dbtp = dbtp;
  if (dbtp < opts.dbtp_max) return keep(std::move(d));
  return reject(std::move(d), RejectReason::TruePeakExceeded);
}

CurateDecision curate_stage2(const fs::path& path, const CurateOptions& opts) {
  AudioBuffer buf;
  try {
    buf = load_wav(path);
  } catch (const std::exception& e) {
    return decode_failure(path, e);
  }
  CurateDecision d = curate_stage2(buf, opts);
  d.input_path = path.string();
  return d;
}

CurateDecision curate_file(const fs::path& input, const fs::path& output, CurateStage stage,
                           const CurateOptions& opts) {
  CurateDecision d;
  try {
    if (stage == CurateStage::Stage2) {
      d = curate_stage2(input, opts);
      if (d.verdict == Verdict::Keep) {
        fs::create_directories(output.parent_path());
        fs::copy_file(input, output, fs::copy_options::overwrite_existing);
        d.output_path = output.string();
      }
      return d;
    }

    Stage1Result s1 = curate_stage1(input, opts);
    d = std::move(s1.decision);
    if (d.verdict != Verdict::Keep) return d;
    if (stage == CurateStage::All) {
      const CurateDecision s2 = curate_stage2(*s1.standardized, opts);
      d.measured.dbtp = s2.measured.dbtp;
      if (s2.verdict != Verdict::Keep) return reject(std::move(d), s2.reason);
    }
    fs::create_directories(output.parent_path());
    save_wav(output, *s1.standardized, WavEncoding::Float32);
    d.output_path = output.string();
    return d;
  } catch (const std::exception& e) {
    CurateDecision failed = decode_failure(input, e);
    failed.measured = d.measured;
    return failed;
  }
}

std::size_t BatchSummary::rejected() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : rejected_by_reason) n += count;
  return n;
}

std::string BatchSummary::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["kept"] = kept;
  j["rejected"] = rejected();
  j["rejected_by_reason"] = rejected_by_reason;
  j["log"] = log_path.string();
  j["manifest"] = manifest_path.string();
  return j.dump();
}

std::vector<fs::path> collect_inputs(const fs::path& dir_or_manifest) {
  std::vector<fs::path> out;
  if (fs::is_directory(dir_or_manifest)) {
    for (const auto& entry : fs::recursive_directory_iterator(dir_or_manifest))
      if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".wav")
        out.push_back(entry.path());
  } else {
    std::ifstream in(dir_or_manifest);
    if (!in) throw Error("cannot read " + dir_or_manifest.string());
    const fs::path base = dir_or_manifest.parent_path();
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      out.push_back(resolve_against(base, line));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t resolve_jobs(std::size_t requested) {
  if (const char* env = std::getenv("EARMETRICS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  if (requested == 0) return std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

std::string to_jsonl(const CurateDecision& d) {
  auto opt_fixed = [](const std::optional<double>& v) {
    return v ? format_fixed2(*v) : std::string("null");
  };
  std::string s = "{\"input\":" + json_string(d.input_path) +
                  ",\"verdict\":" + json_string(std::string(to_string(d.verdict))) +
                  ",\"reason\":" + json_string(std::string(to_string(d.reason))) +
                  ",\"measured\":{\"native_rate\":" +
                  (d.measured.native_rate ? std::to_string(*d.measured.native_rate) : "null") +
                  ",\"lufs_i\":" + opt_fixed(d.measured.lufs_i) +
                  ",\"dbtp\":" + opt_fixed(d.measured.dbtp) + "}";
  if (!d.output_path.empty()) s += ",\"output\":" + json_string(d.output_path);
  if (!d.detail.empty()) s += ",\"detail\":" + json_string(d.detail);
  return s + "}";
}

BatchSummary run_curate_batch(const fs::path& dir_or_manifest, const fs::path& out_dir,
                              CurateStage stage, const CurateOptions& opts, std::size_t jobs) {
  const std::vector<fs::path> inputs = collect_inputs(dir_or_manifest);
  const bool dir_mode = fs::is_directory(dir_or_manifest);
  fs::create_directories(out_dir);

  auto output_for = [&](const fs::path& in) {
    fs::path rel = dir_mode ? fs::relative(in, dir_or_manifest) : in.filename();
    rel.replace_extension(".wav");
    return out_dir / rel;
  };

  std::vector<CurateDecision> decisions(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    decisions[i] = curate_file(inputs[i], output_for(inputs[i]), stage, opts);
  });

  BatchSummary summary;
  summary.total = inputs.size();
  summary.log_path = out_dir / "curate_log.jsonl";
  summary.manifest_path = out_dir / "manifest.txt";
  std::ofstream log(summary.log_path, std::ios::trunc | std::ios::binary);
  std::ofstream manifest(summary.manifest_path, std::ios::trunc | std::ios::binary);
  for (auto& d : decisions) {
    // Log paths relative to the output directory so reruns are byte-identical
    // wherever the corpus lives.
    if (!d.output_path.empty()) {
      d.output_path = fs::relative(d.output_path, out_dir).generic_string();
      manifest << d.output_path << '\n';
    }
    if (dir_mode) d.input_path = fs::relative(d.input_path, dir_or_manifest).generic_string();
    log << to_jsonl(d) << '\n';
    if (d.verdict == Verdict::Keep) ++summary.kept;
    else ++summary.rejected_by_reason[std::string(to_string(d.reason))];
  }
  if (!log || !manifest) throw Error("failed writing batch outputs to " + out_dir.string());
  return summary;
}

std::vector<EvalPair> read_pairs_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot read " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<EvalPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string ref, rec;
    if (!(ss >> ref >> rec))
      throw Error(manifest.string() + ":" + std::to_string(lineno) + ": expected '<ref> <rec>'");
    pairs.push_back({resolve_against(base, ref), resolve_against(base, rec)});
  }
  return pairs;
}

MetricReport eval_files(const fs::path& ref, const fs::path& rec, const EvalConfig& cfg,
                        double chunk_seconds) {
  const AudioBuffer a = load_wav(ref);
  const AudioBuffer b = load_wav(rec);
  if (chunk_seconds > 0.0)
    return evaluate_chunked(a, b, chunk_seconds, cfg, ref.string(), rec.string());
  return evaluate_pair(a, b, cfg, ref.string(), rec.string());
}

BatchSummary run_eval_batch(const std::vector<EvalPair>& pairs, const fs::path& log_path,
                            const EvalConfig& cfg, std::size_t jobs, double chunk_seconds) {
  std::vector<std::string> lines(pairs.size());
  std::vector<char> ok(pairs.size(), 0);
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    try {
      lines[i] = to_json(eval_files(pairs[i].ref, pairs[i].rec, cfg, chunk_seconds));
      ok[i] = 1;
    } catch (const std::exception& e) {
      lines[i] = "{\"ref\":" + json_string(pairs[i].ref.string()) +
                 ",\"rec\":" + json_string(pairs[i].rec.string()) +
                 ",\"error\":" + json_string(e.what()) + "}";
    }
  });

  BatchSummary summary;
  summary.total = pairs.size();
  summary.log_path = log_path;
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  std::ofstream log(log_path, std::ios::trunc | std::ios::binary);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    log << lines[i] << '\n';
    if (ok[i]) ++summary.kept;
    else ++summary.rejected_by_reason["decode_error"];
  }
  if (!log) throw Error("failed writing " + log_path.string());
  return summary;
}

}  // namespace earm
