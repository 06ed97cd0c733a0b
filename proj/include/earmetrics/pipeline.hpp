#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "earmetrics/audio.hpp"
#include "earmetrics/coherence.hpp"

namespace earm {

enum class Verdict { Keep, Reject };

enum class RejectReason { None, BelowRate, LufsLow, LufsHigh, TruePeakExceeded, DecodeError };

std::string_view to_string(Verdict v);
std::string_view to_string(RejectReason r);

struct CurateOptions {
  int target_rate = 44100;
  /// Inclusive integrated-loudness window.
  double lufs_min = -22.0;
  double lufs_max = -5.0;
  /// Files are kept only when dbtp < dbtp_max.
  double dbtp_max = 1.0;
};

struct Measurements {
  std::optional<int> native_rate;
  std::optional<double> lufs_i;
  std::optional<double> dbtp;
};

struct CurateDecision {
  std::string input_path;
  Verdict verdict = Verdict::Reject;
  RejectReason reason = RejectReason::DecodeError;
  Measurements measured;
  /// Set when a standardized file was written.
  std::string output_path;
  std::string detail;
};

struct Stage1Result {
  CurateDecision decision;
  /// 44.1 kHz stereo, float32-representable; present only on keep.
  std::optional<AudioBuffer> standardized;
};

/// Format and loudness standardisation. Files natively below the target rate
/// are rejected (never upsampled); higher rates are resampled down, mono is
/// duplicated to stereo, then LUFS-I must fall inside [lufs_min, lufs_max].
Stage1Result curate_stage1(const AudioBuffer& buf, const CurateOptions& opts = {});
Stage1Result curate_stage1(const std::filesystem::path& path, const CurateOptions& opts = {});

/// True-peak gate: keep iff dbtp < dbtp_max.
CurateDecision curate_stage2(const AudioBuffer& buf, const CurateOptions& opts = {});
CurateDecision curate_stage2(const std::filesystem::path& path, const CurateOptions& opts = {});

enum class CurateStage { Stage1, Stage2, All };

CurateStage parse_stage(std::string_view s);

/// Runs the requested stage(s) on one file and writes the kept result to
/// `output` (stage 1 output is written as 32-bit float WAV).
CurateDecision curate_file(const std::filesystem::path& input, const std::filesystem::path& output,
                           CurateStage stage, const CurateOptions& opts = {});

struct BatchSummary {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::filesystem::path log_path;
  std::filesystem::path manifest_path;

  std::size_t rejected() const;
  std::string to_json() const;
};

/// A directory is scanned recursively for .wav files; any other path is read
/// as a manifest with one file path per line ('#' starts a comment, relative
/// paths resolve against the manifest's directory). Sorted by input path.
std::vector<std::filesystem::path> collect_inputs(const std::filesystem::path& dir_or_manifest);

/// Thread count: EARMETRICS_THREADS wins over `requested`; 0 means hardware
/// concurrency.
std::size_t resolve_jobs(std::size_t requested);

/// One JSON object (no trailing newline) per decision.
std::string to_jsonl(const CurateDecision& d);

/// Curates every input with a bounded worker pool. Writes kept files under
/// out_dir (mirroring input-relative paths), `curate_log.jsonl` with one
/// decision per line in input order, and `manifest.txt` listing kept outputs.
/// Per-file failures are recorded as rejections and never abort the batch.
BatchSummary run_curate_batch(const std::filesystem::path& dir_or_manifest,
                              const std::filesystem::path& out_dir, CurateStage stage,
                              const CurateOptions& opts = {}, std::size_t jobs = 1);

struct EvalPair {
  std::filesystem::path ref;
  std::filesystem::path rec;
};

/// Pairs manifest: each non-comment line holds "<ref> <rec>" (whitespace or
/// tab separated); relative paths resolve against the manifest directory.
std::vector<EvalPair> read_pairs_manifest(const std::filesystem::path& manifest);

/// Loads both files and evaluates them; chunk_seconds > 0 enables chunking.
MetricReport eval_files(const std::filesystem::path& ref, const std::filesystem::path& rec,
                        const EvalConfig& cfg = {}, double chunk_seconds = 0.0);

/// Evaluates every pair, writing one MetricReport (or {"ref","rec","error"})
/// per line to `log_path` in manifest order. kept counts successful pairs;
/// failures land under rejected_by_reason["decode_error"].
BatchSummary run_eval_batch(const std::vector<EvalPair>& pairs,
                            const std::filesystem::path& log_path, const EvalConfig& cfg = {},
                            std::size_t jobs = 1, double chunk_seconds = 0.0);

}  // namespace earm
