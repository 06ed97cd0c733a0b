// earmetrics: pair evaluation and dataset curation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "earmetrics/coherence.hpp"
#include "earmetrics/pipeline.hpp"
#include "earmetrics/spectral.hpp"

namespace fs = std::filesystem;

namespace {

struct EvalArgs {
  std::string ref;
  std::string rec;
  std::string format = "json";
  std::string prefilter;
  bool objective = false;
  std::vector<std::size_t> fft_sizes;
  double chunk_seconds = 0.0;
  std::string pairs;
  std::string log = "eval_log.jsonl";
  std::size_t jobs = 1;
};

struct CurateArgs {
  std::string stage;
  std::string input;
  std::string output;
  earm::CurateOptions opts;
  std::size_t jobs = 1;
};

int run_eval(const EvalArgs& args) {
  earm::EvalConfig cfg;
  if (!args.fft_sizes.empty()) cfg.multiscale.fft_sizes = args.fft_sizes;
  if (!args.prefilter.empty()) cfg.prefilter = earm::parse_prefilter(args.prefilter);
  cfg.multiscale.validate();

  if (!args.pairs.empty()) {
    const auto pairs = earm::read_pairs_manifest(args.pairs);
    const auto summary = earm::run_eval_batch(pairs, args.log, cfg,
                                              earm::resolve_jobs(args.jobs), args.chunk_seconds);
    std::cout << summary.to_json() << '\n';
    return 0;
  }
  if (args.ref.empty() || args.rec.empty())
    throw earm::Error("eval needs <ref> <rec> or --pairs <manifest>");

  const earm::MetricReport report = earm::eval_files(args.ref, args.rec, cfg, args.chunk_seconds);

  std::optional<earm::ObjectiveBreakdown> objective;
  if (args.objective) {
    const auto aligned =
        earm::align_pair(earm::load_wav(args.ref), earm::load_wav(args.rec));
    earm::ObjectiveOptions opts;
    if (!args.prefilter.empty()) opts.prefilter = cfg.prefilter;
    objective = earm::composite_objective(aligned.ref, aligned.rec, cfg.multiscale, opts);
  }

  if (args.format == "csv") {
    std::string header = earm::csv_header();
    std::string row = earm::to_csv_row(report);
    if (objective) {
      header += ",obj_stft_mag,obj_corr,obj_phase,obj_weighted_total";
      char buf[160];
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f", objective->stft_mag, objective->corr,
                    objective->phase, objective->weighted_total);
      row += buf;
    }
    std::cout << header << '\n' << row << '\n';
  } else {
    std::string text = earm::to_json(report);
    if (objective) {
      text.pop_back();
      text += ",\"objective\":" + earm::to_json(*objective) + "}";
    }
    std::cout << text << '\n';
  }
  return 0;
}

int run_curate(const CurateArgs& args) {
  const earm::CurateStage stage = earm::parse_stage(args.stage);
  const fs::path in(args.input);
  const fs::path out(args.output);

  // A single .wav input is single-file mode: hard errors fail the command.
  if (fs::is_regular_file(in) && in.extension() == ".wav") {
    fs::path target = out / in.filename();
    const auto d = earm::curate_file(in, target, stage, args.opts);
    std::cout << earm::to_jsonl(d) << '\n';
    return d.reason == earm::RejectReason::DecodeError ? 1 : 0;
  }

  const auto summary =
      earm::run_curate_batch(in, out, stage, args.opts, earm::resolve_jobs(args.jobs));
  std::cout << summary.to_json() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptual audio reconstruction metrics and dataset curation"};
  app.require_subcommand(1);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Metric report for a reference/reconstruction pair");
  eval_cmd->add_option("ref", eval.ref, "Reference WAV");
  eval_cmd->add_option("rec", eval.rec, "Reconstruction WAV");
  eval_cmd->add_option("--format", eval.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  eval_cmd->add_option("--prefilter", eval.prefilter,
                       "Weighting applied before every metric (default none; the objective "
                       "defaults to k)")
      ->check(CLI::IsMember({"k", "a", "none"}));
  eval_cmd->add_flag("--objective", eval.objective,
                     "Also print the reconstruction objective (lambda = 50/10/10)");
  eval_cmd->add_option("--fft-sizes", eval.fft_sizes, "Multi-scale FFT sizes")->delimiter(',');
  eval_cmd->add_option("--chunk-seconds", eval.chunk_seconds,
                       "Evaluate fixed-length chunks and average them");
  eval_cmd->add_option("--pairs", eval.pairs, "Manifest of '<ref> <rec>' lines (batch mode)");
  eval_cmd->add_option("--log", eval.log, "JSONL output for --pairs");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads for --pairs");

  CurateArgs curate;
  auto* curate_cmd = app.add_subcommand("curate", "Two-stage dataset filtering");
  curate_cmd->add_option("stage", curate.stage, "stage1, stage2 or all")
      ->required()
      ->check(CLI::IsMember({"stage1", "stage2", "all"}));
  curate_cmd->add_option("in", curate.input, "Input directory, manifest or single WAV")
      ->required();
  curate_cmd->add_option("out", curate.output, "Output directory")->required();
  curate_cmd->add_option("--lufs-min", curate.opts.lufs_min, "Lower LUFS-I bound (inclusive)");
  curate_cmd->add_option("--lufs-max", curate.opts.lufs_max, "Upper LUFS-I bound (inclusive)");
  curate_cmd->add_option("--dbtp-max", curate.opts.dbtp_max, "Keep only files with dBTP below this");
  curate_cmd->add_option("--jobs", curate.jobs, "Worker threads (EARMETRICS_THREADS overrides)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed()) return run_eval(eval);
    return run_curate(curate);
  } catch (const std::exception& e) {
    std::cerr << "earmetrics: " << e.what() << '\n';
    return 1;
  }
}
