// SPDX-License-Identifier: Apache-2.0
// Command-line front end: synth, segment, train, summarize, eval, gradcheck, sweep.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "avs/avs.hpp"

namespace fs = std::filesystem;
using namespace avs;

namespace {

struct TrainFlags {
  std::string data;
  std::vector<std::string> augment;
  std::string variant = "m-avs";
  std::size_t attention_scale = 9;
  std::size_t hidden = 256;
  std::size_t layers = 3;
  std::size_t attention_hidden = 256;
  double lr = 0.15;
  std::size_t batch = 16;
  std::size_t epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;
  double budget = kDefaultBudget;
  std::string agg = "mean";
  double test_fraction = 0.2;
  std::size_t workers = 1;
  bool free_running = false;
  bool reference_shots = false;
  bool verbose = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool data_required = true) {
  auto* data = cmd->add_option("--data", f.data, "Dataset directory")->check(CLI::ExistingDirectory);
  if (data_required) data->required();
  cmd->add_option("--augment", f.augment, "Extra dataset directories used for training only")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--variant", f.variant, "a-avs | m-avs | lstm-vs")
      ->check(CLI::IsMember({"a-avs", "m-avs", "lstm-vs"}));
  cmd->add_option("--attention-scale", f.attention_scale, "Odd window size; 0 attends globally");
  cmd->add_option("--hidden", f.hidden, "Encoder (per direction) and decoder hidden size");
  cmd->add_option("--layers", f.layers, "Encoder and decoder layer count");
  cmd->add_option("--attention-hidden", f.attention_hidden, "Additive attention width");
  cmd->add_option("--lr", f.lr, "SGD learning rate");
  cmd->add_option("--batch", f.batch, "Sequences per update");
  cmd->add_option("--epochs", f.epochs, "Maximum epochs");
  cmd->add_option("--patience", f.patience, "Stop after this many consecutive falls in validation F");
  cmd->add_option("--seed", f.seed, "Seed for split, initialisation and shuffling");
  cmd->add_option("--clip-norm", f.clip_norm, "Global gradient-norm clip (0 disables)");
  cmd->add_option("--budget", f.budget, "Summary length as a fraction of the video");
  cmd->add_option("--agg", f.agg, "Per-user aggregation: mean | max")->check(CLI::IsMember({"mean", "max"}));
  cmd->add_option("--test-fraction", f.test_fraction, "Share of native records held out");
  cmd->add_option("--workers", f.workers, "Threads computing per-sequence gradients");
  cmd->add_flag("--free-running", f.free_running, "Feed the decoder its own outputs during training");
  cmd->add_flag("--reference-shots", f.reference_shots, "Evaluate on the records' own shot boundaries");
  cmd->add_flag("--verbose", f.verbose, "Log one line per epoch to stderr");
}

PipelineOptions pipeline_options(const TrainFlags& f) {
  PipelineOptions o;
  o.budget = f.budget;
  o.aggregation = parse_aggregation(f.agg);
  o.reference_shots = f.reference_shots;
  return o;
}

struct Corpus {
  std::vector<VideoRecord> records;
  std::set<std::string> augment_sources;
};

Corpus load_corpus(const TrainFlags& f) {
  Corpus c;
  c.records = load_dataset(f.data);
  require(!c.records.empty(), "dataset '" + f.data + "' is empty");
  std::set<std::string> native;
  for (const auto& r : c.records) native.insert(r.source);
  for (const auto& dir : f.augment)
    for (auto& r : load_dataset(dir)) {
      require(!native.count(r.source),
              "augment set '" + dir + "' shares source tag '" + r.source + "' with the evaluation data");
      c.augment_sources.insert(r.source);
      c.records.push_back(std::move(r));
    }
  return c;
}

struct Run {
  TrainResult result;
  EvalResult eval;  // mean over test videos
  std::vector<std::string> test_ids;
};

// One seeded split → train → evaluate cycle.
Run run_once(const Corpus& corpus, const TrainFlags& f, std::uint64_t seed, std::size_t scale) {
  const Split split =
      make_split(corpus.records, {.seed = seed, .test_fraction = f.test_fraction, .augment_sources = corpus.augment_sources});
  std::vector<VideoRecord> train_set, test_set;
  for (std::size_t i : split.train) train_set.push_back(corpus.records[i]);
  for (std::size_t i : split.test) test_set.push_back(corpus.records[i]);

  ModelConfig mc;
  mc.variant = parse_variant(f.variant);
  mc.input_dim = corpus.records.front().features.cols();
  mc.encoder_hidden = mc.decoder_hidden = f.hidden;
  mc.encoder_layers = mc.decoder_layers = f.layers;
  mc.attention_hidden = f.attention_hidden;
  mc.attention_scale = scale;

  TrainConfig tc;
  tc.learning_rate = f.lr;
  tc.batch_size = f.batch;
  tc.max_epochs = f.epochs;
  tc.patience = f.patience;
  tc.seed = seed;
  if (f.clip_norm > 0) tc.clip_norm = f.clip_norm;
  tc.workers = f.workers;
  tc.teacher_forcing = !f.free_running;

  const PipelineOptions opt = pipeline_options(f);
  Run run{train(init_model(mc, seed), train_set, tc, f_score_validator(test_set, opt), f.verbose ? &std::cerr : nullptr),
          {},
          {}};
  const auto videos = prepare_evaluation(test_set, opt);
  run.eval.mode = opt.aggregation;
  for (const auto& v : videos) {
    const EvalResult e = evaluate_video(run.result.model, v, opt);
    run.eval.precision += e.precision / static_cast<double>(videos.size());
    run.eval.recall += e.recall / static_cast<double>(videos.size());
    run.eval.f_score += e.f_score / static_cast<double>(videos.size());
    run.test_ids.push_back(v.record->id);
  }
  return run;
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation; 0 for one run
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// ---- subcommands ----

struct SynthFlags {
  std::string out;
  SyntheticSpec spec;
  std::string task = "content";
};

int cmd_synth(const SynthFlags& f) {
  SyntheticSpec spec = f.spec;
  spec.task = parse_task(f.task);
  const auto records = generate_synthetic(spec);
  save_dataset(f.out, records);
  std::cout << "wrote " << records.size() << " videos to " << f.out << '\n';
  return 0;
}

struct SegmentFlags {
  std::string data, out;
  double penalty = 1.0;
  std::size_t max_shots = 0;
};

int cmd_segment(const SegmentFlags& f) {
  PipelineOptions opt;
  opt.kts_penalty = f.penalty;
  opt.max_shots = f.max_shots;
  for (const auto& r : load_dataset(f.data)) {
    const ShotSegmentation seg = segment_video(r.features, opt);
    write_text(fs::path(f.out) / (r.id + ".shots.tsv"), format_segmentation(seg));
    std::cout << r.id << '\t' << seg.shot_count() << " shots\n";
  }
  return 0;
}

struct TrainOut {
  std::string out;
};

int cmd_train(const TrainFlags& f, const TrainOut& o) {
  const Corpus corpus = load_corpus(f);
  const Run run = run_once(corpus, f, f.seed, f.attention_scale);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_checkpoint(dir / "model.avsm", run.result.model);
  nlohmann::json report{{"model", to_json(run.result.model.config)},
                        {"train", to_json(TrainConfig{.learning_rate = f.lr,
                                                      .batch_size = f.batch,
                                                      .max_epochs = f.epochs,
                                                      .patience = f.patience,
                                                      .seed = f.seed,
                                                      .clip_norm = f.clip_norm > 0 ? std::optional(f.clip_norm)
                                                                                   : std::nullopt,
                                                      .workers = f.workers,
                                                      .teacher_forcing = !f.free_running})},
                        {"report", to_json(run.result.report)},
                        {"test_ids", run.test_ids},
                        {"test_eval", to_json(run.eval)}};
  write_text(dir / "report.json", report.dump(2) + '\n');
  std::cout << "best epoch " << run.result.report.best_epoch << " of " << run.result.report.stop_epoch
            << ", test F " << fmt2(run.eval.f_score) << '\n';
  return 0;
}

struct SummarizeFlags {
  std::string model, data, out;
  double budget = kDefaultBudget;
  bool reference_shots = false;
};

int cmd_summarize(const SummarizeFlags& f) {
  const AvsModel model = load_checkpoint(f.model);
  PipelineOptions opt;
  opt.budget = f.budget;
  for (const auto& r : load_dataset(f.data)) {
    require(r.features.cols() == model.config.input_dim,
            "record '" + r.id + "' has feature dim " + std::to_string(r.features.cols()) + ", model expects " +
                std::to_string(model.config.input_dim));
    const ShotSegmentation seg = f.reference_shots && r.shot_boundaries ? ShotSegmentation(*r.shot_boundaries)
                                                                         : segment_video(r.features, opt);
    const VideoSummary s = summarize_scores(predict(model, r.features), seg, opt);
    write_text(fs::path(f.out) / (r.id + ".scores.tsv"), format_scores(s.scores));
    write_text(fs::path(f.out) / (r.id + ".summary.txt"), format_summary(s.summary));
    std::cout << r.id << '\t' << s.summary.selected_frames() << '/' << r.frame_count() << " frames\n";
  }
  return 0;
}

struct EvalFlags {
  std::string summary;
  std::vector<std::string> references;
  std::size_t seeds = 5;
};

int cmd_eval(const TrainFlags& f, const EvalFlags& e, bool from_files) {
  if (from_files) {
    const Summary s = parse_summary(read_text(e.summary), e.summary);
    std::vector<Summary> refs;
    for (const auto& p : e.references) refs.push_back(parse_summary(read_text(p), p));
    std::cout << to_json(evaluate_against_users(s, refs, parse_aggregation(f.agg))).dump(2) << '\n';
    return 0;
  }
  const Corpus corpus = load_corpus(f);
  std::vector<double> ps, rs, fsc;
  std::cout << "seed\tprecision\trecall\tf_score\tbest_epoch\n";
  for (std::size_t k = 0; k < e.seeds; ++k) {
    const std::uint64_t seed = f.seed + k;
    const Run run = run_once(corpus, f, seed, f.attention_scale);
    ps.push_back(100 * run.eval.precision);
    rs.push_back(100 * run.eval.recall);
    fsc.push_back(run.eval.f_score);
    std::cout << seed << '\t' << fmt2(ps.back()) << '\t' << fmt2(rs.back()) << '\t' << fmt2(fsc.back()) << '\t'
              << run.result.report.best_epoch << '\n';
  }
  const MeanStd p = mean_std(ps), r = mean_std(rs), fm = mean_std(fsc);
  std::cout << "mean\t" << fmt2(p.mean) << '\t' << fmt2(r.mean) << '\t' << fmt2(fm.mean) << "\t-\n"
            << "stddev\t" << fmt2(p.stddev) << '\t' << fmt2(r.stddev) << '\t' << fmt2(fm.stddev) << "\t-\n";
  return 0;
}

struct GradFlags {
  std::string variant = "m-avs";
  std::uint64_t seed = 1;
  GradCheckDims dims;
};

int cmd_gradcheck(const GradFlags& g) {
  const GradCheckResult r = grad_check(parse_variant(g.variant), g.dims, g.seed);
  std::cout << g.variant << " max_relative_error " << r.max_relative_error << " max_absolute_error "
            << r.max_absolute_error << " checked " << r.checked << '\n';
  return r.max_relative_error < 1e-4 ? 0 : 1;
}

struct SweepFlags {
  std::vector<std::size_t> scales{3, 9, 15};
  std::size_t seeds = 5;
};

int cmd_sweep(const TrainFlags& f, const SweepFlags& s) {
  const Corpus corpus = load_corpus(f);
  std::cout << "scale\tmean_f\tstddev_f\tper_seed\n";
  for (std::size_t scale : s.scales) {
    std::vector<double> fsc;
    for (std::size_t k = 0; k < s.seeds; ++k) fsc.push_back(run_once(corpus, f, f.seed + k, scale).eval.f_score);
    const MeanStd m = mean_std(fsc);
    std::cout << scale << '\t' << fmt2(m.mean) << '\t' << fmt2(m.stddev) << '\t';
    for (std::size_t k = 0; k < fsc.size(); ++k) std::cout << (k ? "," : "") << fmt2(fsc[k]);
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attentive encoder-decoder video summarization"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.spec.seed);
  c_synth->add_option("--videos", synth.spec.videos);
  c_synth->add_option("--min-frames", synth.spec.min_frames);
  c_synth->add_option("--max-frames", synth.spec.max_frames);
  c_synth->add_option("--dim", synth.spec.dim);
  c_synth->add_option("--min-shots", synth.spec.min_shots);
  c_synth->add_option("--max-shots", synth.spec.max_shots);
  c_synth->add_option("--shot-length", synth.spec.shot_length, "Fixed shot length (0: random lengths)");
  c_synth->add_option("--noise", synth.spec.noise);
  c_synth->add_option("--task", synth.task, "content | context")->check(CLI::IsMember({"content", "context"}));
  c_synth->add_option("--marker-gain", synth.spec.marker_gain);
  c_synth->add_option("--low-max", synth.spec.low_max, "Upper score of unimportant shots");
  c_synth->add_option("--users", synth.spec.users);
  c_synth->add_option("--budget", synth.spec.budget);
  c_synth->add_option("--source", synth.spec.source, "Source tag of every record");

  SegmentFlags seg;
  auto* c_segment = app.add_subcommand("segment", "Write KTS shot boundaries per video");
  c_segment->add_option("--data", seg.data)->required()->check(CLI::ExistingDirectory);
  c_segment->add_option("--out", seg.out)->required();
  c_segment->add_option("--penalty", seg.penalty, "Weight of the shot-count penalty");
  c_segment->add_option("--max-shots", seg.max_shots, "0: one shot per five frames");

  TrainFlags train_flags;
  TrainOut train_out;
  auto* c_train = app.add_subcommand("train", "Train on a split, write checkpoint and report");
  add_train_flags(c_train, train_flags);
  c_train->add_option("--out", train_out.out, "Output directory")->required();

  SummarizeFlags sum;
  auto* c_sum = app.add_subcommand("summarize", "Score videos and write keyshot summaries");
  c_sum->add_option("--model", sum.model)->required()->check(CLI::ExistingFile);
  c_sum->add_option("--data", sum.data)->required()->check(CLI::ExistingDirectory);
  c_sum->add_option("--out", sum.out)->required();
  c_sum->add_option("--budget", sum.budget);
  c_sum->add_flag("--reference-shots", sum.reference_shots, "Use the records' own shot boundaries");

  TrainFlags eval_flags;
  EvalFlags eval;
  auto* c_eval = app.add_subcommand("eval", "Score summary files, or run seeded train/evaluate cycles");
  c_eval->add_option("--summary", eval.summary, "Summary file to score")->check(CLI::ExistingFile);
  c_eval->add_option("--reference", eval.references, "Reference summary files")->check(CLI::ExistingFile);
  c_eval->add_option("--seeds", eval.seeds, "Number of runs (seeds seed..seed+N-1)");
  add_train_flags(c_eval, eval_flags, false);

  GradFlags grad;
  auto* c_grad = app.add_subcommand("gradcheck", "Compare reverse-mode gradients with finite differences");
  c_grad->add_option("--variant", grad.variant)->check(CLI::IsMember({"a-avs", "m-avs", "lstm-vs"}));
  c_grad->add_option("--seed", grad.seed);
  c_grad->add_option("--frames", grad.dims.frames)->check(CLI::Range(1, 64));
  c_grad->add_option("--hidden", grad.dims.hidden)->check(CLI::Range(1, 32));
  c_grad->add_option("--layers", grad.dims.layers)->check(CLI::Range(1, 4));
  c_grad->add_option("--attention-scale", grad.dims.attention_scale);

  TrainFlags sweep_flags;
  SweepFlags sweep;
  auto* c_sweep = app.add_subcommand("sweep", "F-score against attention scale");
  add_train_flags(c_sweep, sweep_flags);
  c_sweep->add_option("--scales", sweep.scales, "Comma-separated odd scales")->delimiter(',');
  c_sweep->add_option("--seeds", sweep.seeds, "Runs per scale");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_synth) return cmd_synth(synth);
    if (*c_segment) return cmd_segment(seg);
    if (*c_train) return cmd_train(train_flags, train_out);
    if (*c_sum) return cmd_summarize(sum);
    if (*c_eval) {
      const bool from_files = !eval.summary.empty();
      require(from_files != !eval_flags.data.empty(), "eval: give either --summary with --reference, or --data");
      require(!from_files || !eval.references.empty(), "eval: --summary needs at least one --reference");
      return cmd_eval(eval_flags, eval, from_files);
    }
    if (*c_grad) return cmd_gradcheck(grad);
    if (*c_sweep) return cmd_sweep(sweep_flags, sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
