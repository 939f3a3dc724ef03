// Command-line front end for the three-level foraging activity
// recognizer: recognize / experiment / synth / mix / train / ops.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "nrfar/config.hpp"
#include "nrfar/errors.hpp"
#include "nrfar/ops.hpp"
#include "nrfar/protocol.hpp"
#include "nrfar/rng.hpp"
#include "nrfar/svg.hpp"
#include "nrfar/textio.hpp"

namespace fs = std::filesystem;
using namespace nrfar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

RunConfig config_from(const std::string& path) {
  if (path.empty()) return default_run_config();
  return load_run_config(path);
}

std::vector<std::vector<ScriptBout>> scripts_from_yaml(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("script: cannot parse " + path + ": " + e.what());
  }
  if (!root["recordings"]) throw ConfigError("script: missing 'recordings' list");
  std::vector<std::vector<ScriptBout>> scripts;
  for (const auto& recj : root["recordings"]) {
    std::vector<ScriptBout> script;
    for (const auto& boutj : recj["bouts"]) {
      if (!boutj.IsSequence() || boutj.size() != 2)
        throw ConfigError("script: each bout must be [label, duration_s]");
      const auto label = activity_from_string(boutj[0].as<std::string>());
      if (!label) throw ConfigError("script: unknown activity " + boutj[0].as<std::string>());
      script.push_back({*label, boutj[1].as<double>()});
    }
    if (script.empty()) throw ConfigError("script: recording with no bouts");
    scripts.push_back(std::move(script));
  }
  if (scripts.empty()) throw ConfigError("script: no recordings");
  return scripts;
}

void check_corpus_files(const Corpus& corpus) {
  std::vector<std::string> missing;
  for (const auto& rec : corpus.recordings) {
    for (const std::string& p :
         {rec.wav_path, (fs::path(corpus.dir) / (rec.name + ".labels.csv")).string(),
          (fs::path(corpus.dir) / (rec.name + ".events.jsonl")).string()}) {
      if (!fs::exists(p)) missing.push_back(p);
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "corpus is missing " << missing.size() << " file(s):";
    for (const auto& p : missing) msg << "\n  " << p;
    throw DataError(msg.str());
  }
}

void write_fold_models(const std::vector<FoldModels>& folds, const fs::path& dir) {
  fs::create_directories(dir);
  for (const FoldModels& fm : folds) {
    const std::string tag = fm.fold < 0 ? "all" : "fold" + std::to_string(fm.fold);
    save_model(fm.models.jm, (dir / (tag + ".jm.json")).string());
    save_model(fm.models.activity, (dir / (tag + ".activity.json")).string());
  }
}

std::vector<FoldModels> read_fold_models(const fs::path& dir, int n_folds) {
  std::vector<FoldModels> folds;
  for (int f = 0; f < n_folds; ++f) {
    const std::string tag = "fold" + std::to_string(f);
    FoldModels fm;
    fm.fold = f;
    fm.models.jm = load_model((dir / (tag + ".jm.json")).string());
    fm.models.activity = load_model((dir / (tag + ".activity.json")).string());
    folds.push_back(std::move(fm));
  }
  return folds;
}

int cmd_recognize(const std::string& config_path, const std::string& input,
                  const std::string& jm_model_path, const std::string& activity_model_path,
                  const std::string& out_dir, const std::string& dump_streams) {
  const RunConfig cfg = config_from(config_path);
  RecognizerModels models;
  models.jm = load_model(jm_model_path);
  models.activity = load_model(activity_model_path);

  const AudioSignal audio = read_wav(input);
  if (audio.sample_rate_hz != cfg.pipeline.frontend.sample_rate_hz)
    throw DataError("input sample rate " + std::to_string(audio.sample_rate_hz) +
                    " Hz does not match the configured rate " +
                    std::to_string(cfg.pipeline.frontend.sample_rate_hz) + " Hz");

  const RecognitionResult result = recognize(cfg.pipeline, models, audio);

  fs::create_directories(out_dir);
  const std::string prov = cfg.provenance() + " input=" + fs::path(input).filename().string();
  write_text_file((fs::path(out_dir) / "segments.csv").string(),
                  segments_csv(result.segments, prov));
  write_text_file((fs::path(out_dir) / "bouts.csv").string(), bouts_csv(result.bouts, prov));
  write_text_file((fs::path(out_dir) / "events.jsonl").string(),
                  events_jsonl(result.events, prov));
  if (!dump_streams.empty()) {
    DspFrontend frontend(cfg.pipeline.frontend);
    const DerivedSignals d = frontend.run(audio, false);
    write_text_file(dump_streams, derived_streams_csv(d, prov));
  }

  std::cout << "recognized " << result.events.size() << " JM events in "
            << result.segments.size() << " segments over "
            << format_double(result.duration_s) << " s\n";
  return kExitOk;
}

int cmd_synth(const std::string& config_path, const std::string& script_path,
              const std::string& out_dir) {
  const RunConfig cfg = config_from(config_path);
  std::vector<std::vector<ScriptBout>> scripts;
  if (!script_path.empty()) {
    scripts = scripts_from_yaml(script_path);
  } else {
    scripts = make_scripts(cfg.plan.recordings, cfg.plan.minutes * 60.0, cfg.plan.weights,
                           cfg.plan.bout_unit_s, cfg.plan.max_units_per_bout,
                           derive_seed(cfg.seed, "scripts"));
  }
  const Corpus corpus = write_corpus(out_dir, cfg.corpus, scripts);
  std::cout << "wrote " << corpus.recordings.size() << " recordings ("
            << format_double(corpus.total_duration_s() / 3600.0) << " h) to " << out_dir
            << "\n";
  return kExitOk;
}

int cmd_mix(const std::string& input, const std::string& output, const std::string& snr_arg,
            const std::string& noise_kind, const std::string& clip_dir, std::uint64_t seed) {
  const AudioSignal audio = read_wav(input);

  SnrSpec snr = SnrSpec::clean();
  if (snr_arg != "clean") {
    try {
      snr = SnrSpec::db(std::stod(snr_arg));
    } catch (const std::exception&) {
      throw ConfigError("--snr must be a dB value or 'clean'");
    }
  }

  MixResult mixed;
  if (snr.is_clean()) {
    mixed = mix_at_snr(audio, {}, snr);
  } else {
    std::vector<double> noise;
    if (noise_kind == "white") {
      noise = white_noise(audio.samples.size(), seed);
    } else if (noise_kind == "clips") {
      if (clip_dir.empty()) throw ConfigError("--noise clips requires --clip-dir");
      const ClipLibrary library(clip_dir, audio.sample_rate_hz);
      noise = library.concat(audio.samples.size(), seed);
    } else {
      throw ConfigError("--noise must be 'white' or 'clips'");
    }
    mixed = mix_at_snr(audio, noise, snr);
  }
  write_wav(output, mixed.mixed);

  if (snr.is_clean())
    std::cout << "clean copy (peak-normalized) -> " << output << "\n";
  else
    std::cout << "measured component SNR: " << format_double(mixed.achieved_snr_db())
              << " dB -> " << output << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& corpus_dir,
              const std::string& out_dir, int folds, int threads) {
  RunConfig cfg = config_from(config_path);
  if (threads > 0) cfg.trainer.threads = threads;

  const Corpus corpus = load_corpus(corpus_dir);
  check_corpus_files(corpus);

  fs::create_directories(out_dir);
  std::vector<FoldModels> trained;
  if (folds > 0) {
    std::vector<std::vector<Bout>> bouts;
    for (const auto& r : corpus.recordings) bouts.push_back(r.truth_bouts);
    const FoldPlan plan = make_fold_plan(bouts, folds);
    trained = train_folds(corpus, plan, cfg.trainer);
  } else {
    trained.push_back(train_models(corpus, cfg.trainer));
  }
  write_fold_models(trained, out_dir);

  std::ostringstream report;
  report << "# " << cfg.provenance() << "\n";
  report << "fold,jm_train_size,activity_train_size,grid_lr,grid_hidden,grid_val_bacc\n";
  for (const FoldModels& fm : trained)
    report << fm.fold << ',' << fm.jm_train_size << ',' << fm.activity_train_size << ','
           << format_double(fm.grid_best.learning_rate) << ',' << fm.grid_best.hidden << ','
           << format_double(fm.grid_best.val_balanced_accuracy) << "\n";
  write_text_file((fs::path(out_dir) / "training.csv").string(), report.str());
  std::cout << report.str();
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& corpus_dir,
                   const std::string& out_dir, const std::string& models_dir, bool do_train,
                   bool dry_run, int threads) {
  RunConfig cfg = config_from(config_path);
  if (threads > 0) {
    cfg.experiment.threads = threads;
    cfg.trainer.threads = threads;
  }

  const Corpus corpus = load_corpus(corpus_dir);
  check_corpus_files(corpus);

  std::vector<std::vector<Bout>> bouts;
  for (const auto& r : corpus.recordings) bouts.push_back(r.truth_bouts);
  const FoldPlan plan = make_fold_plan(bouts, cfg.experiment.folds);

  std::vector<NoiseCondition> conditions{clean_condition()};
  if (cfg.experiment.white_source) {
    const auto white = grid_conditions("white", NoiseSource::white());
    conditions.insert(conditions.end(), white.begin(), white.end());
  }
  if (!cfg.experiment.clip_dir.empty()) {
    const auto library = std::make_shared<const ClipLibrary>(
        cfg.experiment.clip_dir, cfg.pipeline.frontend.sample_rate_hz);
    const auto clips = grid_conditions("clips", NoiseSource::clips(library));
    conditions.insert(conditions.end(), clips.begin(), clips.end());
  }

  if (dry_run) {
    std::cout << "plan: " << corpus.recordings.size() << " recordings ("
              << format_double(corpus.total_duration_s() / 3600.0) << " h), "
              << plan.folds.size() << " folds, " << conditions.size() << " conditions, "
              << conditions.size() * corpus.recordings.size() << " cells\n";
    for (const auto& c : conditions) std::cout << "  condition " << c.id() << "\n";
    std::cout << "models: " << (do_train ? "train in-run" : "load from " +
                                (models_dir.empty() ? std::string("<missing>") : models_dir))
              << "\n";
    return kExitOk;
  }

  std::vector<FoldModels> folds;
  if (do_train) {
    folds = train_folds(corpus, plan, cfg.trainer);
  } else {
    if (models_dir.empty())
      throw ConfigError("experiment: give --models DIR or --train");
    folds = read_fold_models(models_dir, cfg.experiment.folds);
  }

  MethodSpec method;
  method.name = "nrfar";
  method.pipeline = cfg.pipeline;
  method.fold_models = folds;

  const ProtocolResult result =
      run_protocol(corpus, plan, std::span(&method, 1), conditions,
                   cfg.experiment.threads, cfg.seed);
  const auto tables = wilcoxon_tables(result);

  fs::create_directories(out_dir);
  const std::string prov = cfg.provenance();
  if (do_train) write_fold_models(folds, fs::path(out_dir) / "models");
  write_text_file((fs::path(out_dir) / "results.csv").string(), results_csv(result, prov));
  write_text_file((fs::path(out_dir) / "summary.json").string(),
                  summary_json(result, tables, prov));
  for (std::size_t i = 0; i < tables.size(); ++i)
    write_text_file((fs::path(out_dir) / ("wilcoxon_" + std::to_string(i) + ".csv")).string(),
                    wilcoxon_csv(tables[i], prov));

  // One balanced-accuracy curve per noise source, clean point first.
  std::vector<std::string> sources;
  for (const auto& c : conditions)
    if (!c.snr.is_clean() &&
        std::find(sources.begin(), sources.end(), c.source_name) == sources.end())
      sources.push_back(c.source_name);
  for (const std::string& source : sources) {
    std::vector<std::string> x_labels{"clean"};
    SvgSeries series;
    series.label = method.name;
    const CellResult* clean_cell = result.find(method.name, "clean");
    series.y.push_back(clean_cell ? clean_cell->mean : std::nan(""));
    series.yerr.push_back(clean_cell ? clean_cell->stddev : 0.0);
    for (const double snr : SnrSpec::grid()) {
      x_labels.push_back(format_double(snr));
      const CellResult* cell =
          result.find(method.name, source + "@" + format_double(snr) + "dB");
      series.y.push_back(cell ? cell->mean : std::nan(""));
      series.yerr.push_back(cell ? cell->stddev : 0.0);
    }
    write_text_file((fs::path(out_dir) / ("curve_" + source + ".svg")).string(),
                    svg_line_chart("balanced accuracy vs SNR (" + source + " noise)",
                                   x_labels, "SNR [dB]", "balanced accuracy", {series}));
  }

  std::cout << results_csv(result, prov);
  return kExitOk;
}

int cmd_ops(double f_i, double f_s, double events_per_s, double segment_s, int hidden_max,
            const std::string& fmt, const std::vector<double>& compare_totals) {
  ops::CostParams params;
  params.f_i_hz = f_i;
  params.f_s_hz = f_s;
  params.jm_events_per_s = events_per_s;
  params.segment_s = segment_s;
  params.activity_mlp_hidden = hidden_max;
  const ops::OpsBudget budget = ops::cost(params);
  std::cout << (fmt == "markdown" ? ops::budget_markdown(budget) : ops::budget_csv(budget));

  if (!compare_totals.empty()) {
    std::vector<std::pair<std::string, double>> totals{
        {"this", static_cast<double>(budget.total_ops_per_s)}};
    for (std::size_t i = 0; i < compare_totals.size(); ++i)
      totals.emplace_back("other" + std::to_string(i), compare_totals[i]);
    for (const auto& row : ops::compare(totals))
      std::cout << row.name_a << " vs " << row.name_b << ": "
                << format_double(row.percent) << "%\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NRFAR: noise-robust acoustic recognition of cattle foraging activities"};
  app.require_subcommand(1);

  std::string config_path, input, output, out_dir, jm_model, activity_model, dump_streams;
  std::string script_path, corpus_dir, models_dir, snr_arg = "clean", noise_kind = "white";
  std::string clip_dir, ops_format = "csv";
  std::uint64_t seed = 1;
  int folds = 0, threads = 0, hidden_max = 10;
  bool do_train = false, dry_run = false;
  double f_i = 2000, f_s = 150, events_per_s = 2, segment_s = 300;
  std::vector<double> compare_totals;

  auto* rec = app.add_subcommand("recognize", "Run the recognizer over one WAV file");
  rec->add_option("--config", config_path, "YAML run configuration");
  rec->add_option("--input", input, "input WAV (PCM 16-bit mono)")->required();
  rec->add_option("--jm-model", jm_model, "JM classifier artifact")->required();
  rec->add_option("--activity-model", activity_model, "activity classifier artifact")->required();
  rec->add_option("--out", out_dir, "output directory")->required();
  rec->add_option("--dump-streams", dump_streams, "also write envelope/energy CSV");

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  synth->add_option("--config", config_path, "YAML run configuration");
  synth->add_option("--script", script_path, "explicit bout script YAML");
  synth->add_option("--out", out_dir, "corpus directory")->required();

  auto* mix = app.add_subcommand("mix", "Add noise to a WAV at an exact SNR");
  mix->add_option("--input", input)->required();
  mix->add_option("--output", output)->required();
  mix->add_option("--snr", snr_arg, "target SNR in dB, or 'clean'");
  mix->add_option("--noise", noise_kind, "white | clips");
  mix->add_option("--clip-dir", clip_dir, "directory of noise clips");
  mix->add_option("--seed", seed, "noise stream seed");

  auto* train = app.add_subcommand("train", "Train JM + activity models on a corpus");
  train->add_option("--config", config_path, "YAML run configuration");
  train->add_option("--corpus", corpus_dir)->required();
  train->add_option("--out", out_dir, "model output directory")->required();
  train->add_option("--folds", folds, "train one model pair per fold (0 = single pair)");
  train->add_option("--threads", threads, "worker threads");

  auto* exp = app.add_subcommand("experiment", "Noise-robustness sweep with result tables");
  exp->add_option("--config", config_path, "YAML run configuration");
  exp->add_option("--corpus", corpus_dir)->required();
  exp->add_option("--out", out_dir)->required();
  exp->add_option("--models", models_dir, "per-fold model directory (from train --folds)");
  exp->add_flag("--train", do_train, "train fold models before the sweep");
  exp->add_flag("--dry-run", dry_run, "print the plan and exit");
  exp->add_option("--threads", threads, "worker threads");

  auto* ops_cmd = app.add_subcommand("ops", "Operation-count model table");
  ops_cmd->add_option("--f-i", f_i, "input sampling rate [Hz]");
  ops_cmd->add_option("--f-s", f_s, "stream rate [Hz]");
  ops_cmd->add_option("--events", events_per_s, "JM events per second");
  ops_cmd->add_option("--segment-s", segment_s, "segment length [s]");
  ops_cmd->add_option("--hidden-max", hidden_max, "activity MLP hidden width");
  ops_cmd->add_option("--format", ops_format, "csv | markdown");
  ops_cmd->add_option("--compare", compare_totals, "other ops/s totals to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand(rec))
      return cmd_recognize(config_path, input, jm_model, activity_model, out_dir, dump_streams);
    if (app.got_subcommand(synth)) return cmd_synth(config_path, script_path, out_dir);
    if (app.got_subcommand(mix))
      return cmd_mix(input, output, snr_arg, noise_kind, clip_dir, seed);
    if (app.got_subcommand(train))
      return cmd_train(config_path, corpus_dir, out_dir, folds, threads);
    if (app.got_subcommand(exp))
      return cmd_experiment(config_path, corpus_dir, out_dir, models_dir, do_train, dry_run,
                            threads);
    if (app.got_subcommand(ops_cmd))
      return cmd_ops(f_i, f_s, events_per_s, segment_s, hidden_max, ops_format,
                     compare_totals);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
