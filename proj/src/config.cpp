#include "nrfar/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "nrfar/errors.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

namespace {

void append_kv(std::ostringstream& out, int indent, const char* key, const std::string& v) {
  for (int i = 0; i < indent; ++i) out << ' ';
  out << key << ": " << v << "\n";
}

void append_kv(std::ostringstream& out, int indent, const char* key, double v) {
  append_kv(out, indent, key, format_double(v));
}

void append_kv(std::ostringstream& out, int indent, const char* key, int v) {
  append_kv(out, indent, key, std::to_string(v));
}

void append_kv(std::ostringstream& out, int indent, const char* key, std::uint64_t v) {
  append_kv(out, indent, key, std::to_string(v));
}

void append_kv(std::ostringstream& out, int indent, const char* key, bool v) {
  append_kv(out, indent, key, std::string(v ? "true" : "false"));
}

}  // namespace

std::string RunConfig::canonical_yaml() const {
  std::ostringstream out;
  append_kv(out, 0, "seed", seed);

  out << "frontend:\n";
  append_kv(out, 2, "sample_rate_hz", pipeline.frontend.sample_rate_hz);
  append_kv(out, 2, "stream_rate_hz", pipeline.frontend.stream_rate_hz);
  append_kv(out, 2, "low_cut_hz", pipeline.frontend.band_pass.low_cut_hz);
  append_kv(out, 2, "high_cut_hz", pipeline.frontend.band_pass.high_cut_hz);
  append_kv(out, 2, "envelope_tau_s", pipeline.frontend.envelope_tau_s);

  const JmDetectorConfig& det = pipeline.detector;
  out << "detector:\n";
  append_kv(out, 2, "floor_ema_gain", det.thresholds.floor_ema_gain);
  append_kv(out, 2, "snr_ema_gain", det.thresholds.snr_ema_gain);
  append_kv(out, 2, "multiplier_min", det.thresholds.multiplier_min);
  append_kv(out, 2, "multiplier_max", det.thresholds.multiplier_max);
  append_kv(out, 2, "snr_high_db", det.thresholds.snr_high_db);
  append_kv(out, 2, "snr_low_db", det.thresholds.snr_low_db);
  append_kv(out, 2, "initial_snr_db", det.thresholds.initial_snr_db);
  append_kv(out, 2, "min_duration_s", det.min_duration_s);
  append_kv(out, 2, "max_duration_s", det.max_duration_s);
  append_kv(out, 2, "energy_gate_floor_mult", det.energy_gate_floor_mult);
  append_kv(out, 2, "update_interval_s", det.update_interval_s);
  append_kv(out, 2, "max_candidate_s", det.max_candidate_s);
  append_kv(out, 2, "mass_based_symmetry", det.mass_based_symmetry);

  append_kv(out, 0, "smoothing",
            std::string(pipeline.smoothing == SmoothingMode::MajorityOfThree ? "majority"
                                                                             : "ordinal"));

  out << "training:\n";
  {
    std::ostringstream lr;
    lr << "[";
    for (std::size_t i = 0; i < trainer.grid.learning_rates.size(); ++i) {
      if (i) lr << ", ";
      lr << format_double(trainer.grid.learning_rates[i]);
    }
    lr << "]";
    append_kv(out, 2, "learning_rates", lr.str());
  }
  append_kv(out, 2, "hidden_min", trainer.grid.hidden_min);
  append_kv(out, 2, "hidden_max", trainer.grid.hidden_max);
  append_kv(out, 2, "max_iterations", trainer.grid.max_iterations);
  append_kv(out, 2, "tolerance", trainer.grid.tolerance);
  append_kv(out, 2, "patience", trainer.grid.patience);
  append_kv(out, 2, "jm_learning_rate", trainer.jm_learning_rate);
  append_kv(out, 2, "jm_hidden", trainer.jm_hidden);
  append_kv(out, 2, "val_fraction", trainer.val_fraction);

  out << "rebalance:\n";
  append_kv(out, 2, "majority_keep_frac", trainer.rebalance.majority_keep_frac);
  append_kv(out, 2, "minority_growth", trainer.rebalance.minority_growth);
  append_kv(out, 2, "adasyn_k", trainer.rebalance.adasyn_k);

  out << "corpus:\n";
  append_kv(out, 2, "background_rms", corpus.background_rms);
  append_kv(out, 2, "rate_lo_per_s", corpus.rate_lo_per_s);
  append_kv(out, 2, "rate_hi_per_s", corpus.rate_hi_per_s);
  append_kv(out, 2, "jitter_frac", corpus.jitter_frac);
  append_kv(out, 2, "lead_in_s", corpus.lead_in_s);
  append_kv(out, 2, "recordings", plan.recordings);
  append_kv(out, 2, "minutes", plan.minutes);
  {
    std::ostringstream w;
    w << "[" << format_double(plan.weights[0]) << ", " << format_double(plan.weights[1])
      << ", " << format_double(plan.weights[2]) << "]";
    append_kv(out, 2, "weights", w.str());
  }
  append_kv(out, 2, "bout_unit_s", plan.bout_unit_s);
  append_kv(out, 2, "max_units_per_bout", plan.max_units_per_bout);

  out << "experiment:\n";
  append_kv(out, 2, "folds", experiment.folds);
  append_kv(out, 2, "threads", experiment.threads);
  append_kv(out, 2, "white_source", experiment.white_source);
  append_kv(out, 2, "clip_dir", experiment.clip_dir.empty() ? std::string("\"\"")
                                                            : experiment.clip_dir);
  return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_yaml()); }

std::string RunConfig::provenance() const {
  return "config_hash=" + format_hex64(hash()) + " seed=" + std::to_string(seed);
}

namespace {

void apply_env_seed(RunConfig& cfg) {
  if (const char* env = std::getenv("NRFAR_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("NRFAR_SEED is not an integer");
    }
  }
  cfg.trainer.seed = cfg.seed;
  cfg.trainer.grid.seed = cfg.seed;
  cfg.trainer.rebalance.seed = cfg.seed;
  cfg.corpus.seed = cfg.seed;
}

template <typename T>
void get_if(const YAML::Node& node, const char* key, T& out,
            std::vector<std::string>& seen) {
  seen.push_back(key);
  if (node[key]) out = node[key].as<T>();
}

void reject_unknown(const YAML::Node& node, const std::vector<std::string>& known,
                    const std::string& scope) {
  if (!node || !node.IsMap()) return;
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + scope + key + "'");
  }
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  apply_env_seed(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: cannot parse " + path + ": " + e.what());
  }

  std::vector<std::string> top;
  try {
    top = {"seed", "frontend", "detector", "smoothing", "training", "rebalance",
           "corpus", "experiment"};
    if (root["seed"]) cfg.seed = root["seed"].as<std::uint64_t>();

    std::vector<std::string> seen;
    if (const YAML::Node n = root["frontend"]) {
      seen.clear();
      get_if(n, "sample_rate_hz", cfg.pipeline.frontend.sample_rate_hz, seen);
      get_if(n, "stream_rate_hz", cfg.pipeline.frontend.stream_rate_hz, seen);
      get_if(n, "low_cut_hz", cfg.pipeline.frontend.band_pass.low_cut_hz, seen);
      get_if(n, "high_cut_hz", cfg.pipeline.frontend.band_pass.high_cut_hz, seen);
      get_if(n, "envelope_tau_s", cfg.pipeline.frontend.envelope_tau_s, seen);
      reject_unknown(n, seen, "frontend.");
    }
    if (const YAML::Node n = root["detector"]) {
      seen.clear();
      JmDetectorConfig& det = cfg.pipeline.detector;
      get_if(n, "floor_ema_gain", det.thresholds.floor_ema_gain, seen);
      get_if(n, "snr_ema_gain", det.thresholds.snr_ema_gain, seen);
      get_if(n, "multiplier_min", det.thresholds.multiplier_min, seen);
      get_if(n, "multiplier_max", det.thresholds.multiplier_max, seen);
      get_if(n, "snr_high_db", det.thresholds.snr_high_db, seen);
      get_if(n, "snr_low_db", det.thresholds.snr_low_db, seen);
      get_if(n, "initial_snr_db", det.thresholds.initial_snr_db, seen);
      get_if(n, "min_duration_s", det.min_duration_s, seen);
      get_if(n, "max_duration_s", det.max_duration_s, seen);
      get_if(n, "energy_gate_floor_mult", det.energy_gate_floor_mult, seen);
      get_if(n, "update_interval_s", det.update_interval_s, seen);
      get_if(n, "max_candidate_s", det.max_candidate_s, seen);
      get_if(n, "mass_based_symmetry", det.mass_based_symmetry, seen);
      reject_unknown(n, seen, "detector.");
    }
    if (root["smoothing"]) {
      const auto mode = root["smoothing"].as<std::string>();
      if (mode == "majority")
        cfg.pipeline.smoothing = SmoothingMode::MajorityOfThree;
      else if (mode == "ordinal")
        cfg.pipeline.smoothing = SmoothingMode::OrdinalMedian;
      else
        throw ConfigError("config: smoothing must be 'majority' or 'ordinal'");
    }
    if (const YAML::Node n = root["training"]) {
      seen.clear();
      get_if(n, "learning_rates", cfg.trainer.grid.learning_rates, seen);
      get_if(n, "hidden_min", cfg.trainer.grid.hidden_min, seen);
      get_if(n, "hidden_max", cfg.trainer.grid.hidden_max, seen);
      get_if(n, "max_iterations", cfg.trainer.grid.max_iterations, seen);
      get_if(n, "tolerance", cfg.trainer.grid.tolerance, seen);
      get_if(n, "patience", cfg.trainer.grid.patience, seen);
      get_if(n, "jm_learning_rate", cfg.trainer.jm_learning_rate, seen);
      get_if(n, "jm_hidden", cfg.trainer.jm_hidden, seen);
      get_if(n, "val_fraction", cfg.trainer.val_fraction, seen);
      reject_unknown(n, seen, "training.");
    }
    if (const YAML::Node n = root["rebalance"]) {
      seen.clear();
      get_if(n, "majority_keep_frac", cfg.trainer.rebalance.majority_keep_frac, seen);
      get_if(n, "minority_growth", cfg.trainer.rebalance.minority_growth, seen);
      get_if(n, "adasyn_k", cfg.trainer.rebalance.adasyn_k, seen);
      reject_unknown(n, seen, "rebalance.");
    }
    if (const YAML::Node n = root["corpus"]) {
      seen.clear();
      get_if(n, "background_rms", cfg.corpus.background_rms, seen);
      get_if(n, "rate_lo_per_s", cfg.corpus.rate_lo_per_s, seen);
      get_if(n, "rate_hi_per_s", cfg.corpus.rate_hi_per_s, seen);
      get_if(n, "jitter_frac", cfg.corpus.jitter_frac, seen);
      get_if(n, "lead_in_s", cfg.corpus.lead_in_s, seen);
      get_if(n, "recordings", cfg.plan.recordings, seen);
      get_if(n, "minutes", cfg.plan.minutes, seen);
      seen.push_back("weights");
      if (n["weights"]) {
        const auto w = n["weights"].as<std::vector<double>>();
        if (w.size() != kNumActivities)
          throw ConfigError("config: corpus.weights needs 3 entries");
        for (int i = 0; i < kNumActivities; ++i) cfg.plan.weights[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)];
      }
      get_if(n, "bout_unit_s", cfg.plan.bout_unit_s, seen);
      get_if(n, "max_units_per_bout", cfg.plan.max_units_per_bout, seen);
      reject_unknown(n, seen, "corpus.");
    }
    if (const YAML::Node n = root["experiment"]) {
      seen.clear();
      get_if(n, "folds", cfg.experiment.folds, seen);
      get_if(n, "threads", cfg.experiment.threads, seen);
      get_if(n, "white_source", cfg.experiment.white_source, seen);
      get_if(n, "clip_dir", cfg.experiment.clip_dir, seen);
      reject_unknown(n, seen, "experiment.");
    }
    reject_unknown(root, top, "");
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: bad value in " + path + ": " + e.what());
  }

  apply_env_seed(cfg);

  // The generator renders at the pipeline's input rate.
  cfg.corpus.sample_rate_hz = cfg.pipeline.frontend.sample_rate_hz;
  return cfg;
}

}  // namespace nrfar
