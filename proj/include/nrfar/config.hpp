#ifndef NRFAR_CONFIG_HPP
#define NRFAR_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>

#include "nrfar/eval.hpp"
#include "nrfar/pipeline.hpp"
#include "nrfar/synth.hpp"
#include "nrfar/trainer.hpp"

namespace nrfar {

struct CorpusPlanConfig {
  int recordings = 24;
  double minutes = 30.0;
  std::array<double, kNumActivities> weights{0.50, 0.35, 0.15};
  double bout_unit_s = 300.0;
  int max_units_per_bout = 3;
};

struct ExperimentConfig {
  int folds = 5;
  int threads = 2;
  bool white_source = true;
  std::string clip_dir;  // empty disables the clip source
};

// Everything a run needs, in one file. Every field has a default; the
// hash of the canonical serialization is stamped into all outputs.
struct RunConfig {
  std::uint64_t seed = 1;
  PipelineConfig pipeline{};
  TrainerConfig trainer{};
  SyntheticCorpusSpec corpus{};
  CorpusPlanConfig plan{};
  ExperimentConfig experiment{};

  // Deterministic full serialization (fixed key order, round-trip number
  // formatting); equal configs hash equally on every platform.
  std::string canonical_yaml() const;
  std::uint64_t hash() const;
  std::string provenance() const;  // "config_hash=... seed=..."
};

// Loads overrides from a YAML file onto the defaults. Unknown keys are
// rejected (typo safety). The NRFAR_SEED environment variable overrides
// the seed when set.
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

}  // namespace nrfar

#endif
