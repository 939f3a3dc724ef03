#ifndef NRFAR_TRAINER_HPP
#define NRFAR_TRAINER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "nrfar/eval.hpp"
#include "nrfar/pipeline.hpp"
#include "nrfar/synth.hpp"

namespace nrfar {

struct TrainerConfig {
  PipelineConfig pipeline{};
  TrainConfig grid{};              // activity-classifier grid search
  RebalanceConfig rebalance{};
  double jm_learning_rate = 0.01;  // the JM net is fixed at 5-6-4
  int jm_hidden = 6;
  double val_fraction = 0.25;      // recordings held out for grid validation
  std::uint64_t seed = 1;
  int threads = 1;
};

// Model-independent per-recording cache: gate-passing JM candidates with
// their features, peak times and truth-matched class labels (-1 when the
// candidate peak lies inside no ground-truth event).
struct HarvestedRecording {
  double duration_s = 0.0;
  std::vector<JmCandidate> candidates;
  std::vector<double> peak_times_s;
  std::vector<int> truth_class;
};

HarvestedRecording harvest_candidates(const PipelineConfig& cfg, const AudioSignal& audio,
                                      std::span<const JmEvent> truth_events);

// Classifies the cached candidates with a JM model and aggregates them
// into the per-segment activity feature dataset; each segment is labeled
// with the activity covering most of its window.
Dataset build_activity_dataset(const HarvestedRecording& harvested,
                               std::span<const Bout> truth_bouts, const MlpModel& jm_model);

struct FoldModels {
  int fold = -1;  // -1 for a model trained on the whole corpus
  RecognizerModels models;
  GridPoint grid_best{};
  std::size_t jm_train_size = 0;
  std::size_t activity_train_size = 0;
};

// Harvests every recording once (parallel over recordings), then trains
// one JM + activity model pair per fold on the recordings outside that
// fold. The corpus recordings in a fold are never rebalanced or touched
// during training.
std::vector<FoldModels> train_folds(const Corpus& corpus, const FoldPlan& plan,
                                    const TrainerConfig& cfg);

// Single model pair over the whole corpus (train/validation split by
// recording).
FoldModels train_models(const Corpus& corpus, const TrainerConfig& cfg);

}  // namespace nrfar

#endif
