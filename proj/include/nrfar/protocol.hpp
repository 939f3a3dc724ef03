#ifndef NRFAR_PROTOCOL_HPP
#define NRFAR_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrfar/eval.hpp"
#include "nrfar/noise.hpp"
#include "nrfar/synth.hpp"
#include "nrfar/trainer.hpp"

namespace nrfar {

struct NoiseCondition {
  std::string source_name;  // "clean", "white", "clips", ...
  std::optional<NoiseSource> source;  // empty for the clean condition
  SnrSpec snr = SnrSpec::clean();

  std::string id() const;  // e.g. "white@-5dB", "clean"
};

NoiseCondition clean_condition();
std::vector<NoiseCondition> grid_conditions(const std::string& source_name,
                                            const NoiseSource& source);

// One recognizer configuration evaluated across the sweep. fold_models
// must carry one entry per fold of the plan; each recording is scored by
// the models of the fold containing it.
struct MethodSpec {
  std::string name;
  PipelineConfig pipeline{};
  std::vector<FoldModels> fold_models;
};

struct CellResult {
  std::string method;
  std::string condition;           // NoiseCondition::id()
  std::string source_name;
  SnrSpec snr;
  std::vector<double> per_recording;  // balanced accuracy, recording order
  double mean = 0.0;
  double stddev = 0.0;
  ConfusionMatrix confusion_total{kNumActivities};
};

struct ProtocolResult {
  std::vector<std::string> recording_names;
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& method, const std::string& condition) const;
};

// Evaluates every (method x condition x recording) cell. Cells fan out
// to `threads` workers; results are deterministic regardless of thread
// count. Noise streams are seeded per (condition, recording).
ProtocolResult run_protocol(const Corpus& corpus, const FoldPlan& plan,
                            std::span<const MethodSpec> methods,
                            std::span<const NoiseCondition> conditions, int threads,
                            std::uint64_t seed);

struct WilcoxonTable {
  std::string title;
  std::vector<std::string> sources;  // columns
  std::vector<double> snrs_db;       // rows
  std::vector<std::vector<double>> p;  // rows x columns
};

// Paired two-sided tests per (source, SNR) cell. With one method the
// noisy scores are tested against the same method's clean scores; with
// several methods every ordered pair is compared cell by cell.
std::vector<WilcoxonTable> wilcoxon_tables(const ProtocolResult& result);

std::string results_csv(const ProtocolResult& result, const std::string& provenance);
std::string wilcoxon_csv(const WilcoxonTable& table, const std::string& provenance);
std::string summary_json(const ProtocolResult& result,
                         const std::vector<WilcoxonTable>& tables,
                         const std::string& provenance);

}  // namespace nrfar

#endif
