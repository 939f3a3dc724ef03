#ifndef NRFAR_JM_HPP
#define NRFAR_JM_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrfar/dsp.hpp"
#include "nrfar/mlp.hpp"

namespace nrfar {

enum class JmClass : int { RuminationChew = 0, GrazingChew = 1, Bite = 2, ChewBite = 3 };
inline constexpr int kNumJmClasses = 4;

const char* to_string(JmClass c);
std::optional<JmClass> jm_class_from_string(const std::string& name);
std::vector<std::string> jm_class_order();  // fixed argmax tie-break order

struct JmFeatures {
  double duration_s = 0.0;
  double energy = 0.0;
  double envelope_symmetry = 0.0;              // in [0, 1]
  int env_derivative_zero_crossings = 0;
  double accumulated_abs_derivative = 0.0;

  std::array<double, 5> to_array() const {
    return {duration_s, energy, envelope_symmetry,
            static_cast<double>(env_derivative_zero_crossings),
            accumulated_abs_derivative};
  }
};

struct JmEvent {
  double timestamp_s = 0.0;  // envelope peak time
  JmClass cls = JmClass::RuminationChew;
  JmFeatures features{};
  double start_s = 0.0;
  double end_s = 0.0;
};

struct ThresholdConfig {
  double floor_ema_gain = 0.1;   // per update
  double snr_ema_gain = 0.2;
  double multiplier_min = 2.0;   // threshold/floor at high SNR
  double multiplier_max = 6.0;   // threshold/floor at low SNR
  double snr_high_db = 20.0;     // multiplier_min at or above
  double snr_low_db = -10.0;     // multiplier_max at or below
  double initial_snr_db = 20.0;
};

struct AdaptiveThresholds {
  double envelope_floor = 0.0;
  double energy_floor = 0.0;
  double snr_estimate_db = 0.0;
  double envelope_threshold = 0.0;
  double energy_threshold = 0.0;
  bool initialized = false;  // floors unset until the first quiet update
};

// Tracks noise floors as EMAs of inter-event envelope/energy levels and
// derives both detection thresholds as floor times a piecewise-linear,
// nonincreasing function of the estimated SNR (more noise, wider margin).
// The first quiet update seeds the floors directly, so all state scales
// with input power from the start.
class ThresholdAdapter {
 public:
  explicit ThresholdAdapter(const ThresholdConfig& cfg);

  void update_quiet(double envelope_mean, double energy_mean);
  void update_event(double event_energy_mean);

  double multiplier() const;
  const AdaptiveThresholds& state() const { return state_; }

 private:
  void recompute();
  ThresholdConfig cfg_;
  AdaptiveThresholds state_;
};

// Candidate emitted by the detector before the classify-or-discard gate.
// Indices are f_s ticks; bounds are inclusive.
struct JmCandidate {
  std::int64_t peak_idx = 0;
  std::int64_t start_idx = 0;
  std::int64_t end_idx = 0;
  JmFeatures features{};
  double envelope_peak = 0.0;
  double energy_floor = 0.0;  // floor at detection time, for the gate
};

struct JmDetectorConfig {
  ThresholdConfig thresholds{};
  double min_duration_s = 0.05;      // classify-or-discard gate
  double max_duration_s = 2.0;
  double energy_gate_floor_mult = 3.0;
  double update_interval_s = 1.0;    // idle threshold-update cadence
  double max_candidate_s = 3.0;      // force-close runaway candidates
  bool mass_based_symmetry = true;   // false: peak position / duration
};

// Computes the five JM features over one delimited envelope/energy
// segment. Throws DataError when the segment has fewer than 2 samples.
JmFeatures extract_features(std::span<const double> envelope,
                            std::span<const double> energy, int stream_rate_hz,
                            bool mass_based_symmetry = true);

// Classify-or-discard gate followed by the 5-6-4 MLP; returns nothing for
// discarded candidates. Throws ConfigError when the model shape is not
// 5 inputs / 4 outputs.
std::optional<JmClass> classify_jm(const MlpModel& model, const JmFeatures& features,
                                   double energy_floor, const JmDetectorConfig& cfg);

// Streaming candidate detector over the f_s envelope/energy streams.
// A candidate opens when a local envelope maximum exceeds the envelope
// threshold and is delimited by the nearest ticks on both sides where the
// energy stream sits below the energy threshold. Candidates never
// overlap and the stream is deterministic for a given input.
class JmEventDetector {
 public:
  JmEventDetector(const JmDetectorConfig& cfg, int stream_rate_hz);

  void push(const StreamTick& tick, std::vector<JmCandidate>& out);
  void process(std::span<const StreamTick> ticks, std::vector<JmCandidate>& out);
  // Unclosed trailing candidates are dropped: without a closing quiet
  // tick their end bound is undefined.
  void finish();

  const AdaptiveThresholds& thresholds() const { return adapter_.state(); }
  std::int64_t ticks_consumed() const { return idx_; }

 private:
  void close_event(std::int64_t end_idx, bool forced, std::vector<JmCandidate>& out);
  void prune_window();

  JmDetectorConfig cfg_;
  int f_s_;
  ThresholdAdapter adapter_;
  std::int64_t update_interval_ticks_;
  std::int64_t max_candidate_ticks_;

  std::deque<StreamTick> window_;
  std::int64_t window_base_ = 0;
  std::int64_t idx_ = 0;             // next tick index
  std::int64_t last_quiet_idx_ = -1;
  std::int64_t min_start_idx_ = 0;
  bool in_event_ = false;
  std::int64_t event_open_idx_ = 0;

  double prev_env_ = 0.0, prev_prev_env_ = 0.0;
  double quiet_env_sum_ = 0.0, quiet_eng_sum_ = 0.0;
  std::int64_t quiet_count_ = 0;
  std::int64_t interval_count_ = 0;
};

// Detector + gate + classifier: the full JM-event recognizer.
class JmRecognizer {
 public:
  JmRecognizer(const JmDetectorConfig& cfg, MlpModel jm_model, int stream_rate_hz);

  void push(const StreamTick& tick, std::vector<JmEvent>& out);
  void finish();

  const AdaptiveThresholds& thresholds() const { return detector_.thresholds(); }

 private:
  JmDetectorConfig cfg_;
  MlpModel model_;
  int f_s_;
  JmEventDetector detector_;
  std::vector<JmCandidate> scratch_;
};

}  // namespace nrfar

#endif
