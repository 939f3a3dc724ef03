#ifndef NRFAR_ACTIVITY_HPP
#define NRFAR_ACTIVITY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrfar/jm.hpp"
#include "nrfar/mlp.hpp"

namespace nrfar {

enum class ActivityLabel : int { Grazing = 0, Rumination = 1, Other = 2 };
inline constexpr int kNumActivities = 3;

const char* to_string(ActivityLabel a);
std::optional<ActivityLabel> activity_from_string(const std::string& name);
std::vector<std::string> activity_order();

struct ActivityFeatures {
  double jm_rate_per_s = 0.0;
  double prop_rumination_chew = 0.0;
  double prop_grazing_chew = 0.0;
  double prop_bite = 0.0;
  double prop_chew_bite = 0.0;

  std::array<double, 5> to_array() const {
    return {jm_rate_per_s, prop_rumination_chew, prop_grazing_chew, prop_bite,
            prop_chew_bite};
  }
};

inline constexpr double kSegmentSeconds = 300.0;

struct ActivitySegment {
  std::int64_t index = 0;
  bool partial = false;       // trailing segment shorter than 300 s
  double start_s = 0.0;
  double end_s = 0.0;         // nominal window end (start + 300) unless partial
  int event_count = 0;
  ActivityFeatures features{};
  ActivityLabel raw_label = ActivityLabel::Other;
  ActivityLabel smoothed_label = ActivityLabel::Other;
};

struct Bout {
  double start_s = 0.0;
  double end_s = 0.0;
  ActivityLabel label = ActivityLabel::Other;
};

// Assigns each event to the 5-min window containing its timestamp
// (half-open windows [i*300, (i+1)*300)). Covers [0, duration_s] even
// where no events fall; the final sub-300 s window is flagged partial.
// Throws DataError when events are not time-ordered.
struct SegmentedEvents {
  std::int64_t index;
  bool partial;
  double elapsed_s;  // 300 except for the partial tail
  std::vector<JmEvent> events;
};
std::vector<SegmentedEvents> segment_events(std::span<const JmEvent> events,
                                            double duration_s);

// Rate is count/elapsed; proportions are per-class fractions of the
// events; all five features are zero for an empty segment.
ActivityFeatures activity_features(std::span<const JmEvent> events, double elapsed_s);

// Argmax of the 5-H-3 MLP; ties resolve by the fixed label order.
ActivityLabel classify_activity(const MlpModel& model, const ActivityFeatures& features);

enum class SmoothingMode {
  MajorityOfThree,  // keep the center label when all three differ
  OrdinalMedian,    // median over the numeric label encoding
};

// Third-order smoothing with edge replication; output length equals
// input length.
std::vector<ActivityLabel> smooth_labels(std::span<const ActivityLabel> raw,
                                         SmoothingMode mode = SmoothingMode::MajorityOfThree);

// Run-length merge of consecutive equal labels on the 300 s segment grid.
// When total_duration_s is given, the final bout end is clamped to it.
std::vector<Bout> labels_to_bouts(std::span<const ActivityLabel> labels,
                                  double segment_s = kSegmentSeconds,
                                  std::optional<double> total_duration_s = std::nullopt);

}  // namespace nrfar

#endif
