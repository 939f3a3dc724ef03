#include "nrfar/activity.hpp"

#include <algorithm>
#include <cmath>

#include "nrfar/errors.hpp"

namespace nrfar {

const char* to_string(ActivityLabel a) {
  switch (a) {
    case ActivityLabel::Grazing: return "grazing";
    case ActivityLabel::Rumination: return "rumination";
    case ActivityLabel::Other: return "other";
  }
  return "?";
}

std::optional<ActivityLabel> activity_from_string(const std::string& name) {
  for (int i = 0; i < kNumActivities; ++i)
    if (name == to_string(static_cast<ActivityLabel>(i)))
      return static_cast<ActivityLabel>(i);
  return std::nullopt;
}

std::vector<std::string> activity_order() {
  std::vector<std::string> order;
  for (int i = 0; i < kNumActivities; ++i)
    order.emplace_back(to_string(static_cast<ActivityLabel>(i)));
  return order;
}

std::vector<SegmentedEvents> segment_events(std::span<const JmEvent> events,
                                            double duration_s) {
  if (duration_s < 0.0) throw ConfigError("segment_events: negative duration");
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].timestamp_s < events[i - 1].timestamp_s)
      throw DataError("segment_events: events out of order");

  const std::int64_t full = static_cast<std::int64_t>(duration_s / kSegmentSeconds);
  const double tail = duration_s - static_cast<double>(full) * kSegmentSeconds;
  std::int64_t count = full + (tail > 0.0 ? 1 : 0);
  // Events exactly at the file end still need a window.
  if (!events.empty()) {
    const std::int64_t last_needed =
        static_cast<std::int64_t>(events.back().timestamp_s / kSegmentSeconds) + 1;
    count = std::max(count, last_needed);
  }

  std::vector<SegmentedEvents> segments;
  segments.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    SegmentedEvents s;
    s.index = i;
    s.partial = (i == count - 1) && tail > 0.0 && i >= full;
    s.elapsed_s = s.partial ? tail : kSegmentSeconds;
    segments.push_back(std::move(s));
  }
  for (const JmEvent& e : events) {
    const auto idx = static_cast<std::int64_t>(e.timestamp_s / kSegmentSeconds);
    segments[static_cast<std::size_t>(idx)].events.push_back(e);
  }
  return segments;
}

ActivityFeatures activity_features(std::span<const JmEvent> events, double elapsed_s) {
  ActivityFeatures f;
  if (events.empty()) return f;
  if (elapsed_s <= 0.0) throw ConfigError("activity_features: elapsed must be positive");
  std::array<double, kNumJmClasses> counts{};
  for (const JmEvent& e : events) counts[static_cast<int>(e.cls)] += 1.0;
  const double total = static_cast<double>(events.size());
  f.jm_rate_per_s = total / elapsed_s;
  f.prop_rumination_chew = counts[0] / total;
  f.prop_grazing_chew = counts[1] / total;
  f.prop_bite = counts[2] / total;
  f.prop_chew_bite = counts[3] / total;
  return f;
}

ActivityLabel classify_activity(const MlpModel& model, const ActivityFeatures& features) {
  if (model.n_in != 5 || model.n_out != kNumActivities)
    throw ConfigError("classify_activity: model must map 5 features to 3 labels");
  const auto x = features.to_array();
  return static_cast<ActivityLabel>(model.predict(x));
}

namespace {

ActivityLabel median_of_three(ActivityLabel a, ActivityLabel b, ActivityLabel c,
                              SmoothingMode mode) {
  if (mode == SmoothingMode::MajorityOfThree) {
    if (a == b || a == c) return a;
    return b;  // b == c majority, or all three distinct: keep the center
  }
  int v[3] = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
  std::sort(v, v + 3);
  return static_cast<ActivityLabel>(v[1]);
}

}  // namespace

std::vector<ActivityLabel> smooth_labels(std::span<const ActivityLabel> raw,
                                         SmoothingMode mode) {
  const std::size_t n = raw.size();
  std::vector<ActivityLabel> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ActivityLabel prev = i > 0 ? raw[i - 1] : raw[0];
    const ActivityLabel next = i + 1 < n ? raw[i + 1] : raw[n - 1];
    out[i] = median_of_three(prev, raw[i], next, mode);
  }
  return out;
}

std::vector<Bout> labels_to_bouts(std::span<const ActivityLabel> labels, double segment_s,
                                  std::optional<double> total_duration_s) {
  std::vector<Bout> bouts;
  if (labels.empty()) return bouts;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i == labels.size() || labels[i] != labels[run_start]) {
      bouts.push_back({static_cast<double>(run_start) * segment_s,
                       static_cast<double>(i) * segment_s, labels[run_start]});
      run_start = i;
    }
  }
  if (total_duration_s && !bouts.empty() && bouts.back().end_s > *total_duration_s)
    bouts.back().end_s = std::max(*total_duration_s, bouts.back().start_s);
  return bouts;
}

}  // namespace nrfar
