#include "nrfar/pipeline.hpp"

#include <sstream>

#include <json.hpp>

#include "nrfar/errors.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

Recognizer::Recognizer(const PipelineConfig& cfg, RecognizerModels models)
    : cfg_(cfg),
      activity_model_(std::move(models.activity)),
      frontend_(cfg.frontend),
      jm_(cfg.detector, std::move(models.jm), cfg.frontend.stream_rate_hz) {
  activity_model_.validate();
  if (activity_model_.n_in != 5 || activity_model_.n_out != kNumActivities)
    throw ConfigError("recognizer: activity model must map 5 features to 3 labels");
}

void Recognizer::process(std::span<const double> samples) {
  tick_buffer_.clear();
  frontend_.process(samples, tick_buffer_);
  for (const StreamTick& t : tick_buffer_) jm_.push(t, events_);
}

RecognitionResult Recognizer::finish() {
  jm_.finish();
  RecognitionResult result;
  result.duration_s =
      static_cast<double>(frontend_.samples_consumed()) / cfg_.frontend.sample_rate_hz;
  result.events = std::move(events_);
  events_.clear();

  const auto segmented = segment_events(result.events, result.duration_s);
  std::vector<ActivityLabel> raw;
  raw.reserve(segmented.size());
  for (const SegmentedEvents& se : segmented) {
    ActivitySegment seg;
    seg.index = se.index;
    seg.partial = se.partial;
    seg.start_s = static_cast<double>(se.index) * kSegmentSeconds;
    seg.end_s = seg.start_s + se.elapsed_s;
    seg.event_count = static_cast<int>(se.events.size());
    seg.features = activity_features(se.events, se.elapsed_s);
    seg.raw_label = classify_activity(activity_model_, seg.features);
    raw.push_back(seg.raw_label);
    result.segments.push_back(seg);
  }
  const auto smoothed = smooth_labels(raw, cfg_.smoothing);
  for (std::size_t i = 0; i < smoothed.size(); ++i)
    result.segments[i].smoothed_label = smoothed[i];

  result.bouts = labels_to_bouts(smoothed, kSegmentSeconds, result.duration_s);
  return result;
}

RecognitionResult recognize(const PipelineConfig& cfg, const RecognizerModels& models,
                            const AudioSignal& audio) {
  if (audio.sample_rate_hz != cfg.frontend.sample_rate_hz)
    throw DataError("recognize: audio sample rate differs from the configured rate");
  Recognizer rec(cfg, models);
  rec.process(audio.samples);
  return rec.finish();
}

std::string segments_csv(std::span<const ActivitySegment> segments,
                         const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "index,start_s,jm_rate_per_s,prop_rumination_chew,prop_grazing_chew,"
         "prop_bite,prop_chew_bite,raw_label,smoothed_label\n";
  for (const ActivitySegment& s : segments) {
    out << s.index << ',' << format_double(s.start_s) << ','
        << format_double(s.features.jm_rate_per_s) << ','
        << format_double(s.features.prop_rumination_chew) << ','
        << format_double(s.features.prop_grazing_chew) << ','
        << format_double(s.features.prop_bite) << ','
        << format_double(s.features.prop_chew_bite) << ','
        << to_string(s.raw_label) << ',' << to_string(s.smoothed_label) << "\n";
  }
  return out.str();
}

std::string bouts_csv(std::span<const Bout> bouts, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "start_s,end_s,label\n";
  for (const Bout& b : bouts)
    out << format_double(b.start_s) << ',' << format_double(b.end_s) << ','
        << to_string(b.label) << "\n";
  return out.str();
}

std::string events_jsonl(std::span<const JmEvent> events, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) {
    nlohmann::ordered_json meta;
    meta["meta"] = provenance;
    out << meta.dump() << "\n";
  }
  for (const JmEvent& e : events) {
    nlohmann::ordered_json j;
    j["t"] = e.timestamp_s;
    j["class"] = to_string(e.cls);
    j["start"] = e.start_s;
    j["end"] = e.end_s;
    j["features"] = e.features.to_array();
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace nrfar
