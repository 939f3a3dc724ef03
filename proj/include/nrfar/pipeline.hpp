#ifndef NRFAR_PIPELINE_HPP
#define NRFAR_PIPELINE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrfar/activity.hpp"
#include "nrfar/audio.hpp"
#include "nrfar/dsp.hpp"
#include "nrfar/jm.hpp"
#include "nrfar/mlp.hpp"

namespace nrfar {

struct PipelineConfig {
  FrontendConfig frontend{};
  JmDetectorConfig detector{};
  SmoothingMode smoothing = SmoothingMode::MajorityOfThree;
};

struct RecognizerModels {
  MlpModel jm;        // 5-6-4
  MlpModel activity;  // 5-H-3
};

struct RecognitionResult {
  double duration_s = 0.0;
  std::vector<JmEvent> events;
  std::vector<ActivitySegment> segments;
  std::vector<Bout> bouts;  // from smoothed labels, final bout clamped
};

// Streaming three-level recognizer. Audio can be fed in chunks of any
// size; the result is identical to one-shot processing. Segment labels
// are assigned at finish (the smoothing filter needs one following
// segment, so online emission would lag one segment anyway).
class Recognizer {
 public:
  Recognizer(const PipelineConfig& cfg, RecognizerModels models);

  void process(std::span<const double> samples);
  RecognitionResult finish();

 private:
  PipelineConfig cfg_;
  MlpModel activity_model_;
  DspFrontend frontend_;
  JmRecognizer jm_;
  std::vector<JmEvent> events_;
  std::vector<StreamTick> tick_buffer_;
};

// One-shot convenience.
RecognitionResult recognize(const PipelineConfig& cfg, const RecognizerModels& models,
                            const AudioSignal& audio);

// Output files. Every writer embeds the config hash and seed in a
// leading comment/meta line so reruns are verifiable.
std::string segments_csv(std::span<const ActivitySegment> segments,
                         const std::string& provenance);
std::string bouts_csv(std::span<const Bout> bouts, const std::string& provenance);
std::string events_jsonl(std::span<const JmEvent> events, const std::string& provenance);

}  // namespace nrfar

#endif
