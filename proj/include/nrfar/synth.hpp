#ifndef NRFAR_SYNTH_HPP
#define NRFAR_SYNTH_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrfar/activity.hpp"
#include "nrfar/audio.hpp"
#include "nrfar/jm.hpp"

namespace nrfar {

// Acoustic shape of one JM class: a shaped sinusoid burst. Classes are
// separated mainly by duration, envelope asymmetry and lobe count so the
// five event features suffice to tell them apart.
struct JmTemplate {
  double duration_lo_s = 0.3;
  double duration_hi_s = 0.4;
  double amplitude_lo = 0.4;
  double amplitude_hi = 0.6;
  double carrier_hz = 300.0;
  double attack_frac = 0.5;  // envelope peak position within the burst
  bool double_lobe = false;  // two-peak envelope (chew-bite)
};

std::array<JmTemplate, kNumJmClasses> default_jm_templates();

struct ScriptBout {
  ActivityLabel label = ActivityLabel::Other;
  double duration_s = 300.0;
};

struct SyntheticCorpusSpec {
  int sample_rate_hz = 2000;
  double background_rms = 0.005;
  double rate_lo_per_s = 0.75;  // JM rate range within active bouts
  double rate_hi_per_s = 1.20;
  double jitter_frac = 0.10;    // event-start jitter as a fraction of the period
  double lead_in_s = 2.0;       // event-free opening of each recording
  std::array<JmTemplate, kNumJmClasses> templates = default_jm_templates();
  // Per-activity class mixtures over {rumination-chew, grazing-chew, bite, chew-bite}.
  std::array<double, kNumJmClasses> grazing_mix{0.0, 0.5, 0.25, 0.25};
  std::array<double, kNumJmClasses> rumination_mix{0.9, 0.1, 0.0, 0.0};
  std::uint64_t seed = 1;

  void validate() const;
};

struct GeneratedRecording {
  AudioSignal audio;
  std::vector<Bout> truth_bouts;
  std::vector<JmEvent> truth_events;  // class, peak time and support per event
};

// Renders one recording from an explicit bout script. Events are placed
// on a jittered regular grid (period 1/rate, non-overlapping by
// construction); "other" bouts carry background noise only.
GeneratedRecording synth_recording(const SyntheticCorpusSpec& spec,
                                   std::span<const ScriptBout> script,
                                   std::uint64_t seed);

// Random bout scripts for corpus construction. Durations are multiples
// of `bout_unit_s`; labels are drawn with the given weights (consecutive
// repeats allowed, runs merge naturally).
std::vector<std::vector<ScriptBout>> make_scripts(int n_recordings,
                                                  double recording_duration_s,
                                                  std::array<double, kNumActivities> weights,
                                                  double bout_unit_s, int max_units_per_bout,
                                                  std::uint64_t seed);

// On-disk corpus: <name>.wav + <name>.labels.csv + <name>.events.jsonl per
// recording plus a corpus.json index.
struct CorpusRecording {
  std::string name;
  std::string wav_path;
  double duration_s = 0.0;
  std::vector<Bout> truth_bouts;
  std::vector<JmEvent> truth_events;
};

struct Corpus {
  std::string dir;
  int sample_rate_hz = 2000;
  std::uint64_t seed = 0;
  std::vector<CorpusRecording> recordings;

  double total_duration_s() const;
};

Corpus write_corpus(const std::string& dir, const SyntheticCorpusSpec& spec,
                    std::span<const std::vector<ScriptBout>> scripts);
Corpus load_corpus(const std::string& dir);

}  // namespace nrfar

#endif
