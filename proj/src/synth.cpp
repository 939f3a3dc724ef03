#include "nrfar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nrfar/errors.hpp"
#include "nrfar/rng.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

namespace fs = std::filesystem;

std::array<JmTemplate, kNumJmClasses> default_jm_templates() {
  std::array<JmTemplate, kNumJmClasses> t{};
  t[static_cast<int>(JmClass::RuminationChew)] = {0.26, 0.34, 0.38, 0.55, 340.0, 0.50, false};
  t[static_cast<int>(JmClass::GrazingChew)] = {0.38, 0.46, 0.40, 0.60, 300.0, 0.25, false};
  t[static_cast<int>(JmClass::Bite)] = {0.48, 0.56, 0.35, 0.55, 260.0, 0.72, false};
  t[static_cast<int>(JmClass::ChewBite)] = {0.56, 0.64, 0.45, 0.70, 300.0, 0.50, true};
  return t;
}

void SyntheticCorpusSpec::validate() const {
  if (sample_rate_hz <= 0) throw ConfigError("corpus spec: bad sample rate");
  if (!(rate_lo_per_s > 0.0 && rate_lo_per_s <= rate_hi_per_s))
    throw ConfigError("corpus spec: bad JM rate range");
  if (background_rms < 0.0) throw ConfigError("corpus spec: negative background");
  const double max_period_frac = 1.0 - 2.0 * jitter_frac;
  for (const JmTemplate& t : templates) {
    if (!(t.duration_lo_s > 0.0 && t.duration_lo_s <= t.duration_hi_s))
      throw ConfigError("corpus spec: bad template duration range");
    if (t.duration_hi_s > max_period_frac / rate_hi_per_s)
      throw ConfigError("corpus spec: template too long for the JM rate (events would overlap)");
    if (!(t.amplitude_lo > 0.0 && t.amplitude_lo <= t.amplitude_hi && t.amplitude_hi < 1.0))
      throw ConfigError("corpus spec: bad template amplitude range");
    if (!(t.attack_frac > 0.0 && t.attack_frac < 1.0))
      throw ConfigError("corpus spec: attack fraction must be in (0, 1)");
  }
}

namespace {

// Raised-cosine lobe rising over [0, attack] and falling over [attack, 1].
double lobe(double u, double attack) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  if (u < attack) return 0.5 * (1.0 - std::cos(std::numbers::pi * u / attack));
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (u - attack) / (1.0 - attack)));
}

// Burst envelope in [0, 1] over normalized time u in [0, 1].
double burst_envelope(double u, const JmTemplate& t) {
  if (!t.double_lobe) return lobe(u, t.attack_frac);
  // Two overlapping lobes; the second slightly weaker so the first peak
  // carries the event timestamp.
  const double a = lobe(u / 0.55, 0.5);
  const double b = 0.8 * lobe((u - 0.45) / 0.55, 0.5);
  return std::max(a, b);
}

double envelope_peak_time_frac(const JmTemplate& t) {
  return t.double_lobe ? 0.55 * 0.5 : t.attack_frac;
}

int draw_class(Rng& rng, const std::array<double, kNumJmClasses>& mix) {
  double total = 0.0;
  for (const double w : mix) total += w;
  double u = rng.uniform() * total;
  for (int c = 0; c < kNumJmClasses; ++c) {
    u -= mix[c];
    if (u < 0.0) return c;
  }
  return kNumJmClasses - 1;
}

}  // namespace

GeneratedRecording synth_recording(const SyntheticCorpusSpec& spec,
                                   std::span<const ScriptBout> script,
                                   std::uint64_t seed) {
  spec.validate();
  double total_s = 0.0;
  for (const ScriptBout& b : script) {
    if (b.duration_s <= 0.0) throw ConfigError("synth: bout duration must be positive");
    total_s += b.duration_s;
  }

  GeneratedRecording rec;
  rec.audio.sample_rate_hz = spec.sample_rate_hz;
  const auto n_samples = static_cast<std::size_t>(std::llround(total_s * spec.sample_rate_hz));
  rec.audio.samples.assign(n_samples, 0.0);

  Rng rng(seed);
  // Background bed first so event rendering only adds on top.
  if (spec.background_rms > 0.0) {
    for (double& v : rec.audio.samples) v = rng.gaussian(0.0, spec.background_rms);
  }

  double bout_start = 0.0;
  for (const ScriptBout& bout : script) {
    const double bout_end = bout_start + bout.duration_s;
    rec.truth_bouts.push_back({bout_start, bout_end, bout.label});

    if (bout.label != ActivityLabel::Other) {
      const auto& mix = bout.label == ActivityLabel::Grazing ? spec.grazing_mix
                                                             : spec.rumination_mix;
      const double rate = rng.uniform(spec.rate_lo_per_s, spec.rate_hi_per_s);
      const double period = 1.0 / rate;
      for (std::int64_t k = 0;; ++k) {
        const double grid_start = bout_start + static_cast<double>(k) * period;
        if (grid_start + period > bout_end) break;
        const double jitter = rng.uniform(-spec.jitter_frac, spec.jitter_frac) * period;
        const double start_s = std::max(grid_start + jitter, bout_start);
        const int cls = draw_class(rng, mix);
        const JmTemplate& tpl = spec.templates[cls];
        const double dur = rng.uniform(tpl.duration_lo_s, tpl.duration_hi_s);
        const double amp = rng.uniform(tpl.amplitude_lo, tpl.amplitude_hi);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        if (start_s < spec.lead_in_s) continue;
        if (start_s + dur > bout_end) continue;

        const auto i0 = static_cast<std::size_t>(std::llround(start_s * spec.sample_rate_hz));
        const auto i1 = static_cast<std::size_t>(std::llround((start_s + dur) * spec.sample_rate_hz));
        for (std::size_t i = i0; i < std::min(i1, n_samples); ++i) {
          const double t = static_cast<double>(i) / spec.sample_rate_hz - start_s;
          const double u = t / dur;
          const double carrier = std::sin(2.0 * std::numbers::pi * tpl.carrier_hz * t + phase);
          rec.audio.samples[i] += amp * burst_envelope(u, tpl) * carrier;
        }

        JmEvent ev;
        ev.cls = static_cast<JmClass>(cls);
        ev.start_s = start_s;
        ev.end_s = start_s + dur;
        ev.timestamp_s = start_s + envelope_peak_time_frac(tpl) * dur;
        ev.features.duration_s = dur;
        rec.truth_events.push_back(ev);
      }
    }
    bout_start = bout_end;
  }
  return rec;
}

std::vector<std::vector<ScriptBout>> make_scripts(int n_recordings,
                                                  double recording_duration_s,
                                                  std::array<double, kNumActivities> weights,
                                                  double bout_unit_s, int max_units_per_bout,
                                                  std::uint64_t seed) {
  if (n_recordings <= 0 || recording_duration_s <= 0.0 || bout_unit_s <= 0.0 ||
      max_units_per_bout <= 0)
    throw ConfigError("make_scripts: bad plan parameters");
  std::vector<std::vector<ScriptBout>> scripts;
  scripts.reserve(static_cast<std::size_t>(n_recordings));
  for (int r = 0; r < n_recordings; ++r) {
    Rng rng(derive_seed(seed, "script" + std::to_string(r)));
    std::vector<ScriptBout> script;
    double t = 0.0;
    while (t < recording_duration_s - 1e-9) {
      double u = rng.uniform() * (weights[0] + weights[1] + weights[2]);
      int label = 0;
      for (; label < kNumActivities - 1; ++label) {
        u -= weights[label];
        if (u < 0.0) break;
      }
      const double remaining = recording_duration_s - t;
      const int max_units = std::max(
          1, std::min(max_units_per_bout, static_cast<int>(remaining / bout_unit_s)));
      const double dur =
          bout_unit_s * static_cast<double>(1 + rng.uniform_int(static_cast<std::uint64_t>(max_units)));
      script.push_back({static_cast<ActivityLabel>(label), std::min(dur, remaining)});
      t += script.back().duration_s;
    }
    scripts.push_back(std::move(script));
  }
  return scripts;
}

namespace {

std::string bouts_to_csv(const std::vector<Bout>& bouts) {
  std::ostringstream out;
  out << "start_s,end_s,activity\n";
  for (const Bout& b : bouts)
    out << format_double(b.start_s) << ',' << format_double(b.end_s) << ','
        << to_string(b.label) << "\n";
  return out.str();
}

std::vector<Bout> bouts_from_csv(const std::string& text) {
  std::vector<Bout> bouts;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw DataError("labels csv: expected 3 columns");
    const auto label = activity_from_string(fields[2]);
    if (!label) throw DataError("labels csv: unknown activity " + fields[2]);
    bouts.push_back({std::stod(fields[0]), std::stod(fields[1]), *label});
  }
  return bouts;
}

std::string events_to_jsonl(const std::vector<JmEvent>& events) {
  std::ostringstream out;
  for (const JmEvent& e : events) {
    nlohmann::ordered_json j;
    j["t"] = e.timestamp_s;
    j["class"] = to_string(e.cls);
    j["start"] = e.start_s;
    j["end"] = e.end_s;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<JmEvent> events_from_jsonl(const std::string& text) {
  std::vector<JmEvent> events;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (!j.contains("t")) continue;  // meta line
    JmEvent e;
    e.timestamp_s = j.at("t").get<double>();
    const auto cls = jm_class_from_string(j.at("class").get<std::string>());
    if (!cls) throw DataError("events jsonl: unknown class");
    e.cls = *cls;
    e.start_s = j.at("start").get<double>();
    e.end_s = j.at("end").get<double>();
    e.features.duration_s = e.end_s - e.start_s;
    events.push_back(e);
  }
  return events;
}

}  // namespace

double Corpus::total_duration_s() const {
  double t = 0.0;
  for (const auto& r : recordings) t += r.duration_s;
  return t;
}

Corpus write_corpus(const std::string& dir, const SyntheticCorpusSpec& spec,
                    std::span<const std::vector<ScriptBout>> scripts) {
  spec.validate();
  fs::create_directories(dir);

  Corpus corpus;
  corpus.dir = dir;
  corpus.sample_rate_hz = spec.sample_rate_hz;
  corpus.seed = spec.seed;

  nlohmann::ordered_json index;
  index["format"] = "nrfar-corpus";
  index["version"] = 1;
  index["sample_rate_hz"] = spec.sample_rate_hz;
  index["seed"] = spec.seed;
  index["recordings"] = nlohmann::json::array();

  for (std::size_t r = 0; r < scripts.size(); ++r) {
    char name[32];
    std::snprintf(name, sizeof(name), "rec_%03zu", r);
    const auto rec_seed = derive_seed(spec.seed, name);
    GeneratedRecording gen = synth_recording(spec, scripts[r], rec_seed);

    const std::string wav_path = (fs::path(dir) / (std::string(name) + ".wav")).string();
    write_wav(wav_path, gen.audio);
    write_text_file((fs::path(dir) / (std::string(name) + ".labels.csv")).string(),
                    bouts_to_csv(gen.truth_bouts));
    write_text_file((fs::path(dir) / (std::string(name) + ".events.jsonl")).string(),
                    events_to_jsonl(gen.truth_events));

    CorpusRecording cr;
    cr.name = name;
    cr.wav_path = wav_path;
    cr.duration_s = gen.audio.duration_s();
    cr.truth_bouts = std::move(gen.truth_bouts);
    cr.truth_events = std::move(gen.truth_events);
    index["recordings"].push_back({{"name", cr.name}, {"duration_s", cr.duration_s}});
    corpus.recordings.push_back(std::move(cr));
  }

  write_text_file((fs::path(dir) / "corpus.json").string(), index.dump(2) + "\n");
  return corpus;
}

Corpus load_corpus(const std::string& dir) {
  const std::string index_path = (fs::path(dir) / "corpus.json").string();
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_text_file(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corpus index unreadable: " + std::string(e.what()));
  }
  if (index.value("format", "") != "nrfar-corpus")
    throw DataError("not a corpus directory: " + dir);

  Corpus corpus;
  corpus.dir = dir;
  corpus.sample_rate_hz = index.at("sample_rate_hz").get<int>();
  corpus.seed = index.value("seed", std::uint64_t{0});
  for (const auto& recj : index.at("recordings")) {
    CorpusRecording cr;
    cr.name = recj.at("name").get<std::string>();
    cr.duration_s = recj.at("duration_s").get<double>();
    cr.wav_path = (fs::path(dir) / (cr.name + ".wav")).string();
    cr.truth_bouts =
        bouts_from_csv(read_text_file((fs::path(dir) / (cr.name + ".labels.csv")).string()));
    cr.truth_events = events_from_jsonl(
        read_text_file((fs::path(dir) / (cr.name + ".events.jsonl")).string()));
    corpus.recordings.push_back(std::move(cr));
  }
  return corpus;
}

}  // namespace nrfar
