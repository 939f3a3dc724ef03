#include "nrfar/jm.hpp"

#include <algorithm>
#include <cmath>

#include "nrfar/errors.hpp"

namespace nrfar {

const char* to_string(JmClass c) {
  switch (c) {
    case JmClass::RuminationChew: return "rumination-chew";
    case JmClass::GrazingChew: return "grazing-chew";
    case JmClass::Bite: return "bite";
    case JmClass::ChewBite: return "chew-bite";
  }
  return "?";
}

std::optional<JmClass> jm_class_from_string(const std::string& name) {
  for (int i = 0; i < kNumJmClasses; ++i)
    if (name == to_string(static_cast<JmClass>(i))) return static_cast<JmClass>(i);
  return std::nullopt;
}

std::vector<std::string> jm_class_order() {
  std::vector<std::string> order;
  for (int i = 0; i < kNumJmClasses; ++i) order.emplace_back(to_string(static_cast<JmClass>(i)));
  return order;
}

ThresholdAdapter::ThresholdAdapter(const ThresholdConfig& cfg) : cfg_(cfg) {
  if (!(cfg.multiplier_min > 1.0) || cfg.multiplier_max < cfg.multiplier_min)
    throw ConfigError("thresholds: need 1 < multiplier_min <= multiplier_max");
  if (!(cfg.snr_low_db < cfg.snr_high_db))
    throw ConfigError("thresholds: need snr_low_db < snr_high_db");
  if (!(cfg.floor_ema_gain > 0.0 && cfg.floor_ema_gain <= 1.0) ||
      !(cfg.snr_ema_gain > 0.0 && cfg.snr_ema_gain <= 1.0))
    throw ConfigError("thresholds: EMA gains must be in (0, 1]");
  state_.snr_estimate_db = cfg.initial_snr_db;
}

double ThresholdAdapter::multiplier() const {
  const double snr = state_.snr_estimate_db;
  if (snr <= cfg_.snr_low_db) return cfg_.multiplier_max;
  if (snr >= cfg_.snr_high_db) return cfg_.multiplier_min;
  const double t = (cfg_.snr_high_db - snr) / (cfg_.snr_high_db - cfg_.snr_low_db);
  return cfg_.multiplier_min + t * (cfg_.multiplier_max - cfg_.multiplier_min);
}

void ThresholdAdapter::recompute() {
  const double m = multiplier();
  state_.envelope_threshold = m * state_.envelope_floor;
  state_.energy_threshold = m * state_.energy_floor;
}

void ThresholdAdapter::update_quiet(double envelope_mean, double energy_mean) {
  if (!state_.initialized) {
    state_.envelope_floor = envelope_mean;
    state_.energy_floor = energy_mean;
    state_.initialized = true;
  } else {
    state_.envelope_floor += cfg_.floor_ema_gain * (envelope_mean - state_.envelope_floor);
    state_.energy_floor += cfg_.floor_ema_gain * (energy_mean - state_.energy_floor);
  }
  recompute();
}

void ThresholdAdapter::update_event(double event_energy_mean) {
  if (!state_.initialized || state_.energy_floor <= 0.0) return;
  const double ratio = std::max(event_energy_mean / state_.energy_floor, 1e-12);
  const double snr_inst = 10.0 * std::log10(ratio);
  state_.snr_estimate_db += cfg_.snr_ema_gain * (snr_inst - state_.snr_estimate_db);
  recompute();
}

JmFeatures extract_features(std::span<const double> envelope,
                            std::span<const double> energy, int stream_rate_hz,
                            bool mass_based_symmetry) {
  const std::size_t n = envelope.size();
  if (n < 2 || energy.size() != n)
    throw DataError("extract_features: segment must have >= 2 aligned samples");
  if (stream_rate_hz <= 0) throw ConfigError("extract_features: bad stream rate");

  JmFeatures f;
  f.duration_s = static_cast<double>(n) / stream_rate_hz;

  for (const double e : energy) f.energy += e;

  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (envelope[i] > envelope[peak]) peak = i;

  if (mass_based_symmetry) {
    double before = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += envelope[i];
      if (i < peak) before += envelope[i];
    }
    f.envelope_symmetry = total > 0.0 ? before / total : 0.5;
  } else {
    f.envelope_symmetry = static_cast<double>(peak) / static_cast<double>(n - 1);
  }

  int last_sign = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = envelope[i + 1] - envelope[i];
    f.accumulated_abs_derivative += std::abs(d);
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++f.env_derivative_zero_crossings;
      last_sign = sign;
    }
  }
  return f;
}

std::optional<JmClass> classify_jm(const MlpModel& model, const JmFeatures& features,
                                   double energy_floor, const JmDetectorConfig& cfg) {
  if (model.n_in != 5 || model.n_out != kNumJmClasses)
    throw ConfigError("classify_jm: model must map 5 features to 4 classes");
  if (features.duration_s < cfg.min_duration_s || features.duration_s > cfg.max_duration_s)
    return std::nullopt;
  if (features.energy < cfg.energy_gate_floor_mult * energy_floor)
    return std::nullopt;
  const auto x = features.to_array();
  return static_cast<JmClass>(model.predict(x));
}

JmEventDetector::JmEventDetector(const JmDetectorConfig& cfg, int stream_rate_hz)
    : cfg_(cfg), f_s_(stream_rate_hz), adapter_(cfg.thresholds) {
  if (stream_rate_hz <= 0) throw ConfigError("detector: stream rate must be positive");
  if (!(cfg.max_candidate_s > 0.0 && cfg.update_interval_s > 0.0))
    throw ConfigError("detector: intervals must be positive");
  update_interval_ticks_ = std::max<std::int64_t>(1, std::llround(cfg.update_interval_s * f_s_));
  max_candidate_ticks_ = std::max<std::int64_t>(2, std::llround(cfg.max_candidate_s * f_s_));
}

void JmEventDetector::prune_window() {
  // Keep at most one candidate span plus slack; the start bound clamps to
  // the window base if quiet history has been dropped.
  const std::int64_t cap = 2 * max_candidate_ticks_;
  while (static_cast<std::int64_t>(window_.size()) > cap && !in_event_) {
    window_.pop_front();
    ++window_base_;
  }
}

void JmEventDetector::close_event(std::int64_t end_idx, bool forced,
                                  std::vector<JmCandidate>& out) {
  std::int64_t start_idx = std::max(last_quiet_idx_, min_start_idx_);
  start_idx = std::max(start_idx, window_base_);
  if (start_idx > end_idx) start_idx = end_idx;

  const std::size_t lo = static_cast<std::size_t>(start_idx - window_base_);
  const std::size_t count = static_cast<std::size_t>(end_idx - start_idx + 1);

  std::vector<double> env(count), eng(count);
  for (std::size_t i = 0; i < count; ++i) {
    env[i] = window_[lo + i].envelope;
    eng[i] = window_[lo + i].energy;
  }

  if (count >= 2) {
    JmCandidate cand;
    cand.start_idx = start_idx;
    cand.end_idx = end_idx;
    cand.features = extract_features(env, eng, f_s_, cfg_.mass_based_symmetry);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < count; ++i)
      if (env[i] > env[peak]) peak = i;
    cand.peak_idx = start_idx + static_cast<std::int64_t>(peak);
    cand.envelope_peak = env[peak];
    cand.energy_floor = adapter_.state().energy_floor;
    out.push_back(cand);

    adapter_.update_event(cand.features.energy / static_cast<double>(count));
    if (forced) {
      // A candidate that never closed within the JM duration range is
      // ambient noise; fold its level into the floors so they track it.
      double env_mean = 0.0, eng_mean = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        env_mean += env[i];
        eng_mean += eng[i];
      }
      adapter_.update_quiet(env_mean / count, eng_mean / count);
    }
  }

  in_event_ = false;
  last_quiet_idx_ = end_idx;
  min_start_idx_ = end_idx + 1;
}

void JmEventDetector::push(const StreamTick& tick, std::vector<JmCandidate>& out) {
  const std::int64_t k = idx_;
  window_.push_back(tick);
  const AdaptiveThresholds& th = adapter_.state();

  if (in_event_) {
    if (tick.energy < th.energy_threshold) {
      close_event(k, false, out);
    } else if (k - event_open_idx_ >= max_candidate_ticks_) {
      close_event(k, true, out);
    }
  } else {
    // Local maximum test for the previous tick.
    const bool peak_at_prev = k >= 2 && th.initialized &&
                              prev_env_ > prev_prev_env_ && prev_env_ >= tick.envelope &&
                              prev_env_ > th.envelope_threshold && (k - 1) >= min_start_idx_;
    if (peak_at_prev) {
      in_event_ = true;
      event_open_idx_ = k;
      if (tick.energy < th.energy_threshold) close_event(k, false, out);
    } else {
      quiet_env_sum_ += tick.envelope;
      quiet_eng_sum_ += tick.energy;
      ++quiet_count_;
      if (th.initialized && tick.energy < th.energy_threshold) last_quiet_idx_ = k;
      if (!th.initialized) last_quiet_idx_ = k;
    }
  }

  if (++interval_count_ >= update_interval_ticks_) {
    if (quiet_count_ >= update_interval_ticks_ / 4) {
      adapter_.update_quiet(quiet_env_sum_ / quiet_count_, quiet_eng_sum_ / quiet_count_);
    }
    quiet_env_sum_ = quiet_eng_sum_ = 0.0;
    quiet_count_ = 0;
    interval_count_ = 0;
  }

  prev_prev_env_ = prev_env_;
  prev_env_ = tick.envelope;
  ++idx_;
  prune_window();
}

void JmEventDetector::process(std::span<const StreamTick> ticks, std::vector<JmCandidate>& out) {
  for (const StreamTick& t : ticks) push(t, out);
}

void JmEventDetector::finish() {
  in_event_ = false;
  window_.clear();
  window_base_ = idx_;
}

JmRecognizer::JmRecognizer(const JmDetectorConfig& cfg, MlpModel jm_model, int stream_rate_hz)
    : cfg_(cfg), model_(std::move(jm_model)), f_s_(stream_rate_hz), detector_(cfg, stream_rate_hz) {
  model_.validate();
  if (model_.n_in != 5 || model_.n_out != kNumJmClasses)
    throw ConfigError("jm recognizer: model must map 5 features to 4 classes");
}

void JmRecognizer::push(const StreamTick& tick, std::vector<JmEvent>& out) {
  scratch_.clear();
  detector_.push(tick, scratch_);
  for (const JmCandidate& cand : scratch_) {
    const auto cls = classify_jm(model_, cand.features, cand.energy_floor, cfg_);
    if (!cls) continue;
    JmEvent ev;
    ev.timestamp_s = static_cast<double>(cand.peak_idx) / f_s_;
    ev.cls = *cls;
    ev.features = cand.features;
    ev.start_s = static_cast<double>(cand.start_idx) / f_s_;
    ev.end_s = static_cast<double>(cand.end_idx + 1) / f_s_;
    out.push_back(ev);
  }
}

void JmRecognizer::finish() { detector_.finish(); }

}  // namespace nrfar
