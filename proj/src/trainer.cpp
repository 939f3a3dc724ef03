#include "nrfar/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>

#include "nrfar/errors.hpp"
#include "nrfar/rng.hpp"

namespace nrfar {

HarvestedRecording harvest_candidates(const PipelineConfig& cfg, const AudioSignal& audio,
                                      std::span<const JmEvent> truth_events) {
  if (audio.sample_rate_hz != cfg.frontend.sample_rate_hz)
    throw DataError("harvest: audio sample rate differs from the configured rate");

  HarvestedRecording h;
  h.duration_s = audio.duration_s();

  DspFrontend frontend(cfg.frontend);
  JmEventDetector detector(cfg.detector, cfg.frontend.stream_rate_hz);
  std::vector<StreamTick> ticks;
  frontend.process(audio.samples, ticks);
  std::vector<JmCandidate> candidates;
  detector.process(ticks, candidates);
  detector.finish();

  const int f_s = cfg.frontend.stream_rate_hz;
  for (const JmCandidate& cand : candidates) {
    // Same gate the deployed classifier applies.
    if (cand.features.duration_s < cfg.detector.min_duration_s ||
        cand.features.duration_s > cfg.detector.max_duration_s)
      continue;
    if (cand.features.energy < cfg.detector.energy_gate_floor_mult * cand.energy_floor)
      continue;
    const double peak_s = static_cast<double>(cand.peak_idx) / f_s;

    // Truth events are disjoint in time, so at most one contains the peak.
    int label = -1;
    auto it = std::upper_bound(truth_events.begin(), truth_events.end(), peak_s,
                               [](double t, const JmEvent& e) { return t < e.start_s; });
    if (it != truth_events.begin()) {
      const JmEvent& ev = *(it - 1);
      if (peak_s >= ev.start_s && peak_s <= ev.end_s) label = static_cast<int>(ev.cls);
    }

    h.candidates.push_back(cand);
    h.peak_times_s.push_back(peak_s);
    h.truth_class.push_back(label);
  }
  return h;
}

Dataset build_activity_dataset(const HarvestedRecording& harvested,
                               std::span<const Bout> truth_bouts, const MlpModel& jm_model) {
  std::vector<JmEvent> events;
  events.reserve(harvested.candidates.size());
  for (std::size_t i = 0; i < harvested.candidates.size(); ++i) {
    const JmCandidate& cand = harvested.candidates[i];
    JmEvent ev;
    ev.timestamp_s = harvested.peak_times_s[i];
    ev.cls = static_cast<JmClass>(jm_model.predict(cand.features.to_array()));
    ev.features = cand.features;
    events.push_back(ev);
  }

  Dataset out;
  for (const SegmentedEvents& seg : segment_events(events, harvested.duration_s)) {
    const double win_start = static_cast<double>(seg.index) * kSegmentSeconds;
    const double win_end = win_start + seg.elapsed_s;
    double overlap[kNumActivities] = {0.0, 0.0, 0.0};
    for (const Bout& b : truth_bouts) {
      const double lo = std::max(win_start, b.start_s);
      const double hi = std::min(win_end, b.end_s);
      if (hi > lo) overlap[static_cast<int>(b.label)] += hi - lo;
    }
    int label = 0;
    for (int c = 1; c < kNumActivities; ++c)
      if (overlap[c] > overlap[label]) label = c;

    const ActivityFeatures f = activity_features(seg.events, seg.elapsed_s);
    const auto arr = f.to_array();
    out.x.emplace_back(arr.begin(), arr.end());
    out.y.push_back(label);
  }
  return out;
}

namespace {

std::vector<HarvestedRecording> harvest_all(const Corpus& corpus, const TrainerConfig& cfg) {
  std::vector<HarvestedRecording> harvested(corpus.recordings.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= corpus.recordings.size()) return;
      try {
        const AudioSignal audio = read_wav(corpus.recordings[r].wav_path);
        harvested[r] = harvest_candidates(cfg.pipeline, audio,
                                          corpus.recordings[r].truth_events);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(corpus.recordings.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return harvested;
}

FoldModels train_one(const Corpus& corpus, std::span<const HarvestedRecording> harvested,
                     std::span<const int> train_recs, int fold_id, const TrainerConfig& cfg) {
  // JM dataset: truth-matched candidates from the training recordings.
  Dataset jm_data;
  for (const int r : train_recs) {
    const HarvestedRecording& h = harvested[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < h.candidates.size(); ++i) {
      if (h.truth_class[i] < 0) continue;
      const auto arr = h.candidates[i].features.to_array();
      jm_data.x.emplace_back(arr.begin(), arr.end());
      jm_data.y.push_back(h.truth_class[i]);
    }
  }
  if (jm_data.size() == 0)
    throw DataError("trainer: no truth-matched JM candidates in the training recordings");

  FoldModels out;
  out.fold = fold_id;
  out.jm_train_size = jm_data.size();
  const auto fold_tag = "fold" + std::to_string(fold_id);
  out.models.jm =
      train_scg(jm_data, cfg.jm_hidden, jm_class_order(), cfg.jm_learning_rate,
                derive_seed(cfg.seed, fold_tag + ".jm"), cfg.grid.max_iterations,
                cfg.grid.tolerance, cfg.grid.patience);

  // Split training recordings into grid-train and grid-validation sets.
  std::vector<int> order(train_recs.begin(), train_recs.end());
  Rng rng(derive_seed(cfg.seed, fold_tag + ".split"));
  rng.shuffle(order);
  std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(order.size()));
  n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
  const std::vector<int> val_recs(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<int> grid_recs(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  auto collect = [&](std::span<const int> recs) {
    Dataset d;
    for (const int r : recs) {
      Dataset part = build_activity_dataset(harvested[static_cast<std::size_t>(r)],
                                            corpus.recordings[static_cast<std::size_t>(r)].truth_bouts,
                                            out.models.jm);
      for (std::size_t i = 0; i < part.size(); ++i) {
        d.x.push_back(std::move(part.x[i]));
        d.y.push_back(part.y[i]);
      }
    }
    return d;
  };
  Dataset activity_train = collect(grid_recs);
  const Dataset activity_val = collect(val_recs);
  if (activity_train.size() == 0 || activity_val.size() == 0)
    throw DataError("trainer: empty activity train or validation split");

  // Balance the training split only; validation stays untouched.
  RebalanceConfig rb = cfg.rebalance;
  rb.seed = derive_seed(cfg.seed, fold_tag + ".rebalance");
  const Dataset balanced = rebalance_training(activity_train, kNumActivities, rb);
  out.activity_train_size = balanced.size();

  TrainConfig grid_cfg = cfg.grid;
  grid_cfg.seed = derive_seed(cfg.seed, fold_tag + ".grid");
  GridSearchResult gs =
      grid_search(balanced, activity_val, activity_order(), grid_cfg, cfg.threads);
  out.models.activity = std::move(gs.model);
  out.grid_best = gs.best;
  return out;
}

}  // namespace

std::vector<FoldModels> train_folds(const Corpus& corpus, const FoldPlan& plan,
                                    const TrainerConfig& cfg) {
  const auto harvested = harvest_all(corpus, cfg);
  std::vector<FoldModels> out;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::vector<int> train_recs;
    for (std::size_t r = 0; r < corpus.recordings.size(); ++r) {
      const bool in_fold =
          std::find(plan.folds[f].begin(), plan.folds[f].end(), static_cast<int>(r)) !=
          plan.folds[f].end();
      if (!in_fold) train_recs.push_back(static_cast<int>(r));
    }
    out.push_back(train_one(corpus, harvested, train_recs, static_cast<int>(f), cfg));
  }
  return out;
}

FoldModels train_models(const Corpus& corpus, const TrainerConfig& cfg) {
  const auto harvested = harvest_all(corpus, cfg);
  std::vector<int> all(corpus.recordings.size());
  std::iota(all.begin(), all.end(), 0);
  return train_one(corpus, harvested, all, -1, cfg);
}

}  // namespace nrfar
