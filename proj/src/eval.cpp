#include "nrfar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "nrfar/errors.hpp"
#include "nrfar/rng.hpp"

namespace nrfar {

FrameSeries expand_frames(std::span<const Bout> bouts, double duration_s) {
  if (duration_s < 0.0) throw ConfigError("expand_frames: negative duration");
  const auto n_frames = static_cast<std::size_t>(duration_s);
  FrameSeries series;
  series.labels.reserve(n_frames);
  std::size_t b = 0;
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double mid = static_cast<double>(i) + 0.5;
    while (b < bouts.size() && mid >= bouts[b].end_s) ++b;
    if (b >= bouts.size() || mid < bouts[b].start_s)
      throw DataError("expand_frames: no bout covers frame midpoint");
    series.labels.push_back(bouts[b].label);
  }
  return series;
}

namespace {

std::vector<int> to_ints(const FrameSeries& s) {
  std::vector<int> v(s.labels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(s.labels[i]);
  return v;
}

}  // namespace

double balanced_accuracy(const FrameSeries& truth, const FrameSeries& pred) {
  if (truth.labels.size() != pred.labels.size())
    throw DataError("balanced_accuracy: frame series length mismatch");
  const auto t = to_ints(truth), p = to_ints(pred);
  return balanced_accuracy(std::span<const int>(t), std::span<const int>(p), kNumActivities);
}

ConfusionMatrix confusion(const FrameSeries& truth, const FrameSeries& pred) {
  const auto t = to_ints(truth), p = to_ints(pred);
  return confusion_matrix(std::span<const int>(t), std::span<const int>(p), kNumActivities);
}

namespace {

// Indices of the k nearest candidates to `center` by Euclidean distance;
// distance ties resolve to the smaller index.
std::vector<std::size_t> knn(const std::vector<std::vector<double>>& points,
                             std::span<const std::size_t> candidates,
                             const std::vector<double>& center, std::size_t self_index,
                             int k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  for (const std::size_t c : candidates) {
    if (c == self_index) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < center.size(); ++j) {
      const double d = points[c][j] - center[j];
      d2 += d * d;
    }
    dist.emplace_back(d2, c);
  }
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace

Dataset rebalance_training(const Dataset& data, int n_classes, const RebalanceConfig& cfg) {
  if (data.size() == 0) throw DataError("rebalance: empty dataset");
  if (n_classes < 2) throw ConfigError("rebalance: need at least two classes");
  if (!(cfg.majority_keep_frac > 0.0 && cfg.majority_keep_frac <= 1.0))
    throw ConfigError("rebalance: keep fraction must be in (0, 1]");
  if (cfg.adasyn_k < 1) throw ConfigError("rebalance: k must be >= 1");

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] < 0 || data.y[i] >= n_classes)
      throw DataError("rebalance: label out of range");
    by_class[data.y[i]].push_back(i);
  }

  int majority = 0, minority = 0;
  for (int c = 1; c < n_classes; ++c) {
    if (by_class[c].size() > by_class[majority].size()) majority = c;
    if (by_class[c].size() < by_class[minority].size()) minority = c;
  }

  Rng rng(cfg.seed);

  // Seeded undersampling: keep a random subset of the majority class,
  // preserving original order.
  std::vector<char> keep(data.size(), 1);
  {
    auto& maj = by_class[majority];
    const auto target =
        static_cast<std::size_t>(std::llround(cfg.majority_keep_frac * maj.size()));
    std::vector<std::size_t> shuffled = maj;
    rng.shuffle(shuffled);
    for (std::size_t i = target; i < shuffled.size(); ++i) keep[shuffled[i]] = 0;
  }

  Dataset out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!keep[i]) continue;
    out.x.push_back(data.x[i]);
    out.y.push_back(data.y[i]);
  }

  // ADASYN on the minority class.
  const auto& min_idx = by_class[minority];
  const auto g_total = static_cast<std::size_t>(std::llround(cfg.minority_growth * min_idx.size()));
  if (g_total > 0) {
    if (min_idx.size() < static_cast<std::size_t>(cfg.adasyn_k) + 1)
      throw DataError("rebalance: minority class smaller than k+1, cannot oversample");

    std::vector<std::size_t> all_idx(data.size());
    std::iota(all_idx.begin(), all_idx.end(), 0);

    // Density weights: share of non-minority samples among each minority
    // point's k nearest neighbors in the full dataset.
    std::vector<double> weight(min_idx.size(), 0.0);
    double weight_sum = 0.0;
    for (std::size_t m = 0; m < min_idx.size(); ++m) {
      const auto nb = knn(data.x, all_idx, data.x[min_idx[m]], min_idx[m], cfg.adasyn_k);
      int foreign = 0;
      for (const std::size_t j : nb)
        if (data.y[j] != minority) ++foreign;
      weight[m] = nb.empty() ? 0.0 : static_cast<double>(foreign) / static_cast<double>(nb.size());
      weight_sum += weight[m];
    }
    if (weight_sum <= 0.0) {
      // Fully separated minority: spread the budget uniformly.
      std::fill(weight.begin(), weight.end(), 1.0);
      weight_sum = static_cast<double>(weight.size());
    }

    // Largest-remainder apportionment so the synthetic count is exact.
    std::vector<std::size_t> quota(min_idx.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainder;
    std::size_t assigned = 0;
    for (std::size_t m = 0; m < min_idx.size(); ++m) {
      const double share = weight[m] / weight_sum * static_cast<double>(g_total);
      quota[m] = static_cast<std::size_t>(share);
      assigned += quota[m];
      remainder.emplace_back(-(share - static_cast<double>(quota[m])), m);
    }
    std::sort(remainder.begin(), remainder.end());
    for (std::size_t i = 0; assigned < g_total && i < remainder.size(); ++i, ++assigned)
      ++quota[remainder[i].second];

    for (std::size_t m = 0; m < min_idx.size(); ++m) {
      if (quota[m] == 0) continue;
      const auto nb = knn(data.x, min_idx, data.x[min_idx[m]], min_idx[m], cfg.adasyn_k);
      for (std::size_t q = 0; q < quota[m]; ++q) {
        const std::size_t partner = nb[rng.uniform_int(nb.size())];
        const double lambda = rng.uniform();
        std::vector<double> synth(data.x[min_idx[m]].size());
        for (std::size_t j = 0; j < synth.size(); ++j)
          synth[j] = data.x[min_idx[m]][j] +
                     lambda * (data.x[partner][j] - data.x[min_idx[m]][j]);
        out.x.push_back(std::move(synth));
        out.y.push_back(minority);
      }
    }
  }
  return out;
}

namespace {

WilcoxonResult wilcoxon_prepare(std::span<const double> a, std::span<const double> b,
                                std::vector<double>& ranks, std::vector<int>& signs,
                                double& tie_correction) {
  if (a.size() != b.size())
    throw DataError("wilcoxon: paired samples must have equal length");
  std::vector<double> abs_d;
  std::vector<int> sign_d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d == 0.0) continue;  // zero differences are dropped
    abs_d.push_back(std::abs(d));
    sign_d.push_back(d > 0.0 ? 1 : -1);
  }
  if (abs_d.empty())
    throw DataError("wilcoxon: all differences are zero, test undefined");

  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return abs_d[x] < abs_d[y]; });

  ranks.assign(n, 0.0);
  tie_correction = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    const double t = static_cast<double>(j - i + 1);
    tie_correction += (t * t * t - t);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    i = j + 1;
  }
  signs = std::move(sign_d);

  WilcoxonResult r;
  r.n_effective = static_cast<int>(n);
  for (std::size_t k = 0; k < n; ++k)
    if (signs[k] > 0) r.w_plus += ranks[k];
  return r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank_exact(std::span<const double> a, std::span<const double> b) {
  std::vector<double> ranks;
  std::vector<int> signs;
  double tie_correction = 0.0;
  WilcoxonResult r = wilcoxon_prepare(a, b, ranks, signs, tie_correction);
  const std::size_t n = ranks.size();
  if (n > 30) throw ConfigError("wilcoxon exact: too many pairs for enumeration");

  // Average ranks are multiples of 1/2; scale by 2 for an integer DP over
  // all 2^n sign assignments.
  std::vector<long long> scaled(n);
  long long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = std::llround(2.0 * ranks[i]);
    total += scaled[i];
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (long long w = total; w >= scaled[i]; --w)
      count[static_cast<std::size_t>(w)] += count[static_cast<std::size_t>(w - scaled[i])];

  const double denom = std::pow(2.0, static_cast<double>(n));
  const long long w_obs = std::llround(2.0 * r.w_plus);
  double le = 0.0, ge = 0.0;
  for (long long w = 0; w <= total; ++w) {
    if (w <= w_obs) le += count[static_cast<std::size_t>(w)];
    if (w >= w_obs) ge += count[static_cast<std::size_t>(w)];
  }
  r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / denom);
  r.exact = true;
  return r;
}

WilcoxonResult wilcoxon_signed_rank_normal(std::span<const double> a, std::span<const double> b) {
  std::vector<double> ranks;
  std::vector<int> signs;
  double tie_correction = 0.0;
  WilcoxonResult r = wilcoxon_prepare(a, b, ranks, signs, tie_correction);
  const double n = static_cast<double>(r.n_effective);
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_correction / 48.0;
  if (var <= 0.0) throw DataError("wilcoxon: zero variance (all magnitudes tied?)");
  double z = r.w_plus - mean;
  // Continuity correction toward the mean.
  if (z > 0.5) z -= 0.5;
  else if (z < -0.5) z += 0.5;
  else z = 0.0;
  z /= std::sqrt(var);
  r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
  r.exact = false;
  return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    int exact_threshold) {
  std::vector<double> ranks;
  std::vector<int> signs;
  double tie_correction = 0.0;
  const WilcoxonResult probe = wilcoxon_prepare(a, b, ranks, signs, tie_correction);
  if (probe.n_effective <= exact_threshold) return wilcoxon_signed_rank_exact(a, b);
  return wilcoxon_signed_rank_normal(a, b);
}

int FoldPlan::fold_of(int recording) const {
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (const int r : folds[f])
      if (r == recording) return static_cast<int>(f);
  return -1;
}

FoldPlan make_fold_plan(std::span<const std::vector<Bout>> recording_bouts, int n_folds) {
  if (n_folds < 2) throw ConfigError("fold plan: need at least 2 folds");
  const int n = static_cast<int>(recording_bouts.size());
  if (n < n_folds) throw DataError("fold plan: fewer recordings than folds");

  // Composition key: time share of grazing, then rumination.
  struct Key {
    double grazing, rumination;
    int index;
  };
  std::vector<Key> keys;
  for (int r = 0; r < n; ++r) {
    double per_class[kNumActivities] = {0, 0, 0};
    double total = 0.0;
    for (const Bout& b : recording_bouts[r]) {
      per_class[static_cast<int>(b.label)] += b.end_s - b.start_s;
      total += b.end_s - b.start_s;
    }
    if (total <= 0.0) total = 1.0;
    keys.push_back({per_class[0] / total, per_class[1] / total, r});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.grazing != b.grazing) return a.grazing < b.grazing;
    if (a.rumination != b.rumination) return a.rumination < b.rumination;
    return a.index < b.index;
  });

  FoldPlan plan;
  plan.folds.assign(static_cast<std::size_t>(n_folds), {});
  for (int i = 0; i < n; ++i)
    plan.folds[static_cast<std::size_t>(i % n_folds)].push_back(keys[static_cast<std::size_t>(i)].index);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

}  // namespace nrfar
