#ifndef NRFAR_EVAL_HPP
#define NRFAR_EVAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrfar/activity.hpp"
#include "nrfar/metrics.hpp"
#include "nrfar/mlp.hpp"

namespace nrfar {

// Per-second label sequence for one recording.
struct FrameSeries {
  std::vector<ActivityLabel> labels;
};

// Frame i takes the label of the bout containing time i + 0.5 s; the
// series has floor(duration) frames. Throws DataError when a frame
// midpoint is not covered by any bout.
FrameSeries expand_frames(std::span<const Bout> bouts, double duration_s);

double balanced_accuracy(const FrameSeries& truth, const FrameSeries& pred);
ConfusionMatrix confusion(const FrameSeries& truth, const FrameSeries& pred);

struct RebalanceConfig {
  double majority_keep_frac = 0.70;  // random undersampling of the largest class
  double minority_growth = 1.0;      // ADASYN target: +100% synthetic samples
  int adasyn_k = 5;
  std::uint64_t seed = 1;
};

// Training-set rebalancing: seeded random undersampling of the majority
// class plus ADASYN oversampling of the minority class (density-adaptive
// k-NN interpolation); any middle class passes through untouched.
// Throws DataError when the minority class has fewer than k+1 samples.
Dataset rebalance_training(const Dataset& data, int n_classes, const RebalanceConfig& cfg);

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;       // sum of ranks of positive differences
  int n_effective = 0;       // pairs after dropping zero differences
  bool exact = false;        // exact enumeration vs normal approximation
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero
// differences are dropped, tied magnitudes get average ranks; the exact
// null distribution is enumerated for n <= exact_threshold, otherwise
// a normal approximation with continuity and tie correction is used.
// Throws DataError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    int exact_threshold = 25);
// Forces one path or the other (for cross-checking the two).
WilcoxonResult wilcoxon_signed_rank_exact(std::span<const double> a, std::span<const double> b);
WilcoxonResult wilcoxon_signed_rank_normal(std::span<const double> a, std::span<const double> b);

// Composition-stratified recording folds: recordings are sorted by
// activity-time composition and dealt round-robin, so every fold sees a
// similar activity mix. Folds partition [0, n).
struct FoldPlan {
  std::vector<std::vector<int>> folds;  // recording indices per fold

  int fold_of(int recording) const;
};
FoldPlan make_fold_plan(std::span<const std::vector<Bout>> recording_bouts, int n_folds);

}  // namespace nrfar

#endif
