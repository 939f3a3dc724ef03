#ifndef NRFAR_OPS_HPP
#define NRFAR_OPS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nrfar::ops {

// Parameters of the symbolic operation-count model. One "op" is any
// arithmetic operation, shift, comparison, or activation evaluation.
struct CostParams {
  double f_i_hz = 2000.0;        // input sampling rate
  double f_s_hz = 150.0;         // internal stream rate
  double jm_events_per_s = 2.0;  // worst-case event rate
  int jm_mlp_in = 5, jm_mlp_hidden = 6, jm_mlp_out = 4;
  int activity_mlp_in = 5, activity_mlp_hidden = 10, activity_mlp_out = 3;
  double segment_s = 300.0;
};

enum class StageUnit { OpsPerSecond, OpsPerSegment };

struct StageCost {
  std::string name;
  StageUnit unit = StageUnit::OpsPerSecond;
  double raw = 0.0;        // exact model value
  long long rounded = 0;   // half-up per stage, used for the totals
};

struct OpsBudget {
  std::vector<StageCost> stages;
  long long total_ops_per_s = 0;
  long long total_ops_per_segment = 0;       // top-level per-segment work
  long long grand_ops_per_segment = 0;       // per-second total folded into one segment
  double raw_ops_per_s = 0.0;                // unrounded per-second total
};

// Feed-forward MLP op count: per hidden neuron 2*in+1 ops (multiplies,
// adds incl. bias, activation), per output neuron 2*hidden+2, plus a
// constant 9 for the softmax normalization. Gives 131 ops for 5-6-4 and
// 185 for 5-10-3.
double mlp_ops(int n_in, int n_hidden, int n_out);

OpsBudget cost(const CostParams& params = {});

struct ComparisonRow {
  std::string name_a, name_b;
  double percent = 0.0;  // (a - b) / b * 100
};

// Pairwise relative differences between budget totals (ops/s).
std::vector<ComparisonRow> compare(const std::vector<std::pair<std::string, double>>& totals);

// Stage table as CSV or a fixed-width markdown table.
std::string budget_csv(const OpsBudget& b);
std::string budget_markdown(const OpsBudget& b);

}  // namespace nrfar::ops

#endif
