#include "nrfar/ops.hpp"

#include <cmath>
#include <sstream>

#include "nrfar/errors.hpp"
#include "nrfar/textio.hpp"

namespace nrfar::ops {

double mlp_ops(int n_in, int n_hidden, int n_out) {
  return static_cast<double>(n_hidden) * (2.0 * n_in + 1.0) +
         static_cast<double>(n_out) * (2.0 * n_hidden + 2.0) + 9.0;
}

namespace {

long long half_up(double v) { return std::llround(v); }

}  // namespace

OpsBudget cost(const CostParams& p) {
  if (p.f_i_hz <= 0.0 || p.f_s_hz <= 0.0 || p.jm_events_per_s < 0.0 || p.segment_s <= 0.0)
    throw ConfigError("ops model: parameters must be positive");

  OpsBudget b;
  const double fi = p.f_i_hz;
  const double fs = p.f_s_hz;
  const double rate = p.jm_events_per_s;

  auto add_per_s = [&](const std::string& name, double raw) {
    b.stages.push_back({name, StageUnit::OpsPerSecond, raw, half_up(raw)});
  };
  auto add_per_seg = [&](const std::string& name, double raw) {
    b.stages.push_back({name, StageUnit::OpsPerSegment, raw, half_up(raw)});
  };

  // Bottom level: filtering + squaring, then the two down-sampled streams.
  add_per_s("pre-processing", 7.0 * fi + fi);
  add_per_s("signal computation", (11.0 * fi + fs) + (fi + 2.0 * fs));

  // Middle level, event-driven.
  add_per_s("jm detection", ((4.0 + 0.925 * fs) + (12.0 + fs)) * rate);
  add_per_s("jm feature extraction", (3.5 * fs) * rate);
  add_per_s("jm classification",
            ((fs + 3.0) + mlp_ops(p.jm_mlp_in, p.jm_mlp_hidden, p.jm_mlp_out)) * rate);
  add_per_s("threshold tuning", (fs + 39.0) * rate);

  // Top level: per-event buffering plus once-per-segment work.
  add_per_s("segment buffering", 2.0 * rate);
  add_per_seg("activity feature extraction", rate * p.segment_s + 8.0);
  add_per_seg("activity classification",
              mlp_ops(p.activity_mlp_in, p.activity_mlp_hidden, p.activity_mlp_out));
  add_per_seg("label smoothing", 2.0);

  for (const StageCost& s : b.stages) {
    if (s.unit == StageUnit::OpsPerSecond) {
      b.total_ops_per_s += s.rounded;
      b.raw_ops_per_s += s.raw;
    } else {
      b.total_ops_per_segment += s.rounded;
    }
  }
  b.grand_ops_per_segment =
      b.total_ops_per_s * static_cast<long long>(std::llround(p.segment_s)) +
      b.total_ops_per_segment;
  return b;
}

std::vector<ComparisonRow> compare(const std::vector<std::pair<std::string, double>>& totals) {
  if (totals.size() < 2) throw ConfigError("ops compare: need at least two budgets");
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < totals.size(); ++i)
    for (std::size_t j = 0; j < totals.size(); ++j) {
      if (i == j) continue;
      ComparisonRow r;
      r.name_a = totals[i].first;
      r.name_b = totals[j].first;
      r.percent = (totals[i].second - totals[j].second) / totals[j].second * 100.0;
      rows.push_back(r);
    }
  return rows;
}

std::string budget_csv(const OpsBudget& b) {
  std::ostringstream out;
  out << "stage,unit,raw,rounded\n";
  for (const StageCost& s : b.stages)
    out << s.name << ','
        << (s.unit == StageUnit::OpsPerSecond ? "ops/s" : "ops/segment") << ','
        << format_double(s.raw) << ',' << s.rounded << "\n";
  out << "total,ops/s," << format_double(b.raw_ops_per_s) << ',' << b.total_ops_per_s << "\n";
  out << "total,ops/segment,," << b.total_ops_per_segment << "\n";
  out << "grand total,ops/segment,," << b.grand_ops_per_segment << "\n";
  return out.str();
}

std::string budget_markdown(const OpsBudget& b) {
  std::ostringstream out;
  out << "| stage | unit | ops |\n|---|---|---|\n";
  for (const StageCost& s : b.stages)
    out << "| " << s.name << " | "
        << (s.unit == StageUnit::OpsPerSecond ? "ops/s" : "ops/segment") << " | "
        << s.rounded << " |\n";
  out << "| total | ops/s | " << b.total_ops_per_s << " |\n";
  out << "| total | ops/segment | " << b.total_ops_per_segment << " |\n";
  out << "| grand total | ops/segment | " << b.grand_ops_per_segment << " |\n";
  return out.str();
}

}  // namespace nrfar::ops
