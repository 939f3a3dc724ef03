#ifndef NRFAR_METRICS_HPP
#define NRFAR_METRICS_HPP

#include <span>
#include <vector>

namespace nrfar {

// Row = truth, column = prediction.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<long long> counts;  // n x n, row-major

  explicit ConfusionMatrix(int n = 0) : n_classes(n), counts(static_cast<std::size_t>(n) * n, 0) {}

  long long& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
  long long at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
  long long row_sum(int truth) const;

  void add(int truth, int pred) { ++at(truth, pred); }
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, int n_classes);

// Macro recall over the classes present in the truth labels.
double balanced_accuracy(std::span<const int> truth, std::span<const int> pred, int n_classes);

// Same metric recomputed from an already-built matrix.
double balanced_accuracy(const ConfusionMatrix& m);

}  // namespace nrfar

#endif
