#include "nrfar/metrics.hpp"

#include "nrfar/errors.hpp"

namespace nrfar {

long long ConfusionMatrix::row_sum(int truth) const {
  long long s = 0;
  for (int c = 0; c < n_classes; ++c) s += at(truth, c);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, int n_classes) {
  if (truth.size() != pred.size())
    throw DataError("confusion_matrix: truth/prediction length mismatch");
  ConfusionMatrix m(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes)
      throw DataError("confusion_matrix: label out of range");
    m.add(truth[i], pred[i]);
  }
  return m;
}

double balanced_accuracy(const ConfusionMatrix& m) {
  double recall_sum = 0.0;
  int present = 0;
  for (int c = 0; c < m.n_classes; ++c) {
    const long long total = m.row_sum(c);
    if (total == 0) continue;
    recall_sum += static_cast<double>(m.at(c, c)) / static_cast<double>(total);
    ++present;
  }
  if (present == 0) throw DataError("balanced_accuracy: no labels");
  return recall_sum / present;
}

double balanced_accuracy(std::span<const int> truth, std::span<const int> pred, int n_classes) {
  if (truth.size() != pred.size())
    throw DataError("balanced_accuracy: truth/prediction length mismatch");
  std::vector<long long> correct(n_classes, 0), total(n_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes)
      throw DataError("balanced_accuracy: label out of range");
    ++total[truth[i]];
    if (truth[i] == pred[i]) ++correct[truth[i]];
  }
  double recall_sum = 0.0;
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (total[c] == 0) continue;
    recall_sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++present;
  }
  if (present == 0) throw DataError("balanced_accuracy: no labels");
  return recall_sum / present;
}

}  // namespace nrfar
