#ifndef NRFAR_MLP_HPP
#define NRFAR_MLP_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nrfar {

// Feed-forward net: tanh hidden layer, softmax output. Inputs are
// z-scored with statistics frozen at training time.
struct MlpModel {
  int n_in = 0;
  int n_hidden = 0;
  int n_out = 0;
  std::vector<double> w1;  // n_hidden x n_in, row-major
  std::vector<double> b1;  // n_hidden
  std::vector<double> w2;  // n_out x n_hidden, row-major
  std::vector<double> b2;  // n_out
  std::vector<double> norm_mean;  // per input feature
  std::vector<double> norm_std;   // per input feature, always > 0
  std::vector<std::string> class_order;

  // Training provenance.
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  int iterations = 0;
  double final_loss = 0.0;

  // Class probabilities; positive, summing to 1.
  std::vector<double> forward(std::span<const double> x) const;
  // Argmax class index; ties resolve to the lowest index (fixed class order).
  int predict(std::span<const double> x) const;

  void validate() const;  // throws ConfigError on inconsistent shapes
};

// Zero-initialized model of the given shape (uniform output for any input).
MlpModel make_zero_model(int n_in, int n_hidden, int n_out,
                         std::vector<std::string> class_order);

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
};

struct TrainConfig {
  std::vector<double> learning_rates{0.1, 0.01, 0.001, 0.0001};
  int hidden_min = 4;
  int hidden_max = 10;
  int max_iterations = 1000;
  double tolerance = 1e-7;  // minimum loss improvement
  int patience = 10;        // iterations without improvement before stopping
  std::uint64_t seed = 1;
};

// Full-batch scaled conjugate gradient on mean cross-entropy. The
// "learning rate" parameter sets Moller's initial scales
// (sigma0 = lr * 1e-3, lambda0 = lr * 1e-5, so lr = 0.1 reproduces the
// classic sigma = 1e-4, lambda = 1e-6); SCG itself has no step size.
// Deterministic for a fixed seed. Sample-wise sums use recursive
// mid-split (pairwise) accumulation, which also makes the gradient exact
// under block duplication of the dataset.
MlpModel train_scg(const Dataset& data, int n_hidden,
                   std::vector<std::string> class_order,
                   double learning_rate, std::uint64_t seed,
                   int max_iterations = 1000, double tolerance = 1e-7,
                   int patience = 10);

// Mean cross-entropy of the model on a dataset (uses the model's stored
// normalization).
double cross_entropy(const MlpModel& model, const Dataset& data);

// Analytic gradient of the mean cross-entropy with respect to all
// parameters, in the flat order [w1, b1, w2, b2]. Exposed for testing.
std::vector<double> loss_gradient(const MlpModel& model, const Dataset& data);

struct GridPoint {
  double learning_rate = 0.0;
  int hidden = 0;
  double val_balanced_accuracy = 0.0;
};

struct GridSearchResult {
  MlpModel model;
  GridPoint best;
  std::vector<GridPoint> points;  // all evaluated cells
};

// Exhaustive search over learning_rates x [hidden_min, hidden_max],
// selecting the highest validation balanced accuracy; ties prefer fewer
// hidden neurons, then the larger learning rate. Grid cells may train in
// parallel (`threads`); the outcome does not depend on thread count.
GridSearchResult grid_search(const Dataset& train, const Dataset& val,
                             std::vector<std::string> class_order,
                             const TrainConfig& cfg, int threads = 1);

// JSON model artifact; numbers round-trip bit-exactly.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

}  // namespace nrfar

#endif
