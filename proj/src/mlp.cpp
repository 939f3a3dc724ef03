#include "nrfar/mlp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include <json.hpp>

#include "nrfar/errors.hpp"
#include "nrfar/metrics.hpp"
#include "nrfar/rng.hpp"
#include "nrfar/textio.hpp"

namespace nrfar {

namespace {

void softmax_inplace(std::vector<double>& z) {
  double m = z[0];
  for (const double v : z) m = std::max(m, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

void MlpModel::validate() const {
  const auto h = static_cast<std::size_t>(n_hidden);
  const auto in = static_cast<std::size_t>(n_in);
  const auto out = static_cast<std::size_t>(n_out);
  if (n_in <= 0 || n_hidden <= 0 || n_out <= 0)
    throw ConfigError("mlp: layer sizes must be positive");
  if (w1.size() != h * in || b1.size() != h || w2.size() != out * h || b2.size() != out)
    throw ConfigError("mlp: weight shapes inconsistent with layer sizes");
  if (norm_mean.size() != in || norm_std.size() != in)
    throw ConfigError("mlp: normalization statistics shape mismatch");
  for (const double s : norm_std)
    if (!(s > 0.0)) throw ConfigError("mlp: normalization std must be > 0");
  if (class_order.size() != out)
    throw ConfigError("mlp: class order length must equal output size");
}

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(n_in))
    throw ConfigError("mlp forward: input dimension mismatch");
  std::vector<double> xn(n_in);
  for (int i = 0; i < n_in; ++i) xn[i] = (x[i] - norm_mean[i]) / norm_std[i];

  std::vector<double> hidden(n_hidden);
  for (int j = 0; j < n_hidden; ++j) {
    double z = b1[j];
    const double* row = &w1[static_cast<std::size_t>(j) * n_in];
    for (int i = 0; i < n_in; ++i) z += row[i] * xn[i];
    hidden[j] = std::tanh(z);
  }
  std::vector<double> out(n_out);
  for (int k = 0; k < n_out; ++k) {
    double z = b2[k];
    const double* row = &w2[static_cast<std::size_t>(k) * n_hidden];
    for (int j = 0; j < n_hidden; ++j) z += row[j] * hidden[j];
    out[k] = z;
  }
  softmax_inplace(out);
  return out;
}

int MlpModel::predict(std::span<const double> x) const {
  const std::vector<double> p = forward(x);
  int best = 0;
  for (int k = 1; k < n_out; ++k)
    if (p[k] > p[best]) best = k;
  return best;
}

MlpModel make_zero_model(int n_in, int n_hidden, int n_out,
                         std::vector<std::string> class_order) {
  MlpModel m;
  m.n_in = n_in;
  m.n_hidden = n_hidden;
  m.n_out = n_out;
  m.w1.assign(static_cast<std::size_t>(n_hidden) * n_in, 0.0);
  m.b1.assign(n_hidden, 0.0);
  m.w2.assign(static_cast<std::size_t>(n_out) * n_hidden, 0.0);
  m.b2.assign(n_out, 0.0);
  m.norm_mean.assign(n_in, 0.0);
  m.norm_std.assign(n_in, 1.0);
  m.class_order = std::move(class_order);
  m.validate();
  return m;
}

namespace {

// Full-batch loss/gradient engine over a normalized copy of the data.
// Sample sums are accumulated by recursive mid-split so that the result
// is independent of how many times the dataset is concatenated with
// itself (both halves of a duplicated block reduce to bit-identical
// partials).
class BatchEvaluator {
 public:
  BatchEvaluator(const Dataset& data, int n_in, int n_hidden, int n_out,
                 std::vector<double> mean, std::vector<double> std)
      : n_(data.size()),
        n_in_(n_in),
        n_hidden_(n_hidden),
        n_out_(n_out),
        n_params_((static_cast<std::size_t>(n_hidden) * n_in) + n_hidden +
                  (static_cast<std::size_t>(n_out) * n_hidden) + n_out),
        mean_(std::move(mean)),
        std_(std::move(std)),
        labels_(data.y) {
    xn_.resize(n_ * n_in_);
    for (std::size_t s = 0; s < n_; ++s)
      for (int i = 0; i < n_in_; ++i)
        xn_[s * n_in_ + i] = (data.x[s][i] - mean_[i]) / std_[i];
    hidden_.resize(n_hidden_);
    probs_.resize(n_out_);
    dz1_.resize(n_hidden_);
  }

  std::size_t n_params() const { return n_params_; }

  // loss only
  double loss(std::span<const double> w) {
    double total = reduce_loss(w, 0, n_);
    return total / static_cast<double>(n_);
  }

  // loss and gradient together
  double loss_grad(std::span<const double> w, std::vector<double>& grad) {
    grad.assign(n_params_, 0.0);
    const double total = reduce_loss_grad(w, 0, n_, grad, 0);
    for (double& g : grad) g /= static_cast<double>(n_);
    return total / static_cast<double>(n_);
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  double sample_loss_grad(std::span<const double> w, std::size_t s, double* grad) {
    const double* x = &xn_[s * n_in_];
    const double* w1 = w.data();
    const double* b1 = w1 + static_cast<std::size_t>(n_hidden_) * n_in_;
    const double* w2 = b1 + n_hidden_;
    const double* b2 = w2 + static_cast<std::size_t>(n_out_) * n_hidden_;

    for (int j = 0; j < n_hidden_; ++j) {
      double z = b1[j];
      const double* row = w1 + static_cast<std::size_t>(j) * n_in_;
      for (int i = 0; i < n_in_; ++i) z += row[i] * x[i];
      hidden_[j] = std::tanh(z);
    }
    double zmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_out_; ++k) {
      double z = b2[k];
      const double* row = w2 + static_cast<std::size_t>(k) * n_hidden_;
      for (int j = 0; j < n_hidden_; ++j) z += row[j] * hidden_[j];
      probs_[k] = z;
      zmax = std::max(zmax, z);
    }
    double expsum = 0.0;
    for (int k = 0; k < n_out_; ++k) {
      probs_[k] = std::exp(probs_[k] - zmax);
      expsum += probs_[k];
    }
    const int y = labels_[s];
    const double loss = std::log(expsum) - std::log(probs_[y]);
    for (int k = 0; k < n_out_; ++k) probs_[k] /= expsum;

    if (grad != nullptr) {
      double* g_w1 = grad;
      double* g_b1 = g_w1 + static_cast<std::size_t>(n_hidden_) * n_in_;
      double* g_w2 = g_b1 + n_hidden_;
      double* g_b2 = g_w2 + static_cast<std::size_t>(n_out_) * n_hidden_;

      std::fill(dz1_.begin(), dz1_.end(), 0.0);
      for (int k = 0; k < n_out_; ++k) {
        const double d = probs_[k] - (k == y ? 1.0 : 0.0);
        g_b2[k] += d;
        double* g_row = g_w2 + static_cast<std::size_t>(k) * n_hidden_;
        const double* w_row = w2 + static_cast<std::size_t>(k) * n_hidden_;
        for (int j = 0; j < n_hidden_; ++j) {
          g_row[j] += d * hidden_[j];
          dz1_[j] += d * w_row[j];
        }
      }
      for (int j = 0; j < n_hidden_; ++j) {
        const double d = dz1_[j] * (1.0 - hidden_[j] * hidden_[j]);
        g_b1[j] += d;
        double* g_row = g_w1 + static_cast<std::size_t>(j) * n_in_;
        for (int i = 0; i < n_in_; ++i) g_row[i] += d * x[i];
      }
    }
    return loss;
  }

  double reduce_loss(std::span<const double> w, std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) {
      double sum = 0.0;
      for (std::size_t s = lo; s < hi; ++s) sum += sample_loss_grad(w, s, nullptr);
      return sum;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return reduce_loss(w, lo, mid) + reduce_loss(w, mid, hi);
  }

  double reduce_loss_grad(std::span<const double> w, std::size_t lo, std::size_t hi,
                          std::vector<double>& grad, std::size_t depth) {
    if (hi - lo <= kLeaf) {
      double sum = 0.0;
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t s = lo; s < hi; ++s) sum += sample_loss_grad(w, s, grad.data());
      return sum;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    if (scratch_.size() <= depth) scratch_.resize(depth + 1);
    std::vector<double>& right = scratch_[depth];
    if (right.size() != n_params_) right.assign(n_params_, 0.0);
    const double left_sum = reduce_loss_grad(w, lo, mid, grad, depth + 1);
    const double right_sum = reduce_loss_grad(w, mid, hi, right, depth + 1);
    for (std::size_t i = 0; i < n_params_; ++i) grad[i] += right[i];
    return left_sum + right_sum;
  }

  std::size_t n_;
  int n_in_, n_hidden_, n_out_;
  std::size_t n_params_;
  std::vector<double> mean_, std_;
  std::vector<int> labels_;
  std::vector<double> xn_;
  std::vector<double> hidden_, probs_, dz1_;
  std::vector<std::vector<double>> scratch_;
};

// Pairwise (mid-split) sum of f(s) over [0, n).
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, const F& f) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

void compute_normalization(const Dataset& data, int n_in,
                           std::vector<double>& mean, std::vector<double>& std) {
  const std::size_t n = data.size();
  mean.resize(n_in);
  std.resize(n_in);
  for (int i = 0; i < n_in; ++i) {
    const double sum = pairwise_sum(0, n, [&](std::size_t s) { return data.x[s][i]; });
    mean[i] = sum / static_cast<double>(n);
    const double sq = pairwise_sum(0, n, [&](std::size_t s) {
      const double d = data.x[s][i] - mean[i];
      return d * d;
    });
    const double sd = std::sqrt(sq / static_cast<double>(n));
    std[i] = sd > 1e-12 ? sd : 1.0;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double cross_entropy(const MlpModel& model, const Dataset& data) {
  model.validate();
  if (data.size() == 0) throw DataError("cross_entropy: empty dataset");
  BatchEvaluator ev(data, model.n_in, model.n_hidden, model.n_out, model.norm_mean,
                    model.norm_std);
  std::vector<double> w;
  w.insert(w.end(), model.w1.begin(), model.w1.end());
  w.insert(w.end(), model.b1.begin(), model.b1.end());
  w.insert(w.end(), model.w2.begin(), model.w2.end());
  w.insert(w.end(), model.b2.begin(), model.b2.end());
  return ev.loss(w);
}

std::vector<double> loss_gradient(const MlpModel& model, const Dataset& data) {
  model.validate();
  if (data.size() == 0) throw DataError("loss_gradient: empty dataset");
  BatchEvaluator ev(data, model.n_in, model.n_hidden, model.n_out, model.norm_mean,
                    model.norm_std);
  std::vector<double> w;
  w.insert(w.end(), model.w1.begin(), model.w1.end());
  w.insert(w.end(), model.b1.begin(), model.b1.end());
  w.insert(w.end(), model.w2.begin(), model.w2.end());
  w.insert(w.end(), model.b2.begin(), model.b2.end());
  std::vector<double> grad;
  ev.loss_grad(w, grad);
  return grad;
}

MlpModel train_scg(const Dataset& data, int n_hidden,
                   std::vector<std::string> class_order, double learning_rate,
                   std::uint64_t seed, int max_iterations, double tolerance,
                   int patience) {
  if (data.size() == 0) throw DataError("train_scg: empty dataset");
  if (data.x.empty() || data.x[0].empty())
    throw DataError("train_scg: samples have no features");
  const int n_in = static_cast<int>(data.x[0].size());
  const int n_out = static_cast<int>(class_order.size());
  if (n_out < 2) throw ConfigError("train_scg: need at least two classes");
  if (n_hidden <= 0) throw ConfigError("train_scg: hidden size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train_scg: learning rate must be positive");
  for (std::size_t s = 0; s < data.size(); ++s) {
    if (data.x[s].size() != static_cast<std::size_t>(n_in))
      throw DataError("train_scg: ragged feature rows");
    if (data.y[s] < 0 || data.y[s] >= n_out)
      throw DataError("train_scg: label outside class order");
  }

  std::vector<double> mean, std;
  compute_normalization(data, n_in, mean, std);
  BatchEvaluator ev(data, n_in, n_hidden, n_out, mean, std);
  const std::size_t np = ev.n_params();

  // Seeded uniform init in [-r, r], r = 1/sqrt(fan-in), layer by layer.
  std::vector<double> w(np);
  {
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(n_in));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(n_hidden));
    std::size_t idx = 0;
    const std::size_t w1n = static_cast<std::size_t>(n_hidden) * n_in;
    for (std::size_t i = 0; i < w1n; ++i) w[idx++] = rng.uniform(-r1, r1);
    for (int i = 0; i < n_hidden; ++i) w[idx++] = rng.uniform(-r1, r1);
    const std::size_t w2n = static_cast<std::size_t>(n_out) * n_hidden;
    for (std::size_t i = 0; i < w2n; ++i) w[idx++] = rng.uniform(-r2, r2);
    for (int i = 0; i < n_out; ++i) w[idx++] = rng.uniform(-r2, r2);
  }

  // Moller's SCG. The grid "learning rate" only scales the initial
  // sigma/lambda; lr = 0.1 gives the canonical sigma = 1e-4, lambda = 1e-6.
  const double sigma0 = learning_rate * 1e-3;
  double lambda = learning_rate * 1e-5;
  double lambda_bar = 0.0;

  std::vector<double> grad(np), grad_shift(np), r(np), p(np), w_try(np), r_new(np);
  double loss = ev.loss_grad(w, grad);
  for (std::size_t i = 0; i < np; ++i) r[i] = -grad[i];
  p = r;
  bool success = true;

  double best_loss = loss;
  int stall = 0;
  int iters = 0;
  double delta = 0.0, norm_p2 = 0.0;

  for (int k = 1; k <= max_iterations; ++k) {
    iters = k;
    if (success) {
      norm_p2 = dot(p, p);
      if (norm_p2 == 0.0) break;
      const double sigma = sigma0 / std::sqrt(norm_p2);
      for (std::size_t i = 0; i < np; ++i) w_try[i] = w[i] + sigma * p[i];
      ev.loss_grad(w_try, grad_shift);
      delta = 0.0;
      for (std::size_t i = 0; i < np; ++i)
        delta += p[i] * (grad_shift[i] - grad[i]) / sigma;
    }
    delta += (lambda - lambda_bar) * norm_p2;
    if (delta <= 0.0) {  // make the Hessian estimate positive definite
      lambda_bar = 2.0 * (lambda - delta / norm_p2);
      delta = -delta + lambda * norm_p2;
      lambda = lambda_bar;
    }
    const double mu = dot(p, r);
    const double alpha = mu / delta;
    if (!std::isfinite(alpha)) break;

    for (std::size_t i = 0; i < np; ++i) w_try[i] = w[i] + alpha * p[i];
    const double loss_try = ev.loss(w_try);
    const double comparison = 2.0 * delta * (loss - loss_try) / (mu * mu);

    if (comparison >= 0.0) {
      w.swap(w_try);
      const double new_loss = ev.loss_grad(w, grad);
      for (std::size_t i = 0; i < np; ++i) r_new[i] = -grad[i];
      lambda_bar = 0.0;
      success = true;
      if (k % static_cast<int>(np) == 0) {
        p = r_new;  // restart in the gradient direction
      } else {
        const double beta = (dot(r_new, r_new) - dot(r_new, r)) / mu;
        for (std::size_t i = 0; i < np; ++i) p[i] = r_new[i] + beta * p[i];
      }
      r = r_new;
      if (comparison >= 0.75) lambda *= 0.25;
      loss = new_loss;

      if (best_loss - loss >= tolerance) {
        best_loss = loss;
        stall = 0;
      } else {
        if (++stall >= patience) break;
      }
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (comparison < 0.25) lambda += delta * (1.0 - comparison) / norm_p2;
    if (lambda > 1e100) break;
  }

  MlpModel model;
  model.n_in = n_in;
  model.n_hidden = n_hidden;
  model.n_out = n_out;
  model.class_order = std::move(class_order);
  model.norm_mean = std::move(mean);
  model.norm_std = std::move(std);
  model.seed = seed;
  model.learning_rate = learning_rate;
  model.iterations = iters;
  model.final_loss = loss;

  std::size_t idx = 0;
  const std::size_t w1n = static_cast<std::size_t>(n_hidden) * n_in;
  const std::size_t w2n = static_cast<std::size_t>(n_out) * n_hidden;
  model.w1.assign(w.begin(), w.begin() + w1n);
  idx = w1n;
  model.b1.assign(w.begin() + idx, w.begin() + idx + n_hidden);
  idx += n_hidden;
  model.w2.assign(w.begin() + idx, w.begin() + idx + w2n);
  idx += w2n;
  model.b2.assign(w.begin() + idx, w.begin() + idx + n_out);
  model.validate();
  return model;
}

GridSearchResult grid_search(const Dataset& train, const Dataset& val,
                             std::vector<std::string> class_order,
                             const TrainConfig& cfg, int threads) {
  if (cfg.learning_rates.empty() || cfg.hidden_min > cfg.hidden_max)
    throw ConfigError("grid_search: empty grid");
  if (train.size() == 0 || val.size() == 0)
    throw DataError("grid_search: empty train or validation set");

  // Priority order: fewer hidden neurons first, larger learning rate
  // first, so a strict > comparison implements the tie-break.
  std::vector<double> lrs = cfg.learning_rates;
  std::sort(lrs.begin(), lrs.end(), std::greater<double>());
  struct Cell {
    double lr;
    int hidden;
  };
  std::vector<Cell> cells;
  for (int h = cfg.hidden_min; h <= cfg.hidden_max; ++h)
    for (const double lr : lrs) cells.push_back({lr, h});

  const int n_out = static_cast<int>(class_order.size());
  std::vector<MlpModel> models(cells.size());
  std::vector<double> scores(cells.size());

  auto run_cell = [&](std::size_t c) {
    models[c] = train_scg(train, cells[c].hidden, class_order, cells[c].lr,
                          cfg.seed, cfg.max_iterations, cfg.tolerance, cfg.patience);
    std::vector<int> pred(val.size()), truth(val.size());
    for (std::size_t s = 0; s < val.size(); ++s) {
      pred[s] = models[c].predict(val.x[s]);
      truth[s] = val.y[s];
    }
    scores[c] = balanced_accuracy(truth, pred, n_out);
  };

  if (threads <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= cells.size()) return;
        run_cell(c);
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(cells.size()));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  GridSearchResult result;
  std::size_t best = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    result.points.push_back({cells[c].lr, cells[c].hidden, scores[c]});
    if (scores[c] > scores[best]) best = c;
  }
  result.best = {cells[best].lr, cells[best].hidden, scores[best]};
  result.model = std::move(models[best]);
  return result;
}

std::string model_to_json(const MlpModel& model) {
  model.validate();
  nlohmann::ordered_json j;
  j["format"] = "nrfar-mlp";
  j["version"] = 1;
  j["shape"] = {{"in", model.n_in}, {"hidden", model.n_hidden}, {"out", model.n_out}};
  j["class_order"] = model.class_order;
  j["normalization"] = {{"mean", model.norm_mean}, {"std", model.norm_std}};
  j["weights"] = {{"w1", model.w1}, {"b1", model.b1}, {"w2", model.w2}, {"b2", model.b2}};
  j["training"] = {{"seed", model.seed},
                   {"learning_rate", model.learning_rate},
                   {"iterations", model.iterations},
                   {"final_loss", model.final_loss}};
  return j.dump(2) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model artifact is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "nrfar-mlp")
    throw DataError("model artifact has unknown format tag");
  MlpModel m;
  try {
    m.n_in = j.at("shape").at("in").get<int>();
    m.n_hidden = j.at("shape").at("hidden").get<int>();
    m.n_out = j.at("shape").at("out").get<int>();
    m.class_order = j.at("class_order").get<std::vector<std::string>>();
    m.norm_mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.norm_std = j.at("normalization").at("std").get<std::vector<double>>();
    m.w1 = j.at("weights").at("w1").get<std::vector<double>>();
    m.b1 = j.at("weights").at("b1").get<std::vector<double>>();
    m.w2 = j.at("weights").at("w2").get<std::vector<double>>();
    m.b2 = j.at("weights").at("b2").get<std::vector<double>>();
    if (j.contains("training")) {
      m.seed = j["training"].value("seed", std::uint64_t{0});
      m.learning_rate = j["training"].value("learning_rate", 0.0);
      m.iterations = j["training"].value("iterations", 0);
      m.final_loss = j["training"].value("final_loss", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model artifact missing fields: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const MlpModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model));
}

MlpModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

}  // namespace nrfar
