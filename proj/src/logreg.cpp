#include "mcdrop/logreg.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mcdrop/error.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

namespace {

double sigmoid(double z)
{
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double logreg_predict(const LogRegModel& model, const SparseRow& x)
{
  double z = model.bias;
  for (std::size_t i = 0; i < x.index.size(); ++i) {
    if (x.index[i] >= model.weights.size())
      throw DimensionError(fmt::format("logreg_predict: feature {} outside model width {}",
                                       x.index[i], model.weights.size()));
    z += model.weights[x.index[i]] * x.value[i];
  }
  return sigmoid(z);
}

LogRegModel logreg_train(const SparseMatrix& X, std::span<const int> y, const LogRegConfig& cfg)
{
  if (X.rows.empty()) throw InputError("logreg_train: no training data");
  if (X.rows.size() != y.size())
    throw InputError(fmt::format("logreg_train: {} rows but {} labels", X.rows.size(), y.size()));
  if (cfg.l2 < 0.0) throw InputError("logreg_train: l2 must be non-negative");

  LogRegModel model;
  model.weights.resize(X.cols);
  Rng rng(cfg.seed);
  for (double& w : model.weights) w = 0.01 * rng.normal();

  const double n = static_cast<double>(X.rows.size());
  const double shrink = 1.0 / (1.0 + cfg.learning_rate * cfg.l2);
  std::vector<double> grad(X.cols);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t r = 0; r < X.rows.size(); ++r) {
      const SparseRow& row = X.rows[r];
      const double err = logreg_predict(model, row) - static_cast<double>(y[r]);
      for (std::size_t i = 0; i < row.index.size(); ++i) grad[row.index[i]] += err * row.value[i];
      grad_bias += err;
    }
    for (std::size_t j = 0; j < grad.size(); ++j)
      model.weights[j] = (model.weights[j] - cfg.learning_rate * grad[j] / n) * shrink;
    model.bias -= cfg.learning_rate * grad_bias / n;
  }
  return model;
}

}  // namespace mcdrop
