#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcdrop/textpipe.hpp"

namespace mcdrop {

struct LogRegConfig
{
  double l2 = 1e-4;
  std::size_t epochs = 2000;
  double learning_rate = 2.0;
  std::uint64_t seed = 0;
};

struct LogRegModel
{
  std::vector<double> weights;
  double bias = 0.0;
};

// Full-batch gradient descent on mean log-loss + (l2/2)|w|^2. The L2 term is
// applied as an implicit (proximal) step, w <- (w - lr*g) / (1 + lr*l2), which
// is stable for any l2. Weights start from small seeded noise.
LogRegModel logreg_train(const SparseMatrix& X, std::span<const int> y, const LogRegConfig& cfg);

double logreg_predict(const LogRegModel& model, const SparseRow& x);

}  // namespace mcdrop
