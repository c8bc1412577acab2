#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mcdrop/layers.hpp"

namespace mcdrop {

enum class OptimizerKind { adam, rmsprop };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig
{
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  // Global-norm gradient clipping threshold; <= 0 disables clipping.
  double clip_norm = 5.0;
};

// Moment estimates for Adam; empty tensors for empty parameter slots.
struct AdamState
{
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
};

struct RmsPropState
{
  std::vector<Tensor> mean_square;
};

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

void rmsprop_step(std::span<Tensor> params, std::span<const Tensor> grads, RmsPropState& state,
                  double lr, double rho = 0.9, double eps = 1e-7);

// Scales grads in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

struct LabeledSequence
{
  FeatureSequence x;
  int label = 0;
};

struct TrainResult
{
  // Mean training loss of each epoch.
  std::vector<double> loss_history;
  std::size_t steps = 0;
};

// Mini-batch training with dropout active. Each sequence in each step gets a
// fresh MaskSet; batch order, masks and updates depend only on cfg.seed.
// Throws NumericError (with epoch, batch and gradient norm) on a non-finite loss.
TrainResult train(ModelParameters& params, std::span<const LabeledSequence> data,
                  const TrainConfig& cfg);

}  // namespace mcdrop
