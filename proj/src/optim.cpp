#include "mcdrop/optim.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "mcdrop/error.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

std::string_view to_string(OptimizerKind kind)
{
  return kind == OptimizerKind::adam ? "adam" : "rmsprop";
}

OptimizerKind parse_optimizer(std::string_view s)
{
  if (s == "adam" || s == "Adam") return OptimizerKind::adam;
  if (s == "rmsprop" || s == "RMSProp") return OptimizerKind::rmsprop;
  throw InputError("unknown optimizer '" + std::string(s) + "'");
}

namespace {

void check_shapes(std::span<Tensor> params, std::span<const Tensor> grads, std::size_t state_size,
                  std::string_view who)
{
  if (params.size() != grads.size() || params.size() != state_size)
    throw DimensionError(fmt::format("{}: {} params, {} grads, {} state slots", who,
                                     params.size(), grads.size(), state_size));
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].same_shape(grads[i]))
      throw DimensionError(fmt::format("{}: slot {} param {} vs grad {}", who, i,
                                       params[i].shape_str(), grads[i].shape_str()));
}

void ensure_state(std::vector<Tensor>& slots, std::span<Tensor> params)
{
  if (!slots.empty()) return;
  for (const Tensor& p : params) slots.push_back(p.empty() ? Tensor() : Tensor::zeros_like(p));
}

}  // namespace

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps)
{
  ensure_state(state.m, params);
  ensure_state(state.v, params);
  check_shapes(params, grads, state.m.size(), "adam_step");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    Tensor& p = params[s];
    const Tensor& g = grads[s];
    Tensor& m = state.m[s];
    Tensor& v = state.v[s];
    if (!m.same_shape(p) || !v.same_shape(p))
      throw DimensionError("adam_step: state shape mismatch in slot " + std::to_string(s));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

void rmsprop_step(std::span<Tensor> params, std::span<const Tensor> grads, RmsPropState& state,
                  double lr, double rho, double eps)
{
  ensure_state(state.mean_square, params);
  check_shapes(params, grads, state.mean_square.size(), "rmsprop_step");
  for (std::size_t s = 0; s < params.size(); ++s) {
    Tensor& p = params[s];
    const Tensor& g = grads[s];
    Tensor& ms = state.mean_square[s];
    if (!ms.same_shape(p))
      throw DimensionError("rmsprop_step: state shape mismatch in slot " + std::to_string(s));
    for (std::size_t i = 0; i < p.size(); ++i) {
      ms[i] = rho * ms[i] + (1.0 - rho) * g[i] * g[i];
      p[i] -= lr * g[i] / (std::sqrt(ms[i]) + eps);
    }
  }
}

double clip_global_norm(std::span<Tensor> grads, double max_norm)
{
  double sq = 0.0;
  for (const Tensor& g : grads) sq += g.squared_norm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Tensor& g : grads)
      for (double& v : g.data()) v *= factor;
  }
  return norm;
}

TrainResult train(ModelParameters& params, std::span<const LabeledSequence> data,
                  const TrainConfig& cfg)
{
  if (data.empty()) throw InputError("train: no training data");
  if (cfg.batch_size == 0) throw InputError("train: batch size must be positive");
  for (const auto& item : data)
    if (item.label != 0 && item.label != 1) throw InputError("train: labels must be 0 or 1");
  params.config.validate();

  const std::size_t n = data.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  AdamState adam;
  RmsPropState rmsprop;
  TrainResult result;
  std::vector<std::size_t> order(n);
  ParameterGrads grads = zero_grads(params);
  double last_norm = 0.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(derive_stream(cfg.seed, {name_tag("shuffle"), epoch}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t batch = 0; batch < batches; ++batch) {
      const std::size_t begin = batch * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (Tensor& g : grads) g.fill(0.0);

      double batch_loss = 0.0;
      for (std::size_t j = begin; j < end; ++j) {
        const LabeledSequence& item = data[order[j]];
        const MaskSet masks =
            draw_masks(params.config, derive_stream(cfg.seed, {name_tag("mask"), epoch, j}));
        try {
          Graph g;
          const Var p = lstm_forward(g, item.x, params, masks, &grads);
          const Var loss = g.scale(bce_loss(g, p, item.label), inv);
          batch_loss += g.value(loss)[0];
          g.backward(loss);
        } catch (const NumericError& e) {
          throw NumericError(fmt::format("train: {} at epoch {}, batch {} "
                                         "(previous gradient norm {})",
                                         e.what(), epoch, batch, last_norm));
        }
      }

      const double norm = clip_global_norm(grads, cfg.clip_norm);
      last_norm = norm;
      if (!std::isfinite(batch_loss) || !std::isfinite(norm))
        throw NumericError(fmt::format("train: non-finite loss at epoch {}, batch {} "
                                       "(loss {}, gradient norm {})",
                                       epoch, batch, batch_loss, norm));
      epoch_loss += batch_loss * static_cast<double>(end - begin);

      if (cfg.optimizer == OptimizerKind::adam)
        adam_step(params.tensors, grads, adam, cfg.learning_rate);
      else
        rmsprop_step(params.tensors, grads, rmsprop, cfg.learning_rate);
      ++result.steps;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

}  // namespace mcdrop
