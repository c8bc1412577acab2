#include "mcdrop/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcdrop/error.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

std::string_view to_string(InputMode mode)
{
  return mode == InputMode::embedding ? "embedding" : "vector";
}

std::string_view to_string(Activation act)
{
  switch (act) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::linear: break;
  }
  return "linear";
}

InputMode parse_input_mode(std::string_view s)
{
  if (s == "embedding") return InputMode::embedding;
  if (s == "vector" || s == "tfidf") return InputMode::vector;
  throw InputError("unknown input mode '" + std::string(s) + "'");
}

Activation parse_activation(std::string_view s)
{
  if (s == "linear") return Activation::linear;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw InputError("unknown activation '" + std::string(s) + "'");
}

void ModelConfig::validate() const
{
  if (input_dim == 0) throw InputError("model input dimension must be positive");
  if (units == 0) throw InputError("model units must be positive");
  if (mode == InputMode::embedding && embedding_dim == 0)
    throw InputError("embedding dimension must be positive");
  for (double rate : {dropout, recurrent_dropout, dense_dropout})
    if (!(rate >= 0.0 && rate < 1.0))
      throw InputError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
}

std::string_view slot_name(std::size_t slot)
{
  static constexpr std::array<std::string_view, kSlotCount> names = {
      "embedding", "lstm.input_weights", "lstm.recurrent_weights",
      "lstm.gate_bias", "dense.weights", "dense.bias"};
  return names.at(slot);
}

ModelParameters ModelParameters::initialize(const ModelConfig& config, std::uint64_t seed)
{
  config.validate();
  Rng rng(seed);
  const std::size_t H = config.units;
  const std::size_t D = config.lstm_input_dim();
  const double bound = 1.0 / std::sqrt(static_cast<double>(H));
  auto uniform = [&](std::vector<std::size_t> shape, double b) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-b, b);
    return t;
  };

  ModelParameters p;
  p.config = config;
  if (config.mode == InputMode::embedding)
    p[Slot::embedding] = uniform({config.input_dim, config.embedding_dim}, 0.05);
  p[Slot::input_weights] = uniform({D, 4 * H}, bound);
  p[Slot::recurrent_weights] = uniform({H, 4 * H}, bound);
  p[Slot::gate_bias] = Tensor({1, 4 * H});
  for (std::size_t j = H; j < 2 * H; ++j) p[Slot::gate_bias][j] = 1.0;  // forget gate
  p[Slot::dense_weights] = uniform({H, 1}, bound);
  p[Slot::dense_bias] = Tensor({1, 1});
  return p;
}

ParameterGrads zero_grads(const ModelParameters& params)
{
  ParameterGrads grads;
  for (std::size_t i = 0; i < kSlotCount; ++i)
    if (!params.tensors[i].empty()) grads[i] = Tensor::zeros_like(params.tensors[i]);
  return grads;
}

MaskSet draw_masks(const ModelConfig& config, std::uint64_t seed)
{
  for (double rate : {config.dropout, config.recurrent_dropout, config.dense_dropout})
    if (!(rate >= 0.0 && rate < 1.0))
      throw InputError("dropout rate " + std::to_string(rate) + " outside [0, 1)");

  Rng rng(seed);
  auto draw = [&rng](std::size_t n, double rate) {
    std::vector<double> mask(n, 1.0);
    if (rate > 0.0) {
      const double keep = 1.0 - rate;
      for (double& v : mask) v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    }
    return mask;
  };

  MaskSet m;
  m.input = Tensor::row(draw(config.lstm_input_dim(), config.dropout));
  m.recurrent = Tensor::row(draw(config.units, config.recurrent_dropout));
  m.dense = Tensor::row(draw(config.units, config.dense_dropout));
  if (config.mode == InputMode::embedding) m.embedding = draw(config.input_dim, config.dropout);
  return m;
}

FeatureSequence FeatureSequence::from_tokens(std::vector<std::size_t> ids)
{
  FeatureSequence s;
  s.tokens = std::move(ids);
  return s;
}

FeatureSequence FeatureSequence::from_features(std::vector<double> row)
{
  FeatureSequence s;
  s.features = Tensor::row(std::move(row));
  return s;
}

Var lstm_forward(Graph& g, const FeatureSequence& seq, const ModelParameters& params,
                 const MaskSet& masks, ParameterGrads* grads, ForwardTrace* trace)
{
  const ModelConfig& cfg = params.config;
  const std::size_t H = cfg.units;
  if (seq.length() == 0) throw InputError("lstm_forward: empty sequence");
  if (cfg.mode == InputMode::embedding && !seq.is_tokens())
    throw InputError("lstm_forward: embedding model needs token ids");
  if (cfg.mode == InputMode::vector && seq.is_tokens())
    throw InputError("lstm_forward: vector-input model needs a feature row");
  if (!seq.is_tokens() && seq.features.cols() != cfg.input_dim)
    throw DimensionError("lstm_forward: feature row has " + std::to_string(seq.features.cols()) +
                         " columns, model expects " + std::to_string(cfg.input_dim));

  auto param = [&](Slot s) {
    auto i = static_cast<std::size_t>(s);
    return g.parameter(params.tensors[i], grads ? &(*grads)[i] : nullptr);
  };
  const Var W = param(Slot::input_weights);
  const Var U = param(Slot::recurrent_weights);
  const Var b = param(Slot::gate_bias);
  const Var Wd = param(Slot::dense_weights);
  const Var bd = param(Slot::dense_bias);
  const Var E = cfg.mode == InputMode::embedding ? param(Slot::embedding) : Var{};

  const Var input_mask = g.constant(masks.input);
  const Var recurrent_mask = g.constant(masks.recurrent);
  const Var dense_mask = g.constant(masks.dense);

  Var h = g.constant(Tensor({1, H}));
  Var c = g.constant(Tensor({1, H}));
  for (std::size_t t = 0; t < seq.length(); ++t) {
    Var x;
    if (seq.is_tokens()) {
      const std::size_t id = seq.tokens[t];
      if (id >= cfg.input_dim)
        throw InputError("lstm_forward: token id " + std::to_string(id) +
                         " outside vocabulary of size " + std::to_string(cfg.input_dim));
      x = g.gather_row(E, id);
      const double word_scale = masks.embedding.empty() ? 1.0 : masks.embedding.at(id);
      if (word_scale != 1.0) x = g.scale(x, word_scale);
      if (trace) trace->embedding_scales.push_back(word_scale);
    } else {
      x = g.constant(seq.features);
    }

    const Var z = g.add(g.add(g.matmul(g.mul(x, input_mask), W),
                              g.matmul(g.mul(h, recurrent_mask), U)),
                        b);
    const Var in_gate = g.sigmoid(g.slice_cols(z, 0, H));
    const Var forget_gate = g.sigmoid(g.slice_cols(z, H, H));
    const Var candidate = g.tanh(g.slice_cols(z, 2 * H, H));
    const Var out_gate = g.sigmoid(g.slice_cols(z, 3 * H, H));
    c = g.add(g.mul(forget_gate, c), g.mul(in_gate, candidate));
    h = g.mul(out_gate, g.tanh(c));

    if (trace) {
      trace->input_masks.push_back(input_mask);
      trace->recurrent_masks.push_back(recurrent_mask);
    }
  }

  Var features = h;
  switch (cfg.activation) {
    case Activation::tanh: features = g.tanh(h); break;
    case Activation::relu: features = g.relu(h); break;
    case Activation::linear: break;
  }
  if (trace) trace->dense_mask = dense_mask;
  const Var logit = g.add(g.matmul(g.mul(features, dense_mask), Wd), bd);
  return g.sigmoid(logit);
}

double predict_probability(const FeatureSequence& seq, const ModelParameters& params,
                           const MaskSet& masks)
{
  Graph g;
  return g.value(lstm_forward(g, seq, params, masks))[0];
}

double bce_value(double probability, int label)
{
  const double p = std::clamp(probability, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

Var bce_loss(Graph& g, Var probability, int label)
{
  if (label != 0 && label != 1) throw InputError("bce_loss: label must be 0 or 1");
  const Tensor& pt = g.value(probability);
  if (pt.size() != 1) throw DimensionError("bce_loss: probability must be scalar");
  const double p = pt[0];
  return g.apply("bce", {probability}, Tensor::scalar(bce_value(p, label)),
                 [probability, p, label](Graph& gr, std::size_t self) {
                   Tensor* dp = gr.grad_slot(probability);
                   if (!dp) return;
                   if (p <= kProbabilityEpsilon || p >= 1.0 - kProbabilityEpsilon) return;
                   const double d = label == 1 ? -1.0 / p : 1.0 / (1.0 - p);
                   (*dp)[0] += gr.output_grad(self)[0] * d;
                 });
}

}  // namespace mcdrop
