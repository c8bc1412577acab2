#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "mcdrop/graph.hpp"
#include "mcdrop/tensor.hpp"

namespace mcdrop {

enum class InputMode { embedding, vector };
enum class Activation { linear, tanh, relu };

std::string_view to_string(InputMode mode);
std::string_view to_string(Activation act);
InputMode parse_input_mode(std::string_view s);
Activation parse_activation(std::string_view s);

struct ModelConfig
{
  InputMode mode = InputMode::vector;
  // Vocabulary size in embedding mode, feature width in vector mode.
  std::size_t input_dim = 0;
  std::size_t units = 128;
  // Rate for the LSTM input connections; also used for word-embedding dropout.
  double dropout = 0.0;
  double recurrent_dropout = 0.0;
  double dense_dropout = 0.0;
  std::size_t embedding_dim = 32;
  // Applied to the final hidden state before the dense output layer.
  Activation activation = Activation::linear;

  std::size_t lstm_input_dim() const
  {
    return mode == InputMode::embedding ? embedding_dim : input_dim;
  }
  // Throws InputError on zero sizes or rates outside [0, 1).
  void validate() const;
};

// Parameter slots in a fixed order. Gate blocks inside the LSTM tensors are
// laid out as (input, forget, cell, output), each `units` columns wide.
enum class Slot : std::size_t {
  embedding,          // |V| x d, empty in vector mode
  input_weights,      // D x 4H
  recurrent_weights,  // H x 4H
  gate_bias,          // 1 x 4H
  dense_weights,      // H x 1
  dense_bias,         // 1 x 1
};
inline constexpr std::size_t kSlotCount = 6;
std::string_view slot_name(std::size_t slot);

using ParameterGrads = std::array<Tensor, kSlotCount>;

struct ModelParameters
{
  ModelConfig config;
  std::array<Tensor, kSlotCount> tensors;

  static ModelParameters initialize(const ModelConfig& config, std::uint64_t seed);

  Tensor& operator[](Slot s) { return tensors[static_cast<std::size_t>(s)]; }
  const Tensor& operator[](Slot s) const { return tensors[static_cast<std::size_t>(s)]; }

  friend bool operator==(const ModelParameters& a, const ModelParameters& b)
  {
    return a.tensors == b.tensors;
  }
};

ParameterGrads zero_grads(const ModelParameters& params);

// One dropout realization for a single forward pass. Entries are 0 or
// 1/(1-rate); every mask is reused at every timestep of the pass.
struct MaskSet
{
  Tensor input;                    // 1 x lstm_input_dim
  Tensor recurrent;                // 1 x units
  Tensor dense;                    // 1 x units
  std::vector<double> embedding;   // per word type; empty in vector mode
};

MaskSet draw_masks(const ModelConfig& config, std::uint64_t seed);

// A document as model input: token ids (embedding mode) or a single feature
// row (vector mode, one timestep).
struct FeatureSequence
{
  std::vector<std::size_t> tokens;
  Tensor features;

  static FeatureSequence from_tokens(std::vector<std::size_t> ids);
  static FeatureSequence from_features(std::vector<double> row);

  bool is_tokens() const { return features.empty(); }
  std::size_t length() const { return is_tokens() ? tokens.size() : 1; }
};

// Records the mask nodes consumed at each timestep of one pass.
struct ForwardTrace
{
  std::vector<Var> input_masks;
  std::vector<Var> recurrent_masks;
  Var dense_mask;
  std::vector<double> embedding_scales;
};

// Unrolls the LSTM over `seq` and returns the node holding p(y=1).
// When `grads` is given, parameter gradients accumulate there on backward().
Var lstm_forward(Graph& g, const FeatureSequence& seq, const ModelParameters& params,
                 const MaskSet& masks, ParameterGrads* grads = nullptr,
                 ForwardTrace* trace = nullptr);

// Convenience: run one pass without gradient tracking.
double predict_probability(const FeatureSequence& seq, const ModelParameters& params,
                           const MaskSet& masks);

inline constexpr double kProbabilityEpsilon = 1e-12;

// Binary cross-entropy with p clamped to [eps, 1-eps].
Var bce_loss(Graph& g, Var probability, int label);
double bce_value(double probability, int label);

// Checkpoint: line-oriented text of named tensors with shapes; values are
// written as hex floats so a save/load cycle is bitwise exact.
void save_checkpoint(std::ostream& out, const ModelParameters& params);
ModelParameters load_checkpoint(std::istream& in);

}  // namespace mcdrop
