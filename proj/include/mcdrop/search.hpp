#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mcdrop/layers.hpp"
#include "mcdrop/optim.hpp"

namespace mcdrop {

// One point of the hyperparameter space.
struct SearchDraw
{
  OptimizerKind optimizer = OptimizerKind::adam;
  std::size_t batch_size = 32;
  Activation activation = Activation::linear;
  std::size_t epochs = 10;
  std::size_t units = 128;
  double dropout = 0.5;
  double recurrent_dropout = 0.5;
  double dense_dropout = 0.5;

  friend bool operator==(const SearchDraw&, const SearchDraw&) = default;
};

// Discrete domains for every searched hyperparameter. The three dropout
// rates are drawn independently from the same grid.
struct SearchSpace
{
  std::vector<OptimizerKind> optimizers;
  std::vector<std::size_t> batch_sizes;
  std::vector<Activation> activations;
  std::vector<std::size_t> epochs;
  std::vector<std::size_t> units;
  std::vector<double> dropout_rates;
  std::size_t budget = 1;

  // Optimizers {Adam, RMSProp}; batch 4..128 step 4; activation
  // {tanh, relu, linear}; epochs 10..100 step 5; units {128, 256, 512, 1024};
  // dropout 0.10..0.80 step 0.05.
  static SearchSpace standard(std::size_t budget);

  bool contains(const SearchDraw& d) const;
  // Throws InputError if budget is zero or any domain is empty.
  void validate() const;
};

// Uniform, independent draw from each domain using the given stream seed.
SearchDraw sample_draw(const SearchSpace& space, std::uint64_t stream);

struct LeaderboardRow
{
  std::size_t draw_index = 0;
  SearchDraw draw;
  std::uint64_t eval_stream = 0;
  double score = 0.0;
};

struct SearchResult
{
  std::vector<LeaderboardRow> rows;
  std::size_t best = 0;

  const LeaderboardRow& best_row() const { return rows.at(best); }
};

// Evaluates each draw with its own stream, so evaluations may run
// concurrently. Draw i is sampled from derive_stream(seed, {"draw", i}) and
// scored with eval(draw, derive_stream(seed, {"eval", i})). The highest
// score wins; ties go to the earliest draw.
using SearchObjective = std::function<double(const SearchDraw&, std::uint64_t stream)>;
SearchResult random_search(const SearchSpace& space, const SearchObjective& eval,
                           std::uint64_t seed);

std::uint64_t draw_stream(std::uint64_t seed, std::size_t index);
std::uint64_t eval_stream(std::uint64_t seed, std::size_t index);

void write_leaderboard_csv(std::ostream& out, const SearchResult& result);

}  // namespace mcdrop
