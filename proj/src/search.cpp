#include "mcdrop/search.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/error.hpp"
#include "mcdrop/parallel.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

namespace {

template <typename T>
std::vector<T> stepped(T lo, T hi, T step)
{
  std::vector<T> out;
  for (T v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

template <typename T>
bool member(const std::vector<T>& domain, const T& v)
{
  return std::find(domain.begin(), domain.end(), v) != domain.end();
}

template <typename T>
const T& pick(const std::vector<T>& domain, Rng& rng)
{
  return domain[rng.below(domain.size())];
}

}  // namespace

SearchSpace SearchSpace::standard(std::size_t budget)
{
  SearchSpace s;
  s.optimizers = {OptimizerKind::adam, OptimizerKind::rmsprop};
  s.batch_sizes = stepped<std::size_t>(4, 128, 4);
  s.activations = {Activation::tanh, Activation::relu, Activation::linear};
  s.epochs = stepped<std::size_t>(10, 100, 5);
  s.units = {128, 256, 512, 1024};
  // Rates as percent/100 so each grid value is the nearest double to its decimal.
  for (int pct = 10; pct <= 80; pct += 5) s.dropout_rates.push_back(pct / 100.0);
  s.budget = budget;
  return s;
}

void SearchSpace::validate() const
{
  if (budget == 0) throw InputError("search budget must be at least 1");
  if (optimizers.empty() || batch_sizes.empty() || activations.empty() || epochs.empty() ||
      units.empty() || dropout_rates.empty())
    throw InputError("search space has an empty domain");
}

bool SearchSpace::contains(const SearchDraw& d) const
{
  return member(optimizers, d.optimizer) && member(batch_sizes, d.batch_size) &&
         member(activations, d.activation) && member(epochs, d.epochs) &&
         member(units, d.units) && member(dropout_rates, d.dropout) &&
         member(dropout_rates, d.recurrent_dropout) && member(dropout_rates, d.dense_dropout);
}

SearchDraw sample_draw(const SearchSpace& space, std::uint64_t stream)
{
  space.validate();
  Rng rng(stream);
  SearchDraw d;
  d.optimizer = pick(space.optimizers, rng);
  d.batch_size = pick(space.batch_sizes, rng);
  d.activation = pick(space.activations, rng);
  d.epochs = pick(space.epochs, rng);
  d.units = pick(space.units, rng);
  d.dropout = pick(space.dropout_rates, rng);
  d.recurrent_dropout = pick(space.dropout_rates, rng);
  d.dense_dropout = pick(space.dropout_rates, rng);
  return d;
}

std::uint64_t draw_stream(std::uint64_t seed, std::size_t index)
{
  return derive_stream(seed, {name_tag("draw"), index});
}

std::uint64_t eval_stream(std::uint64_t seed, std::size_t index)
{
  return derive_stream(seed, {name_tag("eval"), index});
}

SearchResult random_search(const SearchSpace& space, const SearchObjective& eval,
                           std::uint64_t seed)
{
  space.validate();
  SearchResult result;
  result.rows.resize(space.budget);
  for (std::size_t i = 0; i < space.budget; ++i) {
    result.rows[i].draw_index = i;
    result.rows[i].draw = sample_draw(space, draw_stream(seed, i));
    result.rows[i].eval_stream = eval_stream(seed, i);
  }
  parallel_for(space.budget, [&](std::size_t i) {
    result.rows[i].score = eval(result.rows[i].draw, result.rows[i].eval_stream);
  });
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const double s = result.rows[i].score;
    const double best = result.rows[result.best].score;
    if (!std::isnan(s) && (std::isnan(best) || s > best)) result.best = i;
  }
  return result;
}

void write_leaderboard_csv(std::ostream& out, const SearchResult& result)
{
  out << "draw_index,optimizer,batch_size,activation,epochs,units,dropout,recurrent_dropout,"
         "dense_dropout,eval_stream,score\n";
  for (const auto& r : result.rows)
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", r.draw_index, to_string(r.draw.optimizer),
               r.draw.batch_size, to_string(r.draw.activation), r.draw.epochs, r.draw.units,
               r.draw.dropout, r.draw.recurrent_dropout, r.draw.dense_dropout, r.eval_stream,
               r.score);
}

}  // namespace mcdrop
