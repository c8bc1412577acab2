#include "mcdrop/mcd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/csv.hpp"
#include "mcdrop/error.hpp"
#include "mcdrop/parallel.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

std::uint64_t pass_stream(std::uint64_t seed, std::int64_t doc_id, std::size_t pass)
{
  return derive_stream(seed, {name_tag("mc-pass"), static_cast<std::uint64_t>(doc_id), pass});
}

SampleVector mc_forward(const ModelParameters& params, const FeatureSequence& x, std::size_t K,
                        std::uint64_t seed, std::int64_t doc_id)
{
  if (K == 0) throw InputError("mc_forward: K must be at least 1");
  SampleVector out;
  out.doc_id = doc_id;
  out.samples.resize(K);
  parallel_for(K, [&](std::size_t k) {
    const MaskSet masks = draw_masks(params.config, pass_stream(seed, doc_id, k));
    const double p = predict_probability(x, params, masks);
    out.samples[k] = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  });
  return out;
}

double predictive_mean(std::span<const double> samples)
{
  if (samples.empty()) throw InputError("predictive_mean: no samples");
  double total = 0.0;
  for (double p : samples) total += p;
  return total / static_cast<double>(samples.size());
}

int probability_bin(double mean)
{
  const double m = std::clamp(mean, 0.0, 1.0 - kProbabilityEpsilon);
  return static_cast<int>(std::floor(m * 4.0));
}

PredictiveSummary summarize(const SampleVector& s)
{
  PredictiveSummary r;
  r.mean = predictive_mean(s.samples);
  double sq = 0.0;
  for (double p : s.samples) sq += (p - r.mean) * (p - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(s.samples.size()));
  auto [lo, hi] = std::minmax_element(s.samples.begin(), s.samples.end());
  r.min = *lo;
  r.max = *hi;
  r.bin = probability_bin(r.mean);
  r.label = r.mean >= 0.5 ? 1 : 0;
  return r;
}

void write_samples_csv(std::ostream& out, std::span<const SampleVector> samples)
{
  out << "doc_id,k,probability\n";
  for (const auto& s : samples)
    for (std::size_t k = 0; k < s.samples.size(); ++k)
      fmt::print(out, "{},{},{}\n", s.doc_id, k, s.samples[k]);
}

std::vector<SampleVector> read_samples_csv(std::istream& in, std::string_view source)
{
  const auto rows = read_delimited(in, ',');
  if (rows.size() < 2) throw InputError(std::string(source) + ": no samples");
  const std::size_t id_col = column_index(rows[0], "doc_id", source);
  const std::size_t k_col = column_index(rows[0], "k", source);
  const std::size_t p_col = column_index(rows[0], "probability", source);

  auto number = [&](const std::string& s, std::size_t line, auto& value) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw InputError(fmt::format("{}:{}: invalid number '{}'", source, line, s));
  };

  std::vector<SampleVector> out;
  std::map<std::int64_t, std::size_t> position;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() <= std::max({id_col, k_col, p_col}))
      throw InputError(fmt::format("{}:{}: too few fields", source, r + 1));
    std::int64_t id = 0;
    std::size_t k = 0;
    double p = 0.0;
    number(row[id_col], r + 1, id);
    number(row[k_col], r + 1, k);
    number(row[p_col], r + 1, p);
    if (!(p > 0.0 && p < 1.0))
      throw InputError(fmt::format("{}:{}: probability {} outside (0,1)", source, r + 1, p));
    auto [it, fresh] = position.try_emplace(id, out.size());
    if (fresh) out.push_back(SampleVector{id, {}});
    else if (it->second != out.size() - 1)
      throw InputError(fmt::format("{}: duplicate id {}: its samples are not contiguous", source, id));
    SampleVector& sv = out[it->second];
    if (k != sv.samples.size())
      throw InputError(fmt::format("{}: document {} has pass {} out of order or duplicated", source,
                                   id, k));
    sv.samples.push_back(p);
  }
  for (const auto& sv : out)
    if (sv.samples.size() != out.front().samples.size())
      throw InputError(fmt::format("{}: document {} has {} samples, expected {}", source,
                                   sv.doc_id, sv.samples.size(), out.front().samples.size()));
  return out;
}

}  // namespace mcdrop
