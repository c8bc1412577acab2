#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcdrop/layers.hpp"

namespace mcdrop {

inline constexpr std::size_t kDefaultSamples = 500;

// K stochastic predictions p(y=1 | x, w_k) for one document, in pass order.
struct SampleVector
{
  std::int64_t doc_id = 0;
  std::vector<double> samples;
};

struct PredictiveSummary
{
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  int bin = 0;       // floor(min(mean, 1 - eps) * 4)
  int label = 0;     // mean >= 0.5
};

// Mask stream for pass k of document doc_id.
std::uint64_t pass_stream(std::uint64_t seed, std::int64_t doc_id, std::size_t pass);

// K dropout passes, pass k using masks drawn from pass_stream(seed, doc_id, k).
// Passes run on the worker pool; the result does not depend on scheduling.
// Samples are clamped to [1e-12, 1 - 1e-12].
SampleVector mc_forward(const ModelParameters& params, const FeatureSequence& x, std::size_t K,
                        std::uint64_t seed, std::int64_t doc_id);

// Arithmetic mean, summed in pass order.
double predictive_mean(std::span<const double> samples);
inline double predictive_mean(const SampleVector& s) { return predictive_mean(s.samples); }

int probability_bin(double mean);
PredictiveSummary summarize(const SampleVector& s);

// doc_id,k,probability
void write_samples_csv(std::ostream& out, std::span<const SampleVector> samples);
// Rows must be grouped by doc_id with k = 0..K-1 in order; every document
// needs the same K. Throws InputError naming the offending id otherwise.
std::vector<SampleVector> read_samples_csv(std::istream& in, std::string_view source);

}  // namespace mcdrop
