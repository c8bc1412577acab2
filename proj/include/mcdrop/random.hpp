#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mcdrop {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stable 64-bit tag for a stream name (FNV-1a).
std::uint64_t name_tag(std::string_view name);

// Derive an independent stream seed from a root seed and a path of tags,
// e.g. derive_stream(root, {name_tag("mask"), doc_id, pass}). Results depend
// only on the arguments, never on scheduling.
std::uint64_t derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// Deterministic generator. Distributions are implemented here rather than
// through <random>'s distribution objects, whose output is library-specific.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace mcdrop
