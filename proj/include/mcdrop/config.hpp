#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcdrop/layers.hpp"
#include "mcdrop/logreg.hpp"
#include "mcdrop/mcd.hpp"
#include "mcdrop/optim.hpp"
#include "mcdrop/projviz.hpp"
#include "mcdrop/search.hpp"

namespace mcdrop {

// Everything a run needs. Seeds for folds, training, MC passes and layouts
// are all derived from `seed`.
struct RunConfig
{
  std::filesystem::path corpus;
  std::size_t max_len = 64;   // token cap per document in embedding mode
  std::size_t vocab_cap = Vocabulary::kDefaultCap;

  ModelConfig model;          // mode, sizes and dropout; input_dim is set per fold
  TrainConfig train;          // seed is replaced per fold
  std::size_t samples = kDefaultSamples;

  std::size_t folds = 5;
  bool stratified = true;
  std::uint64_t seed = 0;
  std::filesystem::path out = "mcdrop-run";
  bool checkpoints = false;

  LogRegConfig logreg;
  ProjectionConfig viz;

  // Random search: space, holdout fraction and MC samples used for scoring.
  SearchSpace search = SearchSpace::standard(20);
  double search_holdout = 0.2;
  std::size_t search_samples = 50;

  // Throws InputError on out-of-range values or a missing corpus file.
  void validate() const;
};

// Sectioned key = value text; '#' or ';' start a comment line. Unknown
// sections or keys are errors. Relative paths resolve against the file's
// directory. A [manifest] section is accepted and ignored.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                       std::string_view source);

// Writes every setting explicitly with absolute paths, in a form load_config
// reads back to an identical RunConfig.
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace mcdrop
