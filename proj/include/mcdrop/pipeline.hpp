#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcdrop/config.hpp"
#include "mcdrop/evalharness.hpp"
#include "mcdrop/projviz.hpp"
#include "mcdrop/search.hpp"
#include "mcdrop/textpipe.hpp"

namespace mcdrop {

inline constexpr std::string_view kVersion = "1.0.0";

// Corpus after cleaning and tokenization, in file order.
struct PreparedCorpus
{
  std::vector<Document> docs;
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::int64_t> ids;
  std::vector<int> labels;

  static PreparedCorpus from_documents(std::vector<Document> docs);
};

// Features for one train/test split. The vocabulary and idf weights come from
// the training documents only.
struct SplitFeatures
{
  Vocabulary vocab;
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> test;
  SparseMatrix train_tfidf;
  SparseMatrix test_tfidf;
};

SplitFeatures build_features(const PreparedCorpus& corpus, std::span<const std::size_t> train_idx,
                             std::span<const std::size_t> test_idx, const RunConfig& cfg);

// Named seed streams derived from the root seed.
struct FoldSeeds
{
  std::uint64_t init = 0;
  std::uint64_t train = 0;
  std::uint64_t mc = 0;
  std::uint64_t logreg = 0;
  std::uint64_t viz = 0;
};
std::uint64_t split_seed(std::uint64_t root);
FoldSeeds fold_seeds(std::uint64_t root, std::size_t fold);

struct FoldResult
{
  std::size_t fold = 0;
  std::vector<std::int64_t> test_ids;
  std::vector<int> truth;
  std::vector<SampleVector> samples;
  std::vector<PredictiveSummary> summaries;
  std::vector<Outcome> outcomes;
  std::vector<int> logreg_preds;
  Metrics mcd;
  Metrics logreg;
  TrainResult training;
  std::optional<ModelParameters> params;
  std::optional<Vocabulary> vocab;
  std::optional<Projection> projection;
};

struct RunResult
{
  FoldPlan plan;
  std::vector<FoldResult> folds;
  MetricReport report;
};

// Cross-validated train / MC inference / evaluation. Folds run on the worker
// pool; results depend only on the config. Stage failures are rethrown with
// the stage name prepended.
RunResult run_cross_validation(const PreparedCorpus& corpus, const RunConfig& cfg,
                               bool with_projection = true);

// Writes metrics, per-fold artifacts and the manifest under cfg.out.
void write_run(const RunResult& result, const PreparedCorpus& corpus, const RunConfig& cfg);

// Config text plus a [manifest] section with config hash, seeds and versions.
// Loading it with load_config reproduces the run.
std::string manifest_text(const RunConfig& cfg, const RunResult* result);

// Search objective: stratified holdout split from the stream, model built
// from the draw, scored by accuracy (percent) of the MC predictive mean.
double holdout_score(const PreparedCorpus& corpus, const RunConfig& cfg, const SearchDraw& draw,
                     std::uint64_t stream);
SearchResult run_search(const PreparedCorpus& corpus, const RunConfig& cfg);

// Viz inputs joined by id.
struct VizInputs
{
  std::vector<SampleVector> samples;
  std::vector<OutcomeRecord> outcomes;
  std::map<std::int64_t, std::string> labels;
};

struct VizTable
{
  std::vector<SampleVector> samples;
  std::vector<Outcome> outcomes;
  std::vector<std::string> labels;
};

// Rows follow the samples. Throws InputError on empty input, on a duplicated
// id (naming it), or listing every id present on one side only. Ids without
// a label are listed too; extra labels are ignored.
VizTable join_viz_inputs(const VizInputs& in);
std::vector<VizPoint> viz_points(const VizTable& table, const Projection& projection);

// id<TAB>text lines, no header.
std::map<std::int64_t, std::string> read_labels(std::istream& in, std::string_view source);
void write_labels(std::ostream& out, std::span<const std::int64_t> ids,
                  const std::vector<Document>& docs);

}  // namespace mcdrop
