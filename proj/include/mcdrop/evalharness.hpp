#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcdrop/mcd.hpp"

namespace mcdrop {

// Fold assignment per document, aligned with the input order.
struct FoldPlan
{
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<std::int64_t> ids;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Each class is shuffled (keyed by id, so input order does not matter) and
// dealt round-robin across folds, continuing the rotation between classes.
// Fold class counts then differ by at most one. Throws InputError if n < k.
FoldPlan kfold_split(std::span<const std::int64_t> ids, std::span<const int> labels,
                     std::size_t k = 5, std::uint64_t seed = 0, bool stratified = true);

enum class Outcome { TP, FP, TN, FN };

Outcome outcome(int pred, int label);
std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view s);

struct Confusion
{
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// Percentages; precision/recall/F1 are 0 when their denominator is 0.
struct Metrics
{
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

Metrics metrics(std::span<const int> preds, std::span<const int> labels);

struct MetricStats
{
  double mean = 0.0;
  double std = 0.0;  // population std across folds
};

// Per-fold metrics for several models, reported as CSV and as a text table.
struct MetricReport
{
  struct Entry
  {
    std::string model;
    std::vector<Metrics> folds;
  };
  std::vector<Entry> models;

  static MetricStats stats(const std::vector<Metrics>& folds, double Metrics::*field);

  // model,fold,accuracy,precision,recall,f1,tp,fp,tn,fn with "mean" and "std" rows.
  void write_csv(std::ostream& out) const;
  // Aligned columns, "74.0 [10.7]" style cells.
  void write_table(std::ostream& out) const;
};

// doc_id,mean,std,bin,label,outcome
void write_summary_csv(std::ostream& out, std::span<const SampleVector> samples,
                       std::span<const PredictiveSummary> summaries,
                       std::span<const Outcome> outcomes);

// doc_id,pred,truth,outcome
struct OutcomeRecord
{
  std::int64_t doc_id = 0;
  int pred = 0;
  int truth = 0;
  Outcome outcome = Outcome::TN;
};
void write_outcomes_csv(std::ostream& out, std::span<const OutcomeRecord> records);
// Accepts any CSV with doc_id and outcome columns (the summary CSV works too);
// pred and truth are derived from the outcome.
std::vector<OutcomeRecord> read_outcomes_csv(std::istream& in, std::string_view source);

}  // namespace mcdrop
