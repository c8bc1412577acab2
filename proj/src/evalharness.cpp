#include "mcdrop/evalharness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/csv.hpp"
#include "mcdrop/error.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

FoldPlan kfold_split(std::span<const std::int64_t> ids, std::span<const int> labels, std::size_t k,
                     std::uint64_t seed, bool stratified)
{
  if (ids.size() != labels.size())
    throw InputError(fmt::format("kfold_split: {} ids but {} labels", ids.size(), labels.size()));
  if (k < 2) throw InputError("kfold_split: need at least 2 folds");
  if (ids.size() < k)
    throw InputError(fmt::format("kfold_split: {} documents cannot fill {} folds", ids.size(), k));

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.ids.assign(ids.begin(), ids.end());
  plan.fold_of.assign(ids.size(), 0);

  std::vector<std::vector<std::size_t>> groups(stratified ? 2 : 1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InputError("kfold_split: labels must be 0 or 1");
    groups[stratified ? labels[i] : 0].push_back(i);
  }

  std::size_t dealt = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& members = groups[g];
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    Rng rng(derive_stream(seed, {name_tag("kfold"), g}));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t idx : members) plan.fold_of[idx] = dealt++ % k;
  }
  return plan;
}

Outcome outcome(int pred, int label)
{
  if ((pred != 0 && pred != 1) || (label != 0 && label != 1))
    throw InputError(fmt::format("outcome: expected 0/1 values, got pred {} label {}", pred, label));
  if (pred == 1) return label == 1 ? Outcome::TP : Outcome::FP;
  return label == 0 ? Outcome::TN : Outcome::FN;
}

std::string_view to_string(Outcome o)
{
  switch (o) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::TN: return "TN";
    case Outcome::FN: return "FN";
  }
  return "?";
}

Outcome parse_outcome(std::string_view s)
{
  if (s == "TP") return Outcome::TP;
  if (s == "FP") return Outcome::FP;
  if (s == "TN") return Outcome::TN;
  if (s == "FN") return Outcome::FN;
  throw InputError("unknown outcome '" + std::string(s) + "'");
}

Metrics metrics(std::span<const int> preds, std::span<const int> labels)
{
  if (preds.size() != labels.size())
    throw InputError(fmt::format("metrics: {} predictions but {} labels", preds.size(),
                                 labels.size()));
  Metrics m;
  Confusion& c = m.confusion;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    switch (outcome(preds[i], labels[i])) {
      case Outcome::TP: ++c.tp; break;
      case Outcome::FP: ++c.fp; break;
      case Outcome::TN: ++c.tn; break;
      case Outcome::FN: ++c.fn; break;
    }
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

MetricStats MetricReport::stats(const std::vector<Metrics>& folds, double Metrics::*field)
{
  MetricStats s;
  if (folds.empty()) return s;
  for (const auto& m : folds) s.mean += m.*field;
  s.mean /= static_cast<double>(folds.size());
  double sq = 0.0;
  for (const auto& m : folds) sq += (m.*field - s.mean) * (m.*field - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(folds.size()));
  return s;
}

namespace {

constexpr std::array<double Metrics::*, 4> kFields = {&Metrics::accuracy, &Metrics::precision,
                                                       &Metrics::recall, &Metrics::f1};

}  // namespace

void MetricReport::write_csv(std::ostream& out) const
{
  out << "model,fold,accuracy,precision,recall,f1,tp,fp,tn,fn\n";
  for (const auto& e : models) {
    for (std::size_t f = 0; f < e.folds.size(); ++f) {
      const Metrics& m = e.folds[f];
      const Confusion& c = m.confusion;
      fmt::print(out, "{},{},{:.4f},{:.4f},{:.4f},{:.4f},{},{},{},{}\n", csv_field(e.model), f + 1,
                 m.accuracy, m.precision, m.recall, m.f1, c.tp, c.fp, c.tn, c.fn);
    }
    for (const char* kind : {"mean", "std"}) {
      out << csv_field(e.model) << ',' << kind;
      for (auto field : kFields) {
        const MetricStats s = stats(e.folds, field);
        fmt::print(out, ",{:.4f}", kind[0] == 'm' ? s.mean : s.std);
      }
      out << ",,,,\n";
    }
  }
}

void MetricReport::write_table(std::ostream& out) const
{
  std::size_t name_width = 5;
  for (const auto& e : models) name_width = std::max(name_width, e.model.size());
  fmt::print(out, "{:<{}}  {:>12}  {:>12}  {:>12}  {:>12}\n", "Model", name_width, "Accuracy",
             "Precision", "Recall", "F1");
  for (const auto& e : models) {
    fmt::print(out, "{:<{}}", e.model, name_width);
    for (auto field : kFields) {
      const MetricStats s = stats(e.folds, field);
      fmt::print(out, "  {:>12}", fmt::format("{:.1f} [{:.1f}]", s.mean, s.std));
    }
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const SampleVector> samples,
                       std::span<const PredictiveSummary> summaries,
                       std::span<const Outcome> outcomes)
{
  if (samples.size() != summaries.size() || samples.size() != outcomes.size())
    throw InputError("write_summary_csv: length mismatch");
  out << "doc_id,mean,std,bin,label,outcome\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = summaries[i];
    fmt::print(out, "{},{},{},{},{},{}\n", samples[i].doc_id, s.mean, s.std, s.bin, s.label,
               to_string(outcomes[i]));
  }
}

void write_outcomes_csv(std::ostream& out, std::span<const OutcomeRecord> records)
{
  out << "doc_id,pred,truth,outcome\n";
  for (const auto& r : records)
    fmt::print(out, "{},{},{},{}\n", r.doc_id, r.pred, r.truth, to_string(r.outcome));
}

std::vector<OutcomeRecord> read_outcomes_csv(std::istream& in, std::string_view source)
{
  const auto rows = read_delimited(in, ',');
  if (rows.size() < 2) throw InputError(std::string(source) + ": no outcome rows");
  const std::size_t id_col = column_index(rows[0], "doc_id", source);
  const std::size_t outcome_col = column_index(rows[0], "outcome", source);

  std::vector<OutcomeRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() <= std::max(id_col, outcome_col))
      throw InputError(fmt::format("{}:{}: too few fields", source, r + 1));
    OutcomeRecord rec;
    const std::string& id = row[id_col];
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), rec.doc_id);
    if (ec != std::errc() || ptr != id.data() + id.size())
      throw InputError(fmt::format("{}:{}: invalid doc_id '{}'", source, r + 1, id));
    rec.outcome = parse_outcome(row[outcome_col]);
    rec.pred = rec.outcome == Outcome::TP || rec.outcome == Outcome::FP;
    rec.truth = rec.outcome == Outcome::TP || rec.outcome == Outcome::FN;
    out.push_back(rec);
  }
  return out;
}

}  // namespace mcdrop
