// mcdrop command-line driver.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/config.hpp"
#include "mcdrop/csv.hpp"
#include "mcdrop/error.hpp"
#include "mcdrop/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mcdrop;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Overrides
{
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> k_samples;
  std::optional<std::size_t> folds;
};

RunConfig resolve(const std::string& config_path, const Overrides& o)
{
  RunConfig cfg = load_config(config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = fs::absolute(*o.out).lexically_normal();
  if (o.k_samples) cfg.samples = *o.k_samples;
  if (o.folds) cfg.folds = *o.folds;
  cfg.validate();
  return cfg;
}

std::ifstream open_input(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path));
  return in;
}

void write_output(const std::string& path, const std::string& text)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path));
  out << text;
}

int cmd_run(const std::string& config, const Overrides& o)
{
  const RunConfig cfg = resolve(config, o);
  const PreparedCorpus corpus = PreparedCorpus::from_documents(read_corpus(cfg.corpus));
  const RunResult result = run_cross_validation(corpus, cfg);
  write_run(result, corpus, cfg);
  result.report.write_table(std::cout);
  fmt::print("artifacts written to {}\n", cfg.out.string());
  return 0;
}

int cmd_search(const std::string& config, const Overrides& o)
{
  const RunConfig cfg = resolve(config, o);
  const PreparedCorpus corpus = PreparedCorpus::from_documents(read_corpus(cfg.corpus));
  const SearchResult result = run_search(corpus, cfg);
  std::ostringstream csv;
  write_leaderboard_csv(csv, result);
  fs::create_directories(cfg.out);
  write_output((cfg.out / "leaderboard.csv").string(), csv.str());
  const auto& best = result.best_row();
  fmt::print("best draw {}: score {:.2f} optimizer={} batch={} activation={} epochs={} units={} "
             "dropout={} recurrent_dropout={} dense_dropout={}\n",
             best.draw_index, best.score, to_string(best.draw.optimizer), best.draw.batch_size,
             to_string(best.draw.activation), best.draw.epochs, best.draw.units, best.draw.dropout,
             best.draw.recurrent_dropout, best.draw.dense_dropout);
  return 0;
}

struct VizArgs
{
  std::string samples, outcomes, labels, out, coords;
  std::uint64_t seed = 0;
  std::size_t k_nn = 15;
};

int cmd_viz(const VizArgs& a)
{
  VizInputs in;
  {
    auto f = open_input(a.samples);
    in.samples = read_samples_csv(f, a.samples);
  }
  {
    auto f = open_input(a.outcomes);
    in.outcomes = read_outcomes_csv(f, a.outcomes);
  }
  {
    auto f = open_input(a.labels);
    in.labels = read_labels(f, a.labels);
  }
  const VizTable table = join_viz_inputs(in);
  ProjectionConfig pc;
  pc.k_nn = a.k_nn;
  pc.layout.seed = a.seed;
  const Projection p = project(SampleMatrix::from_samples(table.samples), pc);
  const auto points = viz_points(table, p);
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  render(points, &p.density, p.contours, out);
  if (!a.coords.empty()) {
    std::ostringstream os;
    write_coords_csv(os, p.ids, p.coords);
    write_output(a.coords, os.str());
  }
  return 0;
}

int cmd_clean(const std::string& config, const std::string& corpus_path, const std::string& out)
{
  fs::path path = corpus_path;
  if (!config.empty()) path = load_config(config).corpus;
  if (path.empty()) throw InputError("clean: give --config or --corpus");
  auto docs = read_corpus(path);
  for (auto& d : docs) d.text = clean(d.text);
  std::ostringstream os;
  write_corpus(os, docs);
  write_output(out, os.str());
  return 0;
}

int cmd_metrics(const std::vector<std::string>& files, const std::string& model, const std::string& out)
{
  if (files.empty()) throw InputError("metrics: no outcome files given");
  MetricReport report;
  report.models.push_back({model, {}});
  for (const auto& file : files) {
    auto f = open_input(file);
    const auto recs = read_outcomes_csv(f, file);
    if (recs.empty()) throw InputError(fmt::format("{}: no rows", file));
    std::vector<int> preds, truth;
    for (const auto& r : recs) {
      preds.push_back(r.pred);
      truth.push_back(r.truth);
    }
    report.models.front().folds.push_back(metrics(preds, truth));
  }
  report.write_table(std::cout);
  if (!out.empty()) {
    std::ostringstream os;
    report.write_csv(os);
    write_output(out, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Monte Carlo dropout LSTM text classification with uncertainty visualization"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run configuration file")->required();
    sub->add_option("--seed", o.seed, "root seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--k-samples", o.k_samples, "Monte Carlo dropout passes per document")
        ->check(CLI::PositiveNumber);
    sub->add_option("--folds", o.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  };

  auto* run = app.add_subcommand("run", "cross-validated training, MC inference, metrics and plots");
  add_common(run);
  auto* search = app.add_subcommand("search", "random hyperparameter search");
  add_common(search);

  VizArgs va;
  auto* viz = app.add_subcommand("viz", "project sample vectors and render the SVG plot");
  viz->add_option("--samples", va.samples, "samples CSV (doc_id,k,probability)")->required();
  viz->add_option("--outcomes", va.outcomes, "outcomes CSV (doc_id,...,outcome)")->required();
  viz->add_option("--labels", va.labels, "id<TAB>text label file")->required();
  viz->add_option("--out", va.out, "output SVG")->required();
  viz->add_option("--coords", va.coords, "optional id,x,y CSV output");
  viz->add_option("--seed", va.seed, "layout seed");
  viz->add_option("--k-nn", va.k_nn, "neighbours in the projection graph")->check(CLI::PositiveNumber);

  std::string clean_corpus, clean_out;
  auto* cleancmd = app.add_subcommand("clean", "preprocess a corpus and write the cleaned text");
  cleancmd->add_option("--config", config, "run configuration file");
  cleancmd->add_option("--corpus", clean_corpus, "corpus CSV/TSV");
  cleancmd->add_option("--out", clean_out, "output CSV (stdout if omitted)");

  std::vector<std::string> metric_files;
  std::string metric_model = "model", metric_out;
  auto* metricscmd = app.add_subcommand("metrics", "metrics over one or more outcome files (one per fold)");
  metricscmd->add_option("outcomes", metric_files, "outcomes CSV files")->required();
  metricscmd->add_option("--model", metric_model, "model name in the report");
  metricscmd->add_option("--out", metric_out, "write the metrics CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(config, o);
    if (*search) return cmd_search(config, o);
    if (*viz) return cmd_viz(va);
    if (*cleancmd) return cmd_clean(config, clean_corpus, clean_out);
    if (*metricscmd) return cmd_metrics(metric_files, metric_model, metric_out);
  } catch (const NumericError& e) {
    fmt::print(stderr, "mcdrop: numeric failure: {}\n", e.what());
    return kExitNumeric;
  } catch (const InputError& e) {
    fmt::print(stderr, "mcdrop: input error: {}\n", e.what());
    return kExitInput;
  } catch (const DimensionError& e) {
    fmt::print(stderr, "mcdrop: input error: {}\n", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "mcdrop: input error: {}\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
