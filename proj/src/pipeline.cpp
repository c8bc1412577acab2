#include "mcdrop/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/csv.hpp"
#include "mcdrop/error.hpp"
#include "mcdrop/logreg.hpp"
#include "mcdrop/parallel.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop {

namespace {

template <class Fn>
auto stage(std::string_view name, Fn&& fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(fmt::format("{}: {}", name, e.what()));
  } catch (const DimensionError& e) {
    throw DimensionError(fmt::format("{}: {}", name, e.what()));
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", name, e.what()));
  }
}

template <class T>
std::vector<T> pick(const std::vector<T>& xs, std::span<const std::size_t> idx)
{
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(xs[i]);
  return out;
}

std::vector<LabeledSequence> sequences(const PreparedCorpus& corpus, std::span<const std::size_t> idx,
                                       const SparseMatrix& tfidf_rows, const Vocabulary& vocab,
                                       const RunConfig& cfg)
{
  std::vector<LabeledSequence> out;
  out.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    LabeledSequence s;
    s.label = corpus.labels[idx[r]];
    if (cfg.model.mode == InputMode::vector)
      s.x = FeatureSequence::from_features(tfidf_rows.rows[r].dense(vocab.size()));
    else
      s.x = FeatureSequence::from_tokens(token_ids(corpus.tokens[idx[r]], vocab, cfg.max_len));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SampleVector> mc_predict(const ModelParameters& params,
                                     std::span<const LabeledSequence> data,
                                     std::span<const std::int64_t> ids, std::size_t K,
                                     std::uint64_t seed)
{
  std::vector<SampleVector> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.push_back(mc_forward(params, data[i].x, K, seed, ids[i]));
  return out;
}

// First `limit` bytes of text on one line, cut at a UTF-8 boundary.
std::string snippet(std::string_view text, std::size_t limit = 80)
{
  std::string s(text.substr(0, std::min(limit, text.size())));
  if (text.size() > limit) {
    while (!s.empty() && (static_cast<unsigned char>(s.back()) & 0xC0) == 0x80) s.pop_back();
    if (!s.empty() && (static_cast<unsigned char>(s.back()) & 0x80)) s.pop_back();
  }
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

template <class Fn>
std::string to_text(Fn&& fn)
{
  std::ostringstream os;
  fn(os);
  return os.str();
}

std::uint64_t fnv1a(std::string_view s) { return name_tag(s); }

}  // namespace

PreparedCorpus PreparedCorpus::from_documents(std::vector<Document> docs)
{
  if (docs.empty()) throw InputError("corpus has no documents");
  PreparedCorpus c;
  c.tokens.resize(docs.size());
  const auto& tables = TextTables::standard();
  parallel_for(docs.size(), [&](std::size_t i) { c.tokens[i] = tokenize(clean(docs[i].text, tables)); });
  for (const auto& d : docs) {
    c.ids.push_back(d.id);
    c.labels.push_back(d.label);
  }
  c.docs = std::move(docs);
  return c;
}

SplitFeatures build_features(const PreparedCorpus& corpus, std::span<const std::size_t> train_idx,
                             std::span<const std::size_t> test_idx, const RunConfig& cfg)
{
  if (train_idx.empty()) throw InputError("empty training split");
  SplitFeatures f;
  const auto train_tokens = pick(corpus.tokens, train_idx);
  const auto test_tokens = pick(corpus.tokens, test_idx);
  f.vocab = Vocabulary::build(train_tokens, cfg.vocab_cap);
  f.train_tfidf = tfidf(train_tokens, f.vocab);
  f.test_tfidf = tfidf(test_tokens, f.vocab);
  f.train = sequences(corpus, train_idx, f.train_tfidf, f.vocab, cfg);
  f.test = sequences(corpus, test_idx, f.test_tfidf, f.vocab, cfg);
  return f;
}

std::uint64_t split_seed(std::uint64_t root) { return derive_stream(root, {name_tag("folds")}); }

FoldSeeds fold_seeds(std::uint64_t root, std::size_t fold)
{
  return {derive_stream(root, {name_tag("init"), fold}), derive_stream(root, {name_tag("train"), fold}),
          derive_stream(root, {name_tag("mc"), fold}), derive_stream(root, {name_tag("logreg"), fold}),
          derive_stream(root, {name_tag("viz"), fold})};
}

namespace {

FoldResult run_fold(const PreparedCorpus& corpus, const FoldPlan& plan, std::size_t fold,
                    const RunConfig& cfg, bool with_projection)
{
  const std::string where = fmt::format("fold {}", fold + 1);
  const FoldSeeds seeds = fold_seeds(cfg.seed, fold);
  const auto train_idx = plan.train_indices(fold);
  const auto test_idx = plan.test_indices(fold);

  FoldResult r;
  r.fold = fold;
  r.test_ids = pick(corpus.ids, test_idx);
  r.truth = pick(corpus.labels, test_idx);

  SplitFeatures feats =
      stage(where + " preprocess", [&] { return build_features(corpus, train_idx, test_idx, cfg); });

  ModelConfig mc = cfg.model;
  mc.input_dim = feats.vocab.size();
  ModelParameters params = stage(where + " train", [&] {
    ModelParameters p = ModelParameters::initialize(mc, seeds.init);
    TrainConfig tc = cfg.train;
    tc.seed = seeds.train;
    r.training = train(p, feats.train, tc);
    return p;
  });

  stage(where + " mc-infer", [&] {
    r.samples = mc_predict(params, feats.test, r.test_ids, cfg.samples, seeds.mc);
    std::vector<int> preds;
    for (const auto& s : r.samples) {
      r.summaries.push_back(summarize(s));
      preds.push_back(r.summaries.back().label);
    }
    for (std::size_t i = 0; i < preds.size(); ++i) r.outcomes.push_back(outcome(preds[i], r.truth[i]));
    r.mcd = metrics(preds, r.truth);
  });

  stage(where + " baseline", [&] {
    LogRegConfig lc = cfg.logreg;
    lc.seed = seeds.logreg;
    const auto train_labels = pick(corpus.labels, train_idx);
    const LogRegModel lr = logreg_train(feats.train_tfidf, train_labels, lc);
    for (const auto& row : feats.test_tfidf.rows)
      r.logreg_preds.push_back(logreg_predict(lr, row) >= 0.5 ? 1 : 0);
    r.logreg = metrics(r.logreg_preds, r.truth);
  });

  if (with_projection) {
    r.projection = stage(where + " visualize", [&] {
      ProjectionConfig pc = cfg.viz;
      pc.layout.seed = seeds.viz;
      return project(SampleMatrix::from_samples(r.samples), pc);
    });
  }
  if (cfg.checkpoints) {
    r.params = std::move(params);
    r.vocab = std::move(feats.vocab);
  }
  return r;
}

}  // namespace

RunResult run_cross_validation(const PreparedCorpus& corpus, const RunConfig& cfg, bool with_projection)
{
  RunResult result;
  result.plan = stage("split", [&] {
    return kfold_split(corpus.ids, corpus.labels, cfg.folds, split_seed(cfg.seed), cfg.stratified);
  });
  result.folds.resize(cfg.folds);
  parallel_for(cfg.folds, [&](std::size_t f) {
    result.folds[f] = run_fold(corpus, result.plan, f, cfg, with_projection);
  });

  MetricReport::Entry mcd{"MCD LSTM", {}}, lr{"LR", {}};
  for (const auto& f : result.folds) {
    mcd.folds.push_back(f.mcd);
    lr.folds.push_back(f.logreg);
  }
  result.report.models = {mcd, lr};
  return result;
}

std::string manifest_text(const RunConfig& cfg, const RunResult* result)
{
  const std::string config = to_text([&](std::ostream& os) { write_config(os, cfg); });
  std::string s = config;
  s += fmt::format("\n[manifest]\nversion = {}\nconfig_hash = {:016x}\nroot_seed = {}\n", kVersion,
                   fnv1a(config), cfg.seed);
  s += fmt::format("seed_derivation = derive_stream(root_seed; name_tag(stream); fold)\n");
  s += fmt::format("split_seed = {}\n", split_seed(cfg.seed));
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    const FoldSeeds fs = fold_seeds(cfg.seed, f);
    s += fmt::format("fold{}_seeds = init {} train {} mc {} logreg {} viz {}\n", f + 1, fs.init,
                     fs.train, fs.mc, fs.logreg, fs.viz);
  }
  s += fmt::format("fmt_version = {}\ncompiler = {}\n", FMT_VERSION, __VERSION__);
  if (result) {
    s += fmt::format("documents = {}\n", result->plan.ids.size());
  }
  return s;
}

void write_run(const RunResult& result, const PreparedCorpus& corpus, const RunConfig& cfg)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw InputError(fmt::format("cannot create output directory '{}': {}", cfg.out.string(), ec.message()));

  write_file(cfg.out / "metrics.csv", to_text([&](std::ostream& os) { result.report.write_csv(os); }));
  write_file(cfg.out / "metrics.txt", to_text([&](std::ostream& os) { result.report.write_table(os); }));
  write_file(cfg.out / "manifest.ini", manifest_text(cfg, &result));
  write_file(cfg.out / "folds.csv", to_text([&](std::ostream& os) {
               os << "doc_id,fold\n";
               for (std::size_t i = 0; i < result.plan.ids.size(); ++i)
                 fmt::print(os, "{},{}\n", result.plan.ids[i], result.plan.fold_of[i] + 1);
             }));

  std::map<std::int64_t, const Document*> by_id;
  for (const auto& d : corpus.docs) by_id[d.id] = &d;

  for (const auto& f : result.folds) {
    const fs::path dir = cfg.out / fmt::format("fold-{}", f.fold + 1);
    fs::create_directories(dir, ec);
    if (ec) throw InputError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    write_file(dir / "samples.csv", to_text([&](std::ostream& os) { write_samples_csv(os, f.samples); }));
    write_file(dir / "summary.csv", to_text([&](std::ostream& os) {
                 write_summary_csv(os, f.samples, f.summaries, f.outcomes);
               }));
    write_file(dir / "outcomes.csv", to_text([&](std::ostream& os) {
                 std::vector<OutcomeRecord> recs;
                 for (std::size_t i = 0; i < f.samples.size(); ++i)
                   recs.push_back({f.test_ids[i], f.summaries[i].label, f.truth[i], f.outcomes[i]});
                 write_outcomes_csv(os, recs);
               }));
    write_file(dir / "logreg.csv", to_text([&](std::ostream& os) {
                 os << "doc_id,pred,truth\n";
                 for (std::size_t i = 0; i < f.test_ids.size(); ++i)
                   fmt::print(os, "{},{},{}\n", f.test_ids[i], f.logreg_preds[i], f.truth[i]);
               }));
    write_file(dir / "labels.tsv", to_text([&](std::ostream& os) { write_labels(os, f.test_ids, corpus.docs); }));

    if (f.projection) {
      const Projection& p = *f.projection;
      write_file(dir / "coords.csv", to_text([&](std::ostream& os) { write_coords_csv(os, p.ids, p.coords); }));
      VizTable table{f.samples, f.outcomes, {}};
      for (auto id : f.test_ids) table.labels.push_back(snippet(by_id.at(id)->text));
      const auto points = viz_points(table, p);
      RenderOptions opts;
      opts.title = fmt::format("MC dropout predictions, fold {}", f.fold + 1);
      render(points, &p.density, p.contours, dir / "viz.svg", opts);
    }
    if (f.params) {
      write_file(dir / "model.ckpt", to_text([&](std::ostream& os) { save_checkpoint(os, *f.params); }));
      write_file(dir / "vocab.txt", to_text([&](std::ostream& os) { f.vocab->save(os); }));
    }
  }
}

double holdout_score(const PreparedCorpus& corpus, const RunConfig& cfg, const SearchDraw& draw,
                     std::uint64_t stream)
{
  const auto k = static_cast<std::size_t>(std::max(2.0, std::round(1.0 / cfg.search_holdout)));
  const FoldPlan plan =
      kfold_split(corpus.ids, corpus.labels, k, derive_stream(stream, {name_tag("holdout")}), true);
  const auto train_idx = plan.train_indices(0);
  const auto test_idx = plan.test_indices(0);
  const SplitFeatures feats = build_features(corpus, train_idx, test_idx, cfg);

  ModelConfig mc = cfg.model;
  mc.input_dim = feats.vocab.size();
  mc.units = draw.units;
  mc.activation = draw.activation;
  mc.dropout = draw.dropout;
  mc.recurrent_dropout = draw.recurrent_dropout;
  mc.dense_dropout = draw.dense_dropout;
  ModelParameters params = ModelParameters::initialize(mc, derive_stream(stream, {name_tag("init")}));

  TrainConfig tc = cfg.train;
  tc.optimizer = draw.optimizer;
  tc.batch_size = draw.batch_size;
  tc.epochs = draw.epochs;
  tc.seed = derive_stream(stream, {name_tag("train")});
  train(params, feats.train, tc);

  const auto ids = pick(corpus.ids, test_idx);
  const auto truth = pick(corpus.labels, test_idx);
  const auto samples =
      mc_predict(params, feats.test, ids, cfg.search_samples, derive_stream(stream, {name_tag("mc")}));
  std::vector<int> preds;
  for (const auto& s : samples) preds.push_back(summarize(s).label);
  return metrics(preds, truth).accuracy;
}

SearchResult run_search(const PreparedCorpus& corpus, const RunConfig& cfg)
{
  return stage("search", [&] {
    return random_search(
        cfg.search,
        [&](const SearchDraw& d, std::uint64_t stream) { return holdout_score(corpus, cfg, d, stream); },
        cfg.seed);
  });
}

VizTable join_viz_inputs(const VizInputs& in)
{
  if (in.samples.empty()) throw InputError("viz: no samples");
  if (in.outcomes.empty()) throw InputError("viz: no outcomes");

  std::set<std::int64_t> sample_ids;
  for (const auto& s : in.samples)
    if (!sample_ids.insert(s.doc_id).second)
      throw InputError(fmt::format("viz: duplicate id {} in samples", s.doc_id));
  std::map<std::int64_t, Outcome> outcome_of;
  for (const auto& o : in.outcomes)
    if (!outcome_of.emplace(o.doc_id, o.outcome).second)
      throw InputError(fmt::format("viz: duplicate id {} in outcomes", o.doc_id));

  std::vector<std::int64_t> only_samples, only_outcomes, no_label;
  for (auto id : sample_ids) {
    if (!outcome_of.contains(id)) only_samples.push_back(id);
    if (!in.labels.contains(id)) no_label.push_back(id);
  }
  for (const auto& [id, o] : outcome_of)
    if (!sample_ids.contains(id)) only_outcomes.push_back(id);

  if (!only_samples.empty() || !only_outcomes.empty() || !no_label.empty()) {
    std::string msg = "viz: inputs do not share the same ids";
    auto list = [&](std::string_view what, const std::vector<std::int64_t>& ids) {
      if (ids.empty()) return;
      msg += fmt::format("; {} ({}):", what, ids.size());
      for (auto id : ids) msg += fmt::format(" {}", id);
    };
    list("in samples but not outcomes", only_samples);
    list("in outcomes but not samples", only_outcomes);
    list("without a label", no_label);
    throw InputError(msg);
  }

  VizTable t;
  t.samples = in.samples;
  for (const auto& s : in.samples) {
    t.outcomes.push_back(outcome_of.at(s.doc_id));
    t.labels.push_back(in.labels.at(s.doc_id));
  }
  return t;
}

std::vector<VizPoint> viz_points(const VizTable& table, const Projection& projection)
{
  if (projection.ids.size() != table.samples.size())
    throw DimensionError("viz_points: projection and table sizes differ");
  std::vector<VizPoint> points;
  for (std::size_t i = 0; i < table.samples.size(); ++i) {
    if (projection.ids[i] != table.samples[i].doc_id)
      throw DimensionError("viz_points: projection rows are not aligned with the table");
    const PredictiveSummary s = summarize(table.samples[i]);
    points.push_back({table.samples[i].doc_id, projection.coords[i].x, projection.coords[i].y, s.mean,
                      s.bin, table.outcomes[i], table.labels[i]});
  }
  return points;
}

std::map<std::int64_t, std::string> read_labels(std::istream& in, std::string_view source)
{
  std::map<std::int64_t, std::string> labels;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string id_text = line.substr(0, tab);
    std::int64_t id = 0;
    const auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || p != id_text.data() + id_text.size())
      throw InputError(fmt::format("{}:{}: invalid id '{}'", source, n, id_text));
    const std::string text = tab == std::string::npos ? std::string() : line.substr(tab + 1);
    if (!labels.emplace(id, text).second)
      throw InputError(fmt::format("{}:{}: duplicate id {}", source, n, id));
  }
  return labels;
}

void write_labels(std::ostream& out, std::span<const std::int64_t> ids, const std::vector<Document>& docs)
{
  std::map<std::int64_t, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  for (auto id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw InputError(fmt::format("write_labels: unknown id {}", id));
    fmt::print(out, "{}\t{}\n", id, snippet(it->second->text));
  }
}

}  // namespace mcdrop
