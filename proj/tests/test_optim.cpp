#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mcdrop/error.hpp"
#include "mcdrop/optim.hpp"
#include "mcdrop/search.hpp"
#include "testing.hpp"

using namespace mcdrop;

namespace {

// Ten token sequences; token 5 present <=> label 1.
std::vector<LabeledSequence> toy_corpus()
{
  const std::vector<std::vector<std::size_t>> docs = {
      {2, 3, 5}, {4, 2}, {5, 4, 3}, {3, 3, 2}, {2, 5},
      {4, 4, 3}, {5}, {2, 4}, {3, 5, 2, 4}, {3, 2, 4}};
  std::vector<LabeledSequence> out;
  for (const auto& d : docs) {
    const bool hit = std::find(d.begin(), d.end(), 5) != d.end();
    out.push_back({FeatureSequence::from_tokens(d), hit ? 1 : 0});
  }
  return out;
}

ModelConfig toy_model(double rate)
{
  ModelConfig c;
  c.mode = InputMode::embedding;
  c.input_dim = 6;
  c.embedding_dim = 8;
  c.units = 8;
  c.dropout = c.recurrent_dropout = c.dense_dropout = rate;
  return c;
}

double train_accuracy(const ModelParameters& p, const std::vector<LabeledSequence>& data)
{
  ModelConfig det = p.config;
  det.dropout = det.recurrent_dropout = det.dense_dropout = 0.0;
  const MaskSet ones = draw_masks(det, 0);
  std::size_t right = 0;
  for (const auto& d : data) right += (predict_probability(d.x, p, ones) >= 0.5 ? 1 : 0) == d.label;
  return static_cast<double>(right) / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters unchanged")
{
  ModelParameters p = ModelParameters::initialize(toy_model(0.2), 3);
  const ModelParameters before = p;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  const auto data = toy_corpus();
  const TrainResult r = train(p, data, cfg);
  CHECK(p == before);
  CHECK(r.loss_history.size() == 1);
  CHECK(r.steps == 3);
}

TEST_CASE("toy separable set reaches full training accuracy within 50 epochs")
{
  for (OptimizerKind kind : {OptimizerKind::adam, OptimizerKind::rmsprop}) {
    ModelParameters p = ModelParameters::initialize(toy_model(0.1), 21);
    TrainConfig cfg;
    cfg.optimizer = kind;
    cfg.learning_rate = 0.02;
    cfg.batch_size = 4;
    cfg.epochs = 50;
    cfg.seed = 8;
    const auto data = toy_corpus();
    const TrainResult r = train(p, data, cfg);
    CHECK(r.loss_history.size() == 50);
    CHECK(r.steps == 50 * 3);
    CHECK(train_accuracy(p, data) == 1.0);
  }
}

TEST_CASE("toy loss is non-increasing over 5-epoch windows")
{
  // Full batches: with ten documents, word-type dropout on a 4-document
  // batch can drop the keyword itself and make single windows spike.
  ModelParameters p = ModelParameters::initialize(toy_model(0.1), 21);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 10;
  cfg.epochs = 50;
  cfg.seed = 8;
  const auto data = toy_corpus();
  const auto h = train(p, data, cfg).loss_history;
  std::vector<double> windows;
  for (std::size_t w = 0; w + 5 <= h.size(); w += 5)
    windows.push_back((h[w] + h[w + 1] + h[w + 2] + h[w + 3] + h[w + 4]) / 5.0);
  for (std::size_t i = 1; i < windows.size(); ++i) CHECK(windows[i] <= windows[i - 1]);
}

TEST_CASE("training is deterministic given the seed")
{
  const auto data = toy_corpus();
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 3;
  cfg.epochs = 5;
  cfg.seed = 77;
  ModelParameters a = ModelParameters::initialize(toy_model(0.3), 1), b = a;
  const auto ra = train(a, data, cfg), rb = train(b, data, cfg);
  CHECK(ra.loss_history == rb.loss_history);
  CHECK(a == b);
  cfg.seed = 78;
  ModelParameters c = ModelParameters::initialize(toy_model(0.3), 1);
  CHECK(train(c, data, cfg).loss_history != ra.loss_history);
}

TEST_CASE("non-finite input aborts with diagnostics")
{
  ModelConfig cfg;
  cfg.input_dim = 2;
  cfg.units = 2;
  ModelParameters p = ModelParameters::initialize(cfg, 1);
  std::vector<LabeledSequence> data = {{FeatureSequence::from_features({1.0, 0.5}), 1},
                                       {FeatureSequence::from_features({NAN, 0.5}), 0}};
  TrainConfig tc;
  tc.batch_size = 1;
  tc.epochs = 2;
  try {
    train(p, data, tc);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 0") != std::string::npos);
    CHECK(msg.find("batch") != std::string::npos);
    CHECK(msg.find("gradient norm") != std::string::npos);
  }
}

TEST_CASE("adam examples")
{
  std::vector<Tensor> params = {Tensor::scalar(2.0)};
  std::vector<Tensor> zero = {Tensor::scalar(0.0)};
  AdamState state;
  adam_step(params, zero, state, 0.1);
  CHECK(params[0][0] == 2.0);

  std::vector<Tensor> p1 = {Tensor::scalar(0.0)};
  std::vector<Tensor> g1 = {Tensor::scalar(1.0)};
  AdamState s1;
  adam_step(p1, g1, s1, 0.01);
  CHECK(std::abs(p1[0][0] - (-0.01 / (1.0 + 1e-8))) < 1e-18);

  std::vector<Tensor> pa = {Tensor::row({0.3, -0.2})}, pb = pa;
  AdamState sa, sb;
  for (int i = 0; i < 10; ++i) {
    std::vector<Tensor> g = {Tensor::row({std::sin(i * 1.0), std::cos(i * 1.0)})};
    adam_step(pa, g, sa, 0.05);
    adam_step(pb, g, sb, 0.05);
  }
  CHECK(pa == pb);

  std::vector<Tensor> wrong = {Tensor::row({1.0, 2.0, 3.0})};
  CHECK_THROWS_AS(adam_step(pa, wrong, sa, 0.1), DimensionError);
}

TEST_CASE("rmsprop single step")
{
  std::vector<Tensor> p = {Tensor::scalar(1.0)};
  std::vector<Tensor> g = {Tensor::scalar(2.0)};
  RmsPropState s;
  rmsprop_step(p, g, s, 0.01);
  // ms = 0.1 * 4 = 0.4; step = lr * g / (sqrt(ms) + eps)
  CHECK(std::abs(p[0][0] - (1.0 - 0.01 * 2.0 / (std::sqrt(0.4) + 1e-7))) < 1e-15);
}

TEST_CASE("global-norm clipping")
{
  std::vector<Tensor> g = {Tensor::row({3.0, 0.0}), Tensor::row({4.0})};
  CHECK(clip_global_norm(g, 10.0) == 5.0);
  CHECK(g[0][0] == 3.0);
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(std::abs(std::sqrt(g[0].squared_norm() + g[1].squared_norm()) - 1.0) < 1e-12);
}

TEST_CASE("search draws lie in the standard grid")
{
  const SearchSpace space = SearchSpace::standard(200);
  CHECK(space.batch_sizes.size() == 32);
  CHECK(space.epochs.size() == 19);
  CHECK(space.dropout_rates.size() == 15);
  const SearchResult r = random_search(space, [](const SearchDraw&, std::uint64_t) { return 1.0; }, 5);
  std::set<std::size_t> batches;
  for (const auto& row : r.rows) {
    CHECK(space.contains(row.draw));
    CHECK(row.draw.batch_size % 4 == 0);
    CHECK(row.draw.epochs % 5 == 0);
    batches.insert(row.draw.batch_size);
  }
  CHECK(batches.size() > 10);
  SearchDraw off = r.rows[0].draw;
  off.batch_size = 6;
  CHECK_FALSE(space.contains(off));
}

TEST_CASE("search: budget 1, ties, determinism and best >= median")
{
  const SearchSpace one = SearchSpace::standard(1);
  const auto r1 = random_search(one, [](const SearchDraw&, std::uint64_t) { return 3.0; }, 9);
  REQUIRE(r1.rows.size() == 1);
  CHECK(r1.best == 0);
  CHECK(r1.best_row().draw == sample_draw(one, draw_stream(9, 0)));

  const auto tie = random_search(SearchSpace::standard(6), [](const SearchDraw&, std::uint64_t) { return 1.0; }, 9);
  CHECK(tie.best == 0);

  auto score = [](const SearchDraw& d, std::uint64_t stream) {
    return static_cast<double>(d.units) / 1024.0 + d.dropout + static_cast<double>(stream % 7) * 1e-3;
  };
  const auto a = random_search(SearchSpace::standard(20), score, 42);
  const auto b = random_search(SearchSpace::standard(20), score, 42);
  REQUIRE(a.rows.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a.rows[i].draw == b.rows[i].draw);
    CHECK(a.rows[i].score == b.rows[i].score);
    CHECK(a.rows[i].eval_stream == eval_stream(42, i));
  }
  std::vector<double> scores;
  for (const auto& row : a.rows) scores.push_back(row.score);
  std::sort(scores.begin(), scores.end());
  CHECK(a.best_row().score >= scores[scores.size() / 2]);
  CHECK(a.best_row().score == scores.back());
}

TEST_CASE("search rejects an empty domain or zero budget")
{
  SearchSpace s = SearchSpace::standard(3);
  s.units.clear();
  CHECK_THROWS_AS(s.validate(), InputError);
  CHECK_THROWS_AS(SearchSpace::standard(0).validate(), InputError);
}

TEST_CASE("leaderboard CSV layout")
{
  const auto r = random_search(SearchSpace::standard(2), [](const SearchDraw&, std::uint64_t) { return 0.5; }, 1);
  std::ostringstream os;
  write_leaderboard_csv(os, r);
  const std::string text = os.str();
  CHECK(text.rfind("draw_index,optimizer,batch_size,activation,epochs,units,dropout,recurrent_dropout,"
                   "dense_dropout,eval_stream,score\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
