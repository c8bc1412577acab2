#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mcdrop/error.hpp"
#include "mcdrop/mcd.hpp"
#include "mcdrop/optim.hpp"
#include "testing.hpp"

using namespace mcdrop;

namespace {

ModelConfig vector_config(double rate)
{
  ModelConfig c;
  c.input_dim = 6;
  c.units = 8;
  c.dropout = c.recurrent_dropout = c.dense_dropout = rate;
  return c;
}

ModelParameters trained_toy()
{
  ModelParameters p = ModelParameters::initialize(vector_config(0.3), 5);
  std::vector<LabeledSequence> data;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform();
    data.push_back({FeatureSequence::from_features(x), x[0] > 0.5 ? 1 : 0});
  }
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.batch_size = 8;
  tc.epochs = 20;
  train(p, data, tc);
  return p;
}

}  // namespace

TEST_CASE("rate-0 network gives identical samples")
{
  const ModelParameters p = ModelParameters::initialize(vector_config(0.0), 1);
  const auto x = FeatureSequence::from_features({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  const SampleVector s = mc_forward(p, x, 5, 7, 100);
  REQUIRE(s.samples.size() == 5);
  for (double v : s.samples) CHECK(v == s.samples[0]);
  CHECK(s.doc_id == 100);
  CHECK_THROWS_AS(mc_forward(p, x, 0, 7, 100), InputError);
}

TEST_CASE("mc_forward is deterministic, seeded per document and schedule independent")
{
  const ModelParameters p = trained_toy();
  const auto x = FeatureSequence::from_features({0.9, 0.1, 0.5, 0.2, 0.4, 0.3});
  setenv("MCDROP_THREADS", "1", 1);
  const SampleVector serial = mc_forward(p, x, 64, 3, 1);
  setenv("MCDROP_THREADS", "4", 1);
  const SampleVector threaded = mc_forward(p, x, 64, 3, 1);
  unsetenv("MCDROP_THREADS");
  CHECK(serial.samples == threaded.samples);
  CHECK(mc_forward(p, x, 64, 3, 1).samples == serial.samples);
  CHECK(mc_forward(p, x, 64, 3, 2).samples != serial.samples);
  CHECK(mc_forward(p, x, 64, 4, 1).samples != serial.samples);

  // Pass k uses the masks of pass_stream(seed, doc, k).
  CHECK(serial.samples[10] == predict_probability(x, p, draw_masks(p.config, pass_stream(3, 1, 10))));
}

TEST_CASE("trained toy model has non-degenerate uncertainty")
{
  const ModelParameters p = trained_toy();
  const auto x = FeatureSequence::from_features({0.55, 0.3, 0.2, 0.8, 0.1, 0.6});
  const SampleVector s = mc_forward(p, x, kDefaultSamples, 11, 5);
  CHECK(s.samples.size() == 500);
  CHECK(summarize(s).std > 0.0);
  for (double v : s.samples) CHECK((v > 0.0 && v < 1.0));
}

TEST_CASE("predictive mean examples")
{
  CHECK(predictive_mean(std::vector<double>{0.2, 0.4, 0.6}) == (0.2 + 0.4 + 0.6) / 3.0);
  CHECK(std::abs(predictive_mean(std::vector<double>{0.2, 0.4, 0.6}) - 0.4) < 1e-15);
  CHECK(predictive_mean(std::vector<double>(17, 0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(predictive_mean(std::vector<double>{0.77}) == 0.77);
  CHECK_THROWS_AS(predictive_mean(std::vector<double>{}), InputError);
}

TEST_CASE("summary bins, labels and spread")
{
  auto summary_of = [](std::vector<double> xs) { return summarize(SampleVector{1, std::move(xs)}); };
  CHECK(summary_of({0.1}).bin == 0);
  CHECK(summary_of({0.99}).bin == 3);
  CHECK(summary_of({0.5}).bin == 2);
  CHECK(summary_of({0.5}).label == 1);
  CHECK(summary_of({0.4999}).label == 0);
  CHECK(probability_bin(1.0) == 3);
  CHECK(probability_bin(0.0) == 0);
  CHECK(probability_bin(0.25) == 1);

  const PredictiveSummary s = summary_of({0.3, 0.5, 0.7});
  CHECK(std::abs(s.std - std::sqrt(0.08 / 3.0)) < 1e-15);
  CHECK(s.min == 0.3);
  CHECK(s.max == 0.7);

  int last = 0;
  for (int i = 0; i <= 1000; ++i) {
    const int b = probability_bin(i / 1000.0);
    CHECK(b >= last);
    last = b;
  }
}

TEST_CASE("sample CSV round trip and validation")
{
  const std::vector<SampleVector> sv = {{3, {0.25, 0.5}}, {1, {0.125, 0.1 + 0.2}}};
  std::stringstream ss;
  write_samples_csv(ss, sv);
  const auto back = read_samples_csv(ss, "memory");
  REQUIRE(back.size() == 2);
  CHECK(back[0].doc_id == 3);
  CHECK(back[1].samples == sv[1].samples);

  std::istringstream gap("doc_id,k,probability\n1,0,0.5\n2,0,0.5\n1,1,0.5\n");
  try {
    read_samples_csv(gap, "memory");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("duplicate id 1") != std::string::npos);
  }
  std::istringstream ragged("doc_id,k,probability\n1,0,0.5\n1,1,0.5\n2,0,0.5\n");
  CHECK_THROWS_AS(read_samples_csv(ragged, "memory"), InputError);
  std::istringstream range("doc_id,k,probability\n1,0,1.5\n");
  CHECK_THROWS_AS(read_samples_csv(range, "memory"), InputError);
}
