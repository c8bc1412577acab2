#include <doctest.h>

#include <sstream>

#include "mcdrop/config.hpp"
#include "mcdrop/error.hpp"
#include "mcdrop/pipeline.hpp"
#include "testing.hpp"

using namespace mcdrop;
namespace fs = std::filesystem;
using testing::read_file;
using testing::run_cli;
using testing::scratch_dir;
using testing::source_dir;
using testing::write_file;

namespace {

fs::path small_config() { return source_dir() / "data/configs/synthetic40.ini"; }
fs::path fixture(const std::string& name) { return source_dir() / "tests/fixtures/viz20" / name; }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string config_text(const RunConfig& cfg)
{
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace

TEST_CASE("config: shipped file parses and round trips")
{
  const RunConfig cfg = load_config(small_config());
  CHECK(cfg.model.units == 16);
  CHECK(cfg.folds == 5);
  CHECK(cfg.seed == 42);
  CHECK(cfg.corpus.is_absolute());
  CHECK(cfg.search.units == std::vector<std::size_t>{8, 16});

  const std::string text = config_text(cfg);
  std::istringstream in(text);
  const RunConfig back = parse_config(in, "/", "memory");
  CHECK(config_text(back) == text);
}

TEST_CASE("config: unknown keys and bad values are rejected")
{
  const auto dir = scratch_dir("config-errors");
  std::istringstream unknown("[model]\nunits = 4\nwidth = 3\n");
  CHECK_THROWS_AS(parse_config(unknown, dir, "memory"), InputError);
  std::istringstream section("[nope]\na = 1\n");
  CHECK_THROWS_AS(parse_config(section, dir, "memory"), InputError);
  std::istringstream bad_rate("[model]\ndropout = 1.5\n");
  CHECK_THROWS(parse_config(bad_rate, dir, "memory").validate());
}

TEST_CASE("cli: run writes metrics and one plot per fold")
{
  const auto dir = scratch_dir("cli-run");
  const auto out = dir / "run";
  const auto r = run_cli(fmt::format("run --config {} --out {} --k-samples 10", q(small_config()), q(out)),
                         dir / "log.txt");
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "manifest.ini"));
  for (int f = 1; f <= 5; ++f) {
    const auto svg = out / fmt::format("fold-{}", f) / "viz.svg";
    REQUIRE(fs::exists(svg));
    CHECK(read_file(svg).find("</svg>") != std::string::npos);
  }
  const std::string csv = read_file(out / "metrics.csv");
  CHECK(csv.find("MCD LSTM,mean,") != std::string::npos);
  CHECK(csv.find("LR,mean,") != std::string::npos);

  const auto again = dir / "again";
  REQUIRE(run_cli(fmt::format("run --config {} --out {} --k-samples 10", q(small_config()), q(again)),
                  dir / "log2.txt")
              .exit_code == 0);
  CHECK(read_file(again / "metrics.csv") == csv);
  CHECK(read_file(again / "fold-3" / "viz.svg") == read_file(out / "fold-3" / "viz.svg"));
}

TEST_CASE("cli: missing corpus is an input error naming the path")
{
  const auto dir = scratch_dir("cli-missing");
  write_file(dir / "bad.ini", "[corpus]\npath = nowhere/absent.csv\n");
  const auto r = run_cli(fmt::format("run --config {} --out {}", q(dir / "bad.ini"), q(dir / "out")),
                         dir / "log.txt");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("absent.csv") != std::string::npos);
}

TEST_CASE("cli: unknown command and missing config exit with 2")
{
  const auto dir = scratch_dir("cli-usage");
  CHECK(run_cli("frobnicate", dir / "a.txt").exit_code == 2);
  CHECK(run_cli(fmt::format("run --config {}", q(dir / "none.ini")), dir / "b.txt").exit_code == 2);
}

TEST_CASE("cli: search is reproducible and replays from the leaderboard")
{
  const auto dir = scratch_dir("cli-search");
  const std::string args = fmt::format("search --config {} --k-samples 5 --seed 9", q(small_config()));
  REQUIRE(run_cli(args + " --out " + q(dir / "a"), dir / "a.txt").exit_code == 0);
  REQUIRE(run_cli(args + " --out " + q(dir / "b"), dir / "b.txt").exit_code == 0);
  const std::string board = read_file(dir / "a" / "leaderboard.csv");
  CHECK(board == read_file(dir / "b" / "leaderboard.csv"));

  RunConfig cfg = load_config(small_config());
  cfg.seed = 9;
  cfg.search_samples = 5;
  const PreparedCorpus corpus = PreparedCorpus::from_documents(read_corpus(cfg.corpus));
  const SearchResult result = run_search(corpus, cfg);
  REQUIRE(result.rows.size() == cfg.search.budget);
  for (const auto& row : result.rows) {
    CHECK(cfg.search.contains(row.draw));
    CHECK(holdout_score(corpus, cfg, row.draw, row.eval_stream) == row.score);
  }
}

TEST_CASE("cli: viz renders the fixture")
{
  const auto dir = scratch_dir("cli-viz");
  const std::string base = fmt::format("viz --samples {} --outcomes {} --labels {} --k-nn 5",
                                       q(fixture("samples.csv")), q(fixture("outcomes.csv")),
                                       q(fixture("labels.tsv")));
  const auto r = run_cli(base + " --out " + q(dir / "v.svg") + " --coords " + q(dir / "c.csv"),
                         dir / "log.txt");
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  const std::string svg = read_file(dir / "v.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(testing::parse_glyphs(svg).size() == 20);
  CHECK(read_file(dir / "c.csv").find("500,") != std::string::npos);

  REQUIRE(run_cli(base + " --out " + q(dir / "w.svg"), dir / "log2.txt").exit_code == 0);
  CHECK(read_file(dir / "w.svg") == svg);
}

TEST_CASE("cli: viz input errors")
{
  const auto dir = scratch_dir("cli-viz-errors");
  write_file(dir / "empty.csv", "doc_id,k,probability\n");
  auto r = run_cli(fmt::format("viz --samples {} --outcomes {} --labels {} --out {}", q(dir / "empty.csv"),
                               q(fixture("outcomes.csv")), q(fixture("labels.tsv")), q(dir / "v.svg")),
                   dir / "a.txt");
  CHECK(r.exit_code == 2);
  CHECK(!fs::exists(dir / "v.svg"));

  std::string outcomes = read_file(fixture("outcomes.csv"));
  outcomes += "507,1,1,TP\n";
  write_file(dir / "dup.csv", outcomes);
  r = run_cli(fmt::format("viz --samples {} --outcomes {} --labels {} --out {}", q(fixture("samples.csv")),
                          q(dir / "dup.csv"), q(fixture("labels.tsv")), q(dir / "v.svg")),
              dir / "b.txt");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("507") != std::string::npos);
}

TEST_CASE("viz join reports mismatched ids")
{
  VizInputs in;
  in.samples = {{1, {0.2, 0.3}}, {2, {0.7, 0.9}}};
  in.outcomes = {{1, 0, 0, Outcome::TN}, {3, 1, 1, Outcome::TP}};
  in.labels = {{1, "a"}, {2, "b"}, {3, "c"}};
  try {
    join_viz_inputs(in);
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
  in.outcomes[1].doc_id = 2;
  const VizTable t = join_viz_inputs(in);
  CHECK(t.labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("cli: clean and metrics commands")
{
  const auto dir = scratch_dir("cli-tools");
  write_file(dir / "c.csv", "id,text,label\n1,\"@bob Hello... http://x.y\",0\n2,#StopImmigration,1\n");
  REQUIRE(run_cli(fmt::format("clean --corpus {} --out {}", q(dir / "c.csv"), q(dir / "clean.csv")),
                  dir / "a.txt")
              .exit_code == 0);
  const std::string cleaned = read_file(dir / "clean.csv");
  CHECK(cleaned.find("hello") != std::string::npos);
  CHECK(cleaned.find("stop immigration") != std::string::npos);

  const auto r = run_cli(fmt::format("metrics {} {} --out {}", q(fixture("outcomes.csv")),
                                     q(fixture("outcomes.csv")), q(dir / "m.csv")),
                         dir / "b.txt");
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  // fixture: 18 of 20 correct
  CHECK(read_file(dir / "m.csv").find(",mean,90.0000,") != std::string::npos);
}
