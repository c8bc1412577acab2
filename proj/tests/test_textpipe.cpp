#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcdrop/error.hpp"
#include "mcdrop/textpipe.hpp"
#include "testing.hpp"

using namespace mcdrop;

TEST_CASE("clean examples")
{
  CHECK(clean("@bob http://x.y hello...") == "hello");
  CHECK(clean("don't") == "");
  CHECK(clean("") == "");
  CHECK(clean("#StopImmigration") == "stop immigration");
  CHECK(clean("Email me: someone@example.org or www.example.com/page") == "email");
  CHECK(clean("Wow\xE2\x80\xA6 teh refugees") == "wow refugee");
  CHECK(clean("They're SHOUTING!!!") == "shout");
}

TEST_CASE("lemmatizer rules and exceptions")
{
  CHECK(lemmatize("refugees") == "refugee");
  CHECK(lemmatize("parties") == "party");
  CHECK(lemmatize("classes") == "class");
  CHECK(lemmatize("boxes") == "box");
  CHECK(lemmatize("killing") == "kill");
  CHECK(lemmatize("women") == "woman");
  CHECK(lemmatize("bus") == "bus");
  CHECK(lemmatize("is") == "is");
}

TEST_CASE("clean is idempotent")
{
  const std::vector<std::string> samples = {
      "@user1 Don't you think #BuildTheWall is, like... ridiculous?? http://t.co/abc",
      "RT @someone: they're parasites!!! #StopTheInvasion2019",
      "   multiple   spaces\tand\nnewlines  ",
      "Ünïcödé wörds and emoji \xF0\x9F\x98\x80 mixed in",
      "u r 2 slow lol",
      "running runs ran classes glasses stresses studies",
      "#CamelCaseHashtag_with_underscores and #ALLCAPS and #lower",
  };
  for (const auto& s : samples) {
    const std::string once = clean(s);
    CHECK(clean(once) == once);
  }
  const auto docs = read_corpus(mcdrop::testing::source_dir() / "data/corpora/synthetic400.csv");
  for (const auto& d : docs) {
    const std::string once = clean(d.text);
    CHECK(clean(once) == once);
  }
}

TEST_CASE("tokenize examples")
{
  CHECK(tokenize("a b  c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("refugees go home") == std::vector<std::string>{"refugees", "go", "home"});
}

TEST_CASE("vocabulary ordering, specials and round trip")
{
  const std::vector<std::vector<std::string>> docs = {{"b", "a"}, {"a", "c"}, {"a", "b", "b"}};
  const Vocabulary v = Vocabulary::build(docs);
  REQUIRE(v.size() == 5);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kUnk) == "<unk>");
  CHECK(v.token(2) == "a");
  CHECK(v.token(3) == "b");
  CHECK(v.token(4) == "c");
  CHECK(v.df(2) == 3);
  CHECK(v.df(3) == 2);
  CHECK(v.lookup("zzz") == Vocabulary::kUnk);
  CHECK_FALSE(v.find("<pad>").has_value());

  std::stringstream ss;
  v.save(ss);
  const Vocabulary w = Vocabulary::load(ss);
  CHECK(w == v);
  CHECK(w.lookup("c") == 4);

  const Vocabulary capped = Vocabulary::build(docs, 1);
  CHECK(capped.size() == 3);
}

TEST_CASE("tfidf examples")
{
  {
    const std::vector<std::vector<std::string>> docs = {{"x"}};
    const Vocabulary v = Vocabulary::build(docs);
    const SparseMatrix m = tfidf(docs, v);
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0].index == std::vector<std::uint32_t>{2});
    CHECK(m.rows[0].value == std::vector<double>{1.0});
  }
  {
    const std::vector<std::vector<std::string>> docs = {{"a"}, {"a", "b"}};
    const Vocabulary v = Vocabulary::build(docs);
    CHECK(v.idf(*v.find("a")) == 1.0);
    CHECK(v.idf(*v.find("b")) == std::log(3.0 / 2.0) + 1.0);
    const SparseMatrix m = tfidf(docs, v);
    const double ib = std::log(1.5) + 1.0;
    const double norm = std::sqrt(1.0 + ib * ib);
    CHECK(m.rows[1].value[0] == doctest::Approx(1.0 / norm).epsilon(1e-15));
    CHECK(m.rows[1].value[1] == doctest::Approx(ib / norm).epsilon(1e-15));

    const std::vector<std::vector<std::string>> unseen = {{"a", "zebra", "zebra"}};
    const SparseMatrix u = tfidf(unseen, v);
    CHECK(u.rows[0].index == std::vector<std::uint32_t>{static_cast<std::uint32_t>(*v.find("a"))});
    CHECK(u.rows[0].value == std::vector<double>{1.0});
  }
  {
    const std::vector<std::vector<std::string>> empty = {{}};
    CHECK_THROWS_AS(tfidf(empty, Vocabulary::build(empty)), InputError);
  }
}

TEST_CASE("tfidf rows have unit norm or are empty")
{
  const auto docs = read_corpus(mcdrop::testing::source_dir() / "data/corpora/synthetic400.csv");
  std::vector<std::vector<std::string>> toks;
  for (const auto& d : docs) toks.push_back(tokenize(clean(d.text)));
  toks.push_back({});
  const Vocabulary v = Vocabulary::build(toks);
  const SparseMatrix m = tfidf(toks, v);
  for (const auto& row : m.rows) {
    const double n = row.squared_norm();
    CHECK((n == 0.0 || std::abs(n - 1.0) < 1e-12));
  }
  CHECK(m.rows.back().index.empty());
}

TEST_CASE("token ids truncate and pad")
{
  const std::vector<std::vector<std::string>> docs = {{"a", "b"}};
  const Vocabulary v = Vocabulary::build(docs);
  CHECK(token_ids({"a", "q", "b"}, v, 2) == std::vector<std::size_t>{2, Vocabulary::kUnk});
  CHECK(token_ids({}, v, 5) == std::vector<std::size_t>{Vocabulary::kPad});
}

TEST_CASE("corpus reading")
{
  std::istringstream ok("label,id,text\n1,7,\"hello, world\"\n0,8,plain\n");
  const auto docs = read_corpus(ok, ',', "memory");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == 7);
  CHECK(docs[0].text == "hello, world");
  CHECK(docs[1].label == 0);

  std::istringstream tsv("id\ttext\tlabel\n1\ta\t1\n");
  CHECK(read_corpus(tsv, '\t', "memory").size() == 1);

  std::istringstream dup("id,text,label\n1,a,0\n1,b,1\n");
  CHECK_THROWS_AS(read_corpus(dup, ',', "memory"), InputError);
  std::istringstream bad_label("id,text,label\n1,a,2\n");
  CHECK_THROWS_AS(read_corpus(bad_label, ',', "memory"), InputError);
  std::istringstream no_col("id,body,label\n1,a,0\n");
  try {
    read_corpus(no_col, ',', "memory");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("text") != std::string::npos);
  }
  try {
    read_corpus("/nonexistent/corpus.csv");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/corpus.csv") != std::string::npos);
  }
}
