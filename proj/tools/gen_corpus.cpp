// Generates the bundled synthetic corpora. A document is hateful (label 1)
// iff it carries one of ten toxic stems; about 30% of documents also carry
// distractor words that lean toward, but do not decide, the label. A small
// share of hateful documents spell their keyword in an obfuscated way that
// the text pipeline cannot recover.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mcdrop/random.hpp"
#include "mcdrop/textpipe.hpp"

using namespace mcdrop;

namespace {

const std::vector<std::vector<std::string>> kToxic = {
    {"scum", "scums"},
    {"vermin"},
    {"filth"},
    {"trash", "trashes", "trashed"},
    {"parasite", "parasites"},
    {"savage", "savages"},
    {"disgusting", "disgust", "disgusts"},
    {"invader", "invaders"},
    {"kill", "kills", "killing", "killed"},
    {"hate", "hates", "hating"},
};

// Spellings that survive cleaning as unrelated fragments.
const std::vector<std::string> kObfuscated = {
    "s.c.u.m", "v3rm1n", "f!lth", "tr@sh", "p4r4s1tes", "s@vages", "d1sgust!ng", "1nvaders", "k!ll", "h8te",
};

const std::vector<std::string> kDistractors = {
    "immigrants", "refugees", "women", "border", "migrants", "feminists", "politicians", "foreigners",
};

const std::vector<std::string> kNeutral = {
    "today", "weather", "coffee", "morning", "train", "city", "music", "game", "team", "season",
    "friends", "family", "weekend", "movie", "book", "school", "teacher", "market", "prices",
    "news", "story", "video", "photo", "garden", "dinner", "lunch", "recipe", "holiday", "beach",
    "mountain", "river", "park", "street", "traffic", "office", "meeting", "project", "deadline",
    "phone", "laptop", "update", "election", "vote", "policy", "council", "budget", "tax", "law",
    "court", "judge", "police", "hospital", "doctor", "nurse", "health", "church", "festival",
    "concert", "band", "song",
};

const std::vector<std::string> kVerbs = {
    "love", "like", "enjoy", "watch", "read", "visit", "miss", "need", "want", "discuss",
    "support", "follow", "share", "see", "remember", "cook", "build", "fix", "plan", "celebrate",
};

const std::vector<std::string> kFillers = {
    "I don't think", "we're going to", "can't believe", "it's", "they're", "you'll", "what's",
    "honestly", "really", "so", "just", "maybe", "finally", "again", "still",
};

const std::vector<std::string> kHashtags = {
    "#MondayMood", "#BuildTheWall", "#RefugeesWelcome", "#GameDay", "#CleanAir", "#VoteNow",
    "#SundayFunday", "#StopTheInvasion", "#LocalNews", "#TBT",
};

template <class T>
const T& choose(Rng& rng, const std::vector<T>& xs)
{
  return xs[rng.below(xs.size())];
}

std::string make_text(Rng& rng, int label, bool distractor, bool obfuscated)
{
  std::vector<std::string> words;
  const std::size_t n = 6 + rng.below(10);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < 0.12) words.push_back(choose(rng, kFillers));
    else if (u < 0.30) words.push_back(choose(rng, kVerbs));
    else words.push_back(choose(rng, kNeutral));
  }
  auto insert = [&](std::string w) {
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)), std::move(w));
  };
  if (distractor) {
    insert(choose(rng, kDistractors));
    if (rng.bernoulli(0.3)) insert(choose(rng, kDistractors));
  }
  if (label == 1) {
    const std::size_t stem = rng.below(kToxic.size());
    if (obfuscated) {
      insert(kObfuscated[stem]);
    } else {
      insert(choose(rng, kToxic[stem]));
      if (rng.bernoulli(0.25)) insert(choose(rng, kToxic[rng.below(kToxic.size())]));
    }
  }
  if (rng.bernoulli(0.3)) insert(fmt::format("@user{}", rng.below(500)));
  if (rng.bernoulli(0.15)) insert(fmt::format("https://t.co/x{}", rng.below(100000)));
  if (rng.bernoulli(0.25)) words.push_back(choose(rng, kHashtags));
  if (rng.bernoulli(0.2)) words.push_back("...");

  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text += ' ';
    text += words[i];
  }
  if (!text.empty() && rng.bernoulli(0.5)) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"synthetic hate-speech corpus generator"};
  std::size_t n = 400;
  std::uint64_t seed = 7;
  double distractor_rate = 0.30;
  double obfuscated_rate = 0.06;
  std::string out;
  app.add_option("--n", n, "documents")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--distractors", distractor_rate, "share of documents with distractor words");
  app.add_option("--obfuscated", obfuscated_rate, "share of hateful documents with an obfuscated keyword");
  app.add_option("--out", out, "output CSV (stdout if omitted)");
  CLI11_PARSE(app, argc, argv);

  Rng rng(derive_stream(seed, {name_tag("corpus")}));
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : 0;
    // Distractors lean toward the hateful class: 45% vs 15%, 30% overall.
    const double lean = label == 1 ? distractor_rate * 1.5 : distractor_rate * 0.5;
    const bool distractor = rng.bernoulli(lean);
    const bool obfuscated = label == 1 && rng.bernoulli(obfuscated_rate);
    docs.push_back({static_cast<std::int64_t>(1000 + i), make_text(rng, label, distractor, obfuscated), label});
  }
  for (std::size_t i = docs.size(); i > 1; --i) std::swap(docs[i - 1], docs[rng.below(i)]);

  if (out.empty()) {
    write_corpus(std::cout, docs);
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      fmt::print(stderr, "cannot write '{}'\n", out);
      return 2;
    }
    write_corpus(f, docs);
  }
  return 0;
}
