#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mcdrop {

struct Document
{
  std::int64_t id = 0;
  std::string text;
  int label = 0;  // 1 = hate speech
};

// Reads a corpus with header columns id,text,label (any order, extra columns
// ignored). Tab-separated when the extension is .tsv. Throws InputError on
// a missing file, duplicate ids or labels outside {0,1}.
std::vector<Document> read_corpus(const std::filesystem::path& path);
std::vector<Document> read_corpus(std::istream& in, char delim, std::string_view source);
void write_corpus(std::ostream& out, std::span<const Document> docs);

struct LemmaRule
{
  std::string suffix;
  std::string replacement;
  std::size_t min_stem = 0;
};

// Preprocessing tables. standard() holds the tables shipped in data/.
struct TextTables
{
  std::set<std::string, std::less<>> stopwords;
  std::map<std::string, std::string, std::less<>> contractions;
  std::map<std::string, std::string, std::less<>> typos;
  std::map<std::string, std::string, std::less<>> lemma_exceptions;
  std::vector<LemmaRule> lemma_rules;

  static const TextTables& standard();
};

// Noise removal (emails, URLs, @user mentions, runs of dots and ellipses),
// contraction and typo expansion, hashtag splitting on case boundaries,
// lowercasing, stopword removal and rule-based lemmatization.
// Idempotent: clean(clean(x)) == clean(x).
std::string clean(std::string_view raw, const TextTables& tables = TextTables::standard());

// Applies exceptions then suffix rules until the word stops changing.
std::string lemmatize(std::string_view word, const TextTables& tables = TextTables::standard());

std::vector<std::string> tokenize(std::string_view cleaned);

using TokenizedCorpus = std::vector<std::vector<std::string>>;

// Token index with document frequencies. Index 0 is PAD and 1 is UNK; the
// remaining tokens are ordered by descending document frequency, ties by
// token, so indices are stable for a given training corpus.
class Vocabulary
{
public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kDefaultCap = 20000;

  static Vocabulary build(std::span<const std::vector<std::string>> docs,
                          std::size_t max_tokens = kDefaultCap);

  // Includes PAD and UNK.
  std::size_t size() const { return tokens_.size(); }
  std::size_t document_count() const { return n_docs_; }
  std::optional<std::size_t> find(std::string_view token) const;
  // UNK when absent.
  std::size_t lookup(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t df(std::size_t index) const { return df_.at(index); }
  // ln((1 + n) / (1 + df)) + 1
  double idf(std::size_t index) const;

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b)
  {
    return a.tokens_ == b.tokens_ && a.df_ == b.df_ && a.n_docs_ == b.n_docs_;
  }

private:
  void reindex();

  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
};

struct SparseRow
{
  std::vector<std::uint32_t> index;  // ascending
  std::vector<double> value;

  std::vector<double> dense(std::size_t width) const;
  double squared_norm() const;
};

struct SparseMatrix
{
  std::size_t cols = 0;
  std::vector<SparseRow> rows;
};

// Raw-count tf times smoothed idf from `vocab`, each row L2-normalized.
// Tokens absent from the vocabulary are ignored; empty documents give an
// all-zero row. Throws InputError if the vocabulary has no real tokens.
SparseMatrix tfidf(std::span<const std::vector<std::string>> docs, const Vocabulary& vocab);

// Token ids (UNK for out-of-vocabulary), truncated to max_len. An empty
// document becomes the single PAD token.
std::vector<std::size_t> token_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                   std::size_t max_len);

}  // namespace mcdrop
