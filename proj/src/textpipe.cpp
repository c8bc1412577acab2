#include "mcdrop/textpipe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/csv.hpp"
#include "mcdrop/error.hpp"

namespace mcdrop {

namespace detail {
const std::map<std::string, std::string_view>& embedded_tables();
}

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_upper(c) || is_lower(c) || is_digit(c); }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s)
{
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty, non-comment lines of a shipped table, split on tabs/spaces.
std::vector<std::vector<std::string>> table_lines(std::string_view name, std::size_t min_fields)
{
  const auto& tables = detail::embedded_tables();
  auto it = tables.find(std::string(name));
  if (it == tables.end()) throw InputError("missing text table '" + std::string(name) + "'");
  std::vector<std::vector<std::string>> lines;
  std::istringstream in{std::string(it->second)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    std::vector<std::string> fields;
    // Tab separates key from value; values may contain spaces.
    if (auto tab = l.find('\t'); tab != std::string_view::npos) {
      fields.emplace_back(trim(l.substr(0, tab)));
      std::string_view rest = trim(l.substr(tab + 1));
      while (!rest.empty()) {
        auto next = rest.find('\t');
        fields.emplace_back(trim(rest.substr(0, next)));
        if (next == std::string_view::npos) break;
        rest = trim(rest.substr(next + 1));
      }
    } else {
      fields.emplace_back(l);
    }
    if (fields.size() < min_fields)
      throw InputError(fmt::format("text table '{}': malformed line '{}'", name, line));
    lines.push_back(std::move(fields));
  }
  return lines;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to)
{
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

std::string remove_noise(std::string_view raw)
{
  static const std::regex email(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)+)");
  static const std::regex url(R"((https?://|www\.)\S+)", std::regex::icase);
  static const std::regex mention(R"(@\w+)");
  static const std::regex dots(R"(\.{2,})");
  std::string s(raw);
  s = replace_all(std::move(s), "\xE2\x80\xA6", " ");  // horizontal ellipsis
  s = std::regex_replace(s, email, " ");
  s = std::regex_replace(s, url, " ");
  s = std::regex_replace(s, mention, " ");
  s = std::regex_replace(s, dots, " ");
  s = replace_all(std::move(s), "\xE2\x80\x99", "'");  // right single quote
  s = replace_all(std::move(s), "\xE2\x80\x98", "'");
  return s;
}

// Replaces whole words found in the contraction or typo table. Hashtag bodies
// are left untouched so their case boundaries survive.
std::string expand_words(std::string_view s, const TextTables& t)
{
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alnum(s[i]) && s[i] != '\'') {
      out += s[i++];
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && (is_alnum(s[j]) || s[j] == '\'' || s[j] == '_')) ++j;
    std::string_view word = s.substr(i, j - i);
    const bool hashtag = i > 0 && s[i - 1] == '#';
    const std::string key = lower(word);
    if (auto c = t.contractions.find(key); !hashtag && c != t.contractions.end())
      out += c->second;
    else if (auto ty = t.typos.find(key); !hashtag && ty != t.typos.end())
      out += ty->second;
    else
      out += word;
    i = j;
  }
  return out;
}

std::string split_hashtags(std::string_view s)
{
  std::string out;
  out.reserve(s.size() + 8);
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '#') {
      out += s[i++];
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && (is_alnum(s[j]) || s[j] == '_')) ++j;
    std::string_view body = s.substr(i + 1, j - i - 1);
    out += ' ';
    for (std::size_t k = 0; k < body.size(); ++k) {
      const char c = body[k];
      if (c == '_') {
        out += ' ';
        continue;
      }
      if (k > 0) {
        const char prev = body[k - 1];
        const bool next_lower = k + 1 < body.size() && is_lower(body[k + 1]);
        if ((is_upper(c) && (is_lower(prev) || is_digit(prev))) ||
            (is_upper(c) && is_upper(prev) && next_lower) || (is_digit(c) && !is_digit(prev)) ||
            (!is_digit(c) && is_digit(prev)))
          out += ' ';
      }
      out += c;
    }
    out += ' ';
    i = j;
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::vector<std::string> tokens, const TextTables& t)
{
  // Iterate to a fixed point so that cleaning is idempotent even when a
  // lemma is itself a stopword or a typo key.
  for (int round = 0; round < 16; ++round) {
    std::vector<std::string> next;
    next.reserve(tokens.size());
    for (const auto& tok : tokens) {
      std::vector<std::string> parts;
      if (auto ty = t.typos.find(tok); ty != t.typos.end())
        parts = tokenize(ty->second);
      else
        parts = {tok};
      for (auto& p : parts) {
        if (t.stopwords.contains(p)) continue;
        std::string lemma = lemmatize(p, t);
        if (t.stopwords.contains(lemma)) continue;
        next.push_back(std::move(lemma));
      }
    }
    if (next == tokens) break;
    tokens = std::move(next);
  }
  return tokens;
}

std::int64_t parse_id(std::string_view s, std::string_view source, std::size_t line)
{
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError(fmt::format("{}:{}: invalid id '{}'", source, line, s));
  return v;
}

}  // namespace

const TextTables& TextTables::standard()
{
  static const TextTables tables = [] {
    TextTables t;
    for (auto& l : table_lines("stopwords", 1)) t.stopwords.insert(lower(l[0]));
    for (auto& l : table_lines("contractions", 2)) t.contractions.emplace(lower(l[0]), l[1]);
    for (auto& l : table_lines("typos", 2)) t.typos.emplace(lower(l[0]), l[1]);
    for (auto& l : table_lines("lemma_exceptions", 2)) t.lemma_exceptions.emplace(l[0], l[1]);
    for (auto& l : table_lines("lemma_rules", 3)) {
      LemmaRule r;
      r.suffix = l[0];
      r.replacement = l[1] == "-" ? "" : l[1];
      r.min_stem = std::stoul(l[2]);
      t.lemma_rules.push_back(std::move(r));
    }
    return t;
  }();
  return tables;
}

std::string lemmatize(std::string_view word, const TextTables& t)
{
  std::string w(word);
  for (int round = 0; round < 16; ++round) {
    std::string next = w;
    if (auto ex = t.lemma_exceptions.find(w); ex != t.lemma_exceptions.end()) {
      next = ex->second;
    } else {
      for (const LemmaRule& r : t.lemma_rules) {
        if (w.size() >= r.suffix.size() + r.min_stem && w.ends_with(r.suffix)) {
          next = w.substr(0, w.size() - r.suffix.size()) + r.replacement;
          break;
        }
      }
    }
    if (next == w) break;
    w = std::move(next);
  }
  return w;
}

std::string clean(std::string_view raw, const TextTables& tables)
{
  std::string s = remove_noise(raw);
  s = expand_words(s, tables);
  s = split_hashtags(s);
  for (char& c : s) c = is_alnum(c) ? to_lower(c) : ' ';
  const auto tokens = normalize_tokens(tokenize(s), tables);
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned)
{
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j > i) tokens.emplace_back(cleaned.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::vector<Document> read_corpus(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file '" + path.string() + "'");
  return read_corpus(in, delimiter_for(path), path.string());
}

std::vector<Document> read_corpus(std::istream& in, char delim, std::string_view source)
{
  const auto rows = read_delimited(in, delim);
  if (rows.empty()) throw InputError(std::string(source) + ": empty corpus file");
  const std::size_t id_col = column_index(rows[0], "id", source);
  const std::size_t text_col = column_index(rows[0], "text", source);
  const std::size_t label_col = column_index(rows[0], "label", source);
  const std::size_t needed = std::max({id_col, text_col, label_col}) + 1;

  std::vector<Document> docs;
  std::unordered_set<std::int64_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() < needed)
      throw InputError(fmt::format("{}: record {} has {} fields, expected at least {}", source,
                                   r + 1, row.size(), needed));
    Document d;
    d.id = parse_id(row[id_col], source, r + 1);
    d.text = row[text_col];
    const std::string_view label = trim(row[label_col]);
    if (label != "0" && label != "1")
      throw InputError(fmt::format("{}: record {} has label '{}', expected 0 or 1", source, r + 1,
                                   label));
    d.label = label == "1" ? 1 : 0;
    if (!seen.insert(d.id).second)
      throw InputError(fmt::format("{}: duplicate document id {}", source, d.id));
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_corpus(std::ostream& out, std::span<const Document> docs)
{
  out << "id,text,label\n";
  for (const auto& d : docs) fmt::print(out, "{},{},{}\n", d.id, csv_field(d.text), d.label);
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> docs, std::size_t max_tokens)
{
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> unique(doc.begin(), doc.end());
    for (std::string_view tok : unique) ++df[std::string(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_tokens) ranked.resize(max_tokens);

  Vocabulary v;
  v.n_docs_ = docs.size();
  v.tokens_ = {"<pad>", "<unk>"};
  v.df_ = {0, 0};
  for (auto& [tok, count] : ranked) {
    v.tokens_.push_back(tok);
    v.df_.push_back(count);
  }
  v.reindex();
  return v;
}

void Vocabulary::reindex()
{
  index_.clear();
  for (std::size_t i = 2; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const
{
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::lookup(std::string_view token) const
{
  return find(token).value_or(kUnk);
}

double Vocabulary::idf(std::size_t index) const
{
  const double n = static_cast<double>(n_docs_);
  return std::log((1.0 + n) / (1.0 + static_cast<double>(df_.at(index)))) + 1.0;
}

void Vocabulary::save(std::ostream& out) const
{
  fmt::print(out, "mcdrop-vocab 1 {} {}\n", n_docs_, tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) fmt::print(out, "{}\t{}\n", tokens_[i], df_[i]);
}

Vocabulary Vocabulary::load(std::istream& in)
{
  std::string magic;
  int version = 0;
  std::size_t n_docs = 0, count = 0;
  if (!(in >> magic >> version >> n_docs >> count) || magic != "mcdrop-vocab" || version != 1)
    throw InputError("vocabulary: bad header");
  in.ignore(1);
  Vocabulary v;
  v.n_docs_ = n_docs;
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw InputError("vocabulary: truncated");
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("vocabulary: malformed line '" + line + "'");
    v.tokens_.push_back(line.substr(0, tab));
    v.df_.push_back(std::stoul(line.substr(tab + 1)));
  }
  if (v.tokens_.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>")
    throw InputError("vocabulary: missing special tokens");
  v.reindex();
  return v;
}

std::vector<double> SparseRow::dense(std::size_t width) const
{
  std::vector<double> out(width, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) out.at(index[i]) = value[i];
  return out;
}

double SparseRow::squared_norm() const
{
  double s = 0.0;
  for (double v : value) s += v * v;
  return s;
}

SparseMatrix tfidf(std::span<const std::vector<std::string>> docs, const Vocabulary& vocab)
{
  if (vocab.size() <= 2) throw InputError("tfidf: empty vocabulary");
  SparseMatrix m;
  m.cols = vocab.size();
  m.rows.reserve(docs.size());
  for (const auto& doc : docs) {
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : doc)
      if (auto idx = vocab.find(tok)) counts[static_cast<std::uint32_t>(*idx)] += 1.0;
    SparseRow row;
    double sq = 0.0;
    for (auto [idx, count] : counts) {
      const double w = count * vocab.idf(idx);
      row.index.push_back(idx);
      row.value.push_back(w);
      sq += w * w;
    }
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (double& v : row.value) v /= norm;
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::vector<std::size_t> token_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                   std::size_t max_len)
{
  std::vector<std::size_t> ids;
  for (const auto& tok : tokens) {
    if (ids.size() >= max_len) break;
    ids.push_back(vocab.lookup(tok));
  }
  if (ids.empty()) ids.push_back(Vocabulary::kPad);
  return ids;
}

}  // namespace mcdrop
