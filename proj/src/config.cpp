#include "mcdrop/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "mcdrop/error.hpp"

namespace mcdrop {

namespace {

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Field
{
  std::string section, key;
  std::string_view source;

  [[noreturn]] void fail(std::string_view what, std::string_view value) const
  {
    throw InputError(fmt::format("{}: [{}] {} = '{}': {}", source, section, key, value, what));
  }
};

std::size_t to_size(const Field& f, std::string_view v)
{
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) f.fail("expected a non-negative integer", v);
  return out;
}

std::uint64_t to_u64(const Field& f, std::string_view v)
{
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) f.fail("expected an unsigned integer", v);
  return out;
}

double to_double(const Field& f, std::string_view v)
{
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) f.fail("expected a number", v);
  return out;
}

bool to_bool(const Field& f, std::string_view v)
{
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  f.fail("expected true or false", v);
}

template <class T, class Conv>
std::vector<T> to_list(const Field& f, std::string_view v, Conv conv)
{
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto end = comma == std::string_view::npos ? v.size() : comma;
    const std::string item = trim(v.substr(start, end - start));
    if (item.empty()) f.fail("empty list element", v);
    out.push_back(conv(f, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class Fn>
auto wrap_parse(const Field& f, std::string_view v, Fn fn)
{
  try {
    return fn(v);
  } catch (const InputError& e) {
    f.fail(e.what(), v);
  }
}

using Setter = std::function<void(RunConfig&, const Field&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters()
{
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"corpus",
       {
           {"path", [](RunConfig& c, const Field&, const std::string& v) { c.corpus = v; }},
           {"mode",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.model.mode = wrap_parse(f, v, parse_input_mode);
            }},
           {"max_len", [](RunConfig& c, const Field& f, const std::string& v) { c.max_len = to_size(f, v); }},
           {"vocab_cap", [](RunConfig& c, const Field& f, const std::string& v) { c.vocab_cap = to_size(f, v); }},
       }},
      {"model",
       {
           {"units", [](RunConfig& c, const Field& f, const std::string& v) { c.model.units = to_size(f, v); }},
           {"dropout", [](RunConfig& c, const Field& f, const std::string& v) { c.model.dropout = to_double(f, v); }},
           {"recurrent_dropout",
            [](RunConfig& c, const Field& f, const std::string& v) { c.model.recurrent_dropout = to_double(f, v); }},
           {"dense_dropout",
            [](RunConfig& c, const Field& f, const std::string& v) { c.model.dense_dropout = to_double(f, v); }},
           {"embedding_dim",
            [](RunConfig& c, const Field& f, const std::string& v) { c.model.embedding_dim = to_size(f, v); }},
           {"activation",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.model.activation = wrap_parse(f, v, parse_activation);
            }},
       }},
      {"train",
       {
           {"optimizer",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.train.optimizer = wrap_parse(f, v, parse_optimizer);
            }},
           {"learning_rate",
            [](RunConfig& c, const Field& f, const std::string& v) { c.train.learning_rate = to_double(f, v); }},
           {"batch_size", [](RunConfig& c, const Field& f, const std::string& v) { c.train.batch_size = to_size(f, v); }},
           {"epochs", [](RunConfig& c, const Field& f, const std::string& v) { c.train.epochs = to_size(f, v); }},
           {"clip_norm", [](RunConfig& c, const Field& f, const std::string& v) { c.train.clip_norm = to_double(f, v); }},
       }},
      {"mcd",
       {
           {"samples", [](RunConfig& c, const Field& f, const std::string& v) { c.samples = to_size(f, v); }},
       }},
      {"eval",
       {
           {"folds", [](RunConfig& c, const Field& f, const std::string& v) { c.folds = to_size(f, v); }},
           {"stratified", [](RunConfig& c, const Field& f, const std::string& v) { c.stratified = to_bool(f, v); }},
       }},
      {"run",
       {
           {"seed", [](RunConfig& c, const Field& f, const std::string& v) { c.seed = to_u64(f, v); }},
           {"out", [](RunConfig& c, const Field&, const std::string& v) { c.out = v; }},
           {"checkpoints", [](RunConfig& c, const Field& f, const std::string& v) { c.checkpoints = to_bool(f, v); }},
       }},
      {"logreg",
       {
           {"l2", [](RunConfig& c, const Field& f, const std::string& v) { c.logreg.l2 = to_double(f, v); }},
           {"epochs", [](RunConfig& c, const Field& f, const std::string& v) { c.logreg.epochs = to_size(f, v); }},
           {"learning_rate",
            [](RunConfig& c, const Field& f, const std::string& v) { c.logreg.learning_rate = to_double(f, v); }},
       }},
      {"viz",
       {
           {"k_nn", [](RunConfig& c, const Field& f, const std::string& v) { c.viz.k_nn = to_size(f, v); }},
           {"epochs", [](RunConfig& c, const Field& f, const std::string& v) { c.viz.layout.epochs = to_size(f, v); }},
           {"negative_samples",
            [](RunConfig& c, const Field& f, const std::string& v) { c.viz.layout.negative_samples = to_size(f, v); }},
           {"min_dist", [](RunConfig& c, const Field& f, const std::string& v) { c.viz.layout.min_dist = to_double(f, v); }},
           {"learning_rate",
            [](RunConfig& c, const Field& f, const std::string& v) { c.viz.layout.learning_rate = to_double(f, v); }},
           {"grid", [](RunConfig& c, const Field& f, const std::string& v) { c.viz.grid = to_size(f, v); }},
           {"contours", [](RunConfig& c, const Field& f, const std::string& v) { c.viz.contours = to_size(f, v); }},
       }},
      {"search",
       {
           {"budget", [](RunConfig& c, const Field& f, const std::string& v) { c.search.budget = to_size(f, v); }},
           {"holdout", [](RunConfig& c, const Field& f, const std::string& v) { c.search_holdout = to_double(f, v); }},
           {"samples", [](RunConfig& c, const Field& f, const std::string& v) { c.search_samples = to_size(f, v); }},
           {"optimizers",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.search.optimizers = to_list<OptimizerKind>(f, v, [](const Field& ff, std::string_view s) {
                return wrap_parse(ff, s, parse_optimizer);
              });
            }},
           {"batch_sizes",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.search.batch_sizes = to_list<std::size_t>(f, v, to_size);
            }},
           {"activations",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.search.activations = to_list<Activation>(f, v, [](const Field& ff, std::string_view s) {
                return wrap_parse(ff, s, parse_activation);
              });
            }},
           {"epochs",
            [](RunConfig& c, const Field& f, const std::string& v) { c.search.epochs = to_list<std::size_t>(f, v, to_size); }},
           {"units",
            [](RunConfig& c, const Field& f, const std::string& v) { c.search.units = to_list<std::size_t>(f, v, to_size); }},
           {"dropout_rates",
            [](RunConfig& c, const Field& f, const std::string& v) {
              c.search.dropout_rates = to_list<double>(f, v, to_double);
            }},
       }},
  };
  return table;
}

template <class T>
std::string join(const std::vector<T>& xs)
{
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_enum_v<T>) out += to_string(xs[i]);
    else out += fmt::format("{}", xs[i]);
  }
  return out;
}

}  // namespace

void RunConfig::validate() const
{
  ModelConfig probe = model;
  probe.input_dim = 1;  // set per fold from the vocabulary
  probe.validate();
  if (corpus.empty()) throw InputError("config: [corpus] path is required");
  if (!std::filesystem::is_regular_file(corpus))
    throw InputError(fmt::format("cannot open corpus file '{}'", corpus.string()));
  if (max_len == 0) throw InputError("config: max_len must be positive");
  if (vocab_cap == 0) throw InputError("config: vocab_cap must be positive");
  if (train.batch_size == 0) throw InputError("config: batch_size must be positive");
  if (!(train.learning_rate > 0.0)) throw InputError("config: learning_rate must be positive");
  if (samples == 0) throw InputError("config: [mcd] samples must be positive");
  if (folds < 2) throw InputError("config: folds must be at least 2");
  if (viz.grid < 2) throw InputError("config: [viz] grid must be at least 2");
  if (viz.k_nn == 0) throw InputError("config: [viz] k_nn must be positive");
  if (!(search_holdout > 0.0 && search_holdout < 1.0))
    throw InputError("config: [search] holdout must be in (0, 1)");
  if (search_samples == 0) throw InputError("config: [search] samples must be positive");
  search.validate();
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                       std::string_view source)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(fmt::format("{}: line {}: {}", source, e.line(), e.message()));
  }

  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [section, keys] : tree) {
    if (section == "manifest") continue;
    if (keys.empty() && !keys.data().empty())
      throw InputError(fmt::format("{}: key '{}' outside of a section", source, section));
    const auto sec = table.find(section);
    if (sec == table.end()) throw InputError(fmt::format("{}: unknown section [{}]", source, section));
    for (const auto& [key, node] : keys) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end())
        throw InputError(fmt::format("{}: unknown key '{}' in [{}]", source, key, section));
      it->second(cfg, Field{section, key, source}, trim(node.data()));
    }
  }
  if (!cfg.corpus.empty() && cfg.corpus.is_relative()) cfg.corpus = base_dir / cfg.corpus;
  if (cfg.out.is_relative()) cfg.out = base_dir / cfg.out;
  cfg.corpus = cfg.corpus.lexically_normal();
  cfg.out = cfg.out.lexically_normal();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open config file '{}'", path.string()));
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(in, base, path.string());
}

void write_config(std::ostream& out, const RunConfig& c)
{
  const auto abs = [](const std::filesystem::path& p) {
    return std::filesystem::absolute(p).lexically_normal().string();
  };
  fmt::print(out, "[corpus]\npath = {}\nmode = {}\nmax_len = {}\nvocab_cap = {}\n\n", abs(c.corpus),
             to_string(c.model.mode), c.max_len, c.vocab_cap);
  fmt::print(out,
             "[model]\nunits = {}\ndropout = {}\nrecurrent_dropout = {}\ndense_dropout = {}\n"
             "embedding_dim = {}\nactivation = {}\n\n",
             c.model.units, c.model.dropout, c.model.recurrent_dropout, c.model.dense_dropout,
             c.model.embedding_dim, to_string(c.model.activation));
  fmt::print(out,
             "[train]\noptimizer = {}\nlearning_rate = {}\nbatch_size = {}\nepochs = {}\nclip_norm = {}\n\n",
             to_string(c.train.optimizer), c.train.learning_rate, c.train.batch_size, c.train.epochs,
             c.train.clip_norm);
  fmt::print(out, "[mcd]\nsamples = {}\n\n", c.samples);
  fmt::print(out, "[eval]\nfolds = {}\nstratified = {}\n\n", c.folds, c.stratified);
  fmt::print(out, "[run]\nseed = {}\nout = {}\ncheckpoints = {}\n\n", c.seed, abs(c.out), c.checkpoints);
  fmt::print(out, "[logreg]\nl2 = {}\nepochs = {}\nlearning_rate = {}\n\n", c.logreg.l2,
             c.logreg.epochs, c.logreg.learning_rate);
  fmt::print(out,
             "[viz]\nk_nn = {}\nepochs = {}\nnegative_samples = {}\nmin_dist = {}\nlearning_rate = {}\n"
             "grid = {}\ncontours = {}\n\n",
             c.viz.k_nn, c.viz.layout.epochs, c.viz.layout.negative_samples, c.viz.layout.min_dist,
             c.viz.layout.learning_rate, c.viz.grid, c.viz.contours);
  fmt::print(out,
             "[search]\nbudget = {}\nholdout = {}\nsamples = {}\noptimizers = {}\nbatch_sizes = {}\n"
             "activations = {}\nepochs = {}\nunits = {}\ndropout_rates = {}\n",
             c.search.budget, c.search_holdout, c.search_samples, join(c.search.optimizers),
             join(c.search.batch_sizes), join(c.search.activations), join(c.search.epochs),
             join(c.search.units), join(c.search.dropout_rates));
}

}  // namespace mcdrop
