#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mcdrop/graph.hpp"
#include "mcdrop/layers.hpp"
#include "mcdrop/random.hpp"

namespace mcdrop::testing {

inline std::filesystem::path source_dir() { return MCDROP_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("mcdrop-test-{}", name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CommandResult
{
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr captured together.
inline CommandResult run_cli(const std::string& args, const std::filesystem::path& log)
{
  const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", MCDROP_CLI, args, log.string());
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(log);
  return r;
}

inline double relative_error(double a, double b)
{
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Central finite differences of f with respect to every entry of `t`.
inline std::vector<double> numeric_gradient(Tensor& t, const std::function<double()>& f, double step = 1e-5)
{
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double saved = t[i];
    t[i] = saved + step;
    const double up = f();
    t[i] = saved - step;
    const double down = f();
    t[i] = saved;
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

inline Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0)
{
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

// BCE loss of one LSTM pass with fixed masks; fills grads when given.
inline double lstm_loss(const ModelParameters& params, const FeatureSequence& x, int label,
                        const MaskSet& masks, ParameterGrads* grads = nullptr)
{
  Graph g;
  const Var p = lstm_forward(g, x, params, masks, grads);
  const Var loss = bce_loss(g, p, label);
  if (grads) g.backward(loss);
  return g.value(loss)[0];
}

// Max relative error between analytic and finite-difference gradients over
// every parameter slot. Entries whose gradients are both tiny are skipped
// from the relative measure, since cancellation there dominates.
inline double lstm_gradient_error(ModelParameters& params, const FeatureSequence& x, int label,
                                  const MaskSet& masks)
{
  ParameterGrads grads = zero_grads(params);
  lstm_loss(params, x, label, masks, &grads);
  double worst = 0.0;
  for (std::size_t s = 0; s < kSlotCount; ++s) {
    Tensor& t = params.tensors[s];
    if (t.empty()) continue;
    const auto num = numeric_gradient(t, [&] { return lstm_loss(params, x, label, masks); });
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double a = grads[s][i], n = num[i];
      if (std::abs(a) < 1e-7 && std::abs(n) < 1e-7) continue;
      worst = std::max(worst, relative_error(a, n));
    }
  }
  return worst;
}

// Glyph elements in a rendered SVG: element name, data-id, data-outcome.
struct Glyph
{
  std::string element;
  long long id = 0;
  std::string outcome;
};

inline std::vector<Glyph> parse_glyphs(const std::string& svg)
{
  static const std::regex tag(R"re(<(\w+) [^>]*class="glyph" data-id="(-?\d+)" data-outcome="(\w+)")re");
  std::vector<Glyph> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag); it != std::sregex_iterator(); ++it)
    out.push_back({(*it)[1].str(), std::stoll((*it)[2].str()), (*it)[3].str()});
  return out;
}

}  // namespace mcdrop::testing
