#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcdrop/error.hpp"
#include "mcdrop/layers.hpp"

namespace mcdrop {

namespace {

constexpr std::string_view kMagic = "mcdrop-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) { return fmt::format("{:a}", v); }

double parse_hex(const std::string& s)
{
  // fmt writes "0x1.8p+0"; from_chars(hex) expects no prefix.
  std::string_view body = s;
  bool negative = false;
  if (!body.empty() && body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  if (body.starts_with("0x") || body.starts_with("0X")) body.remove_prefix(2);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != body.data() + body.size())
    throw InputError("checkpoint: bad numeric value '" + s + "'");
  return negative ? -v : v;
}

template <typename T>
T expect_field(std::istream& in, std::string_view key)
{
  std::string name;
  T value{};
  if (!(in >> name) || name != key || !(in >> value))
    throw InputError("checkpoint: expected field '" + std::string(key) + "'");
  return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const ModelParameters& params)
{
  const ModelConfig& c = params.config;
  fmt::print(out, "{} {}\n", kMagic, kVersion);
  fmt::print(out, "mode {}\ninput_dim {}\nunits {}\n", to_string(c.mode), c.input_dim, c.units);
  fmt::print(out, "dropout {}\nrecurrent_dropout {}\ndense_dropout {}\n", hex(c.dropout),
             hex(c.recurrent_dropout), hex(c.dense_dropout));
  fmt::print(out, "embedding_dim {}\nactivation {}\n", c.embedding_dim, to_string(c.activation));
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const Tensor& t = params.tensors[i];
    fmt::print(out, "tensor {} {}", slot_name(i), t.empty() ? 0 : t.rank());
    if (!t.empty())
      for (std::size_t d : t.shape()) fmt::print(out, " {}", d);
    out << '\n';
    for (std::size_t j = 0; j < t.size(); ++j) {
      out << hex(t[j]);
      out << ((j + 1) % 8 == 0 || j + 1 == t.size() ? '\n' : ' ');
    }
  }
  out << "end\n";
  if (!out) throw InputError("checkpoint: write failed");
}

ModelParameters load_checkpoint(std::istream& in)
{
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw InputError("checkpoint: missing header");
  if (version != kVersion)
    throw InputError("checkpoint: unsupported version " + std::to_string(version));

  ModelParameters p;
  ModelConfig& c = p.config;
  c.mode = parse_input_mode(expect_field<std::string>(in, "mode"));
  c.input_dim = expect_field<std::size_t>(in, "input_dim");
  c.units = expect_field<std::size_t>(in, "units");
  c.dropout = parse_hex(expect_field<std::string>(in, "dropout"));
  c.recurrent_dropout = parse_hex(expect_field<std::string>(in, "recurrent_dropout"));
  c.dense_dropout = parse_hex(expect_field<std::string>(in, "dense_dropout"));
  c.embedding_dim = expect_field<std::size_t>(in, "embedding_dim");
  c.activation = parse_activation(expect_field<std::string>(in, "activation"));
  c.validate();

  for (std::size_t i = 0; i < kSlotCount; ++i) {
    std::string tag, name;
    std::size_t rank = 0;
    if (!(in >> tag >> name >> rank) || tag != "tensor" || name != slot_name(i))
      throw InputError("checkpoint: expected tensor '" + std::string(slot_name(i)) + "'");
    if (rank == 0) continue;
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape)
      if (!(in >> d)) throw InputError("checkpoint: bad shape for " + name);
    Tensor t(shape);
    std::string token;
    for (double& v : t.data()) {
      if (!(in >> token)) throw InputError("checkpoint: truncated tensor " + name);
      v = parse_hex(token);
    }
    p.tensors[i] = std::move(t);
  }
  std::string end;
  if (!(in >> end) || end != "end") throw InputError("checkpoint: missing end marker");

  // Shapes must agree with the declared config.
  const ModelParameters expected = ModelParameters::initialize(c, 0);
  for (std::size_t i = 0; i < kSlotCount; ++i)
    if (expected.tensors[i].shape() != p.tensors[i].shape())
      throw InputError("checkpoint: tensor " + std::string(slot_name(i)) + " has shape " +
                       shape_str(p.tensors[i].shape()) + ", config implies " +
                       expected.tensors[i].shape_str());
  return p;
}

}  // namespace mcdrop
