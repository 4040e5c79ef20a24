#include "sgn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgn/errors.hpp"

namespace sgn {
namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

SpectralBranch parse_branch(const std::string& s) {
  if (s == "gated") return SpectralBranch::Gated;
  if (s == "ungated") return SpectralBranch::Ungated;
  if (s == "fixed") return SpectralBranch::FixedGate;
  if (s == "pure") return SpectralBranch::PureSpectral;
  throw ParameterError("checkpoint: unknown branch '" + s + "'");
}

std::string branch_name(SpectralBranch b) {
  switch (b) {
    case SpectralBranch::Gated: return "gated";
    case SpectralBranch::Ungated: return "ungated";
    case SpectralBranch::FixedGate: return "fixed";
    case SpectralBranch::PureSpectral: return "pure";
  }
  return "gated";
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw ParameterError("base64: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw ParameterError("base64: data after padding");
      q[k] = decode_char(c);
      if (q[k] < 0) throw ParameterError("base64: invalid character");
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string encode_doubles(std::span<const double> values) {
  std::vector<std::uint8_t> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % 8 != 0) throw ParameterError("checkpoint: payload not a multiple of 8 bytes");
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[i * 8 + b]} << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

std::string checkpoint_to_json(const SgnParams& params, const InitConfig& init) {
  SgnParams copy = params;
  json doc;
  doc["format"] = "sgn-checkpoint";
  doc["version"] = 1;
  json cfg;
  if (params.d_in() == params.d_out()) cfg["d_model"] = params.d_in();
  cfg["d_in"] = params.d_in();
  cfg["d_out"] = params.d_out();
  cfg["d_ff"] = params.d_ff();
  cfg["m"] = params.budget();
  cfg["sigma"] = init.sigma;
  cfg["eps"] = init.eps;
  cfg["gate_bias_init"] = init.gate_bias;
  cfg["activation"] = std::string(to_string(params.activation));
  cfg["branch"] = branch_name(params.branch);
  cfg["seed"] = init.seed;
  doc["config"] = cfg;
  json blocks = json::array();
  for (const auto& b : param_blocks(copy)) {
    blocks.push_back({{"name", std::string(b.name)},
                      {"rows", b.rows},
                      {"cols", b.cols},
                      {"dtype", "f64le"},
                      {"data", encode_doubles(b.values)}});
  }
  doc["blocks"] = blocks;
  return doc.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format", "") != "sgn-checkpoint") {
    throw ParameterError("checkpoint: not an sgn-checkpoint document");
  }
  const json& cfg = doc.at("config");
  const std::size_t d_in = cfg.at("d_in");
  const std::size_t d_out = cfg.at("d_out");
  const std::size_t d_ff = cfg.at("d_ff");
  const std::size_t m = cfg.at("m");

  Checkpoint ck;
  ck.init.sigma = cfg.at("sigma");
  ck.init.eps = cfg.at("eps");
  ck.init.gate_bias = cfg.at("gate_bias_init");
  ck.init.seed = cfg.at("seed");
  ck.init.activation = parse_activation(cfg.at("activation").get<std::string>());

  SgnParams& p = ck.params;
  p.activation = ck.init.activation;
  p.branch = parse_branch(cfg.value("branch", "gated"));
  p.w1 = DenseMatrix(d_ff, d_in);
  p.b1.assign(d_ff, 0.0);
  p.rff.wr = DenseMatrix(d_ff, m);
  p.rff.br.assign(m, 0.0);
  p.rff.scale = RffScale::Layer;
  p.ar = DenseMatrix(2 * m, d_ff);
  p.wg.assign(d_ff, 0.0);
  p.bg.assign(d_ff, 0.0);
  p.ln_gamma.assign(d_ff, 0.0);
  p.ln_beta.assign(d_ff, 0.0);
  p.w2 = DenseMatrix(d_out, d_ff);
  p.b2.assign(d_out, 0.0);

  auto targets = param_blocks(p);
  const json& blocks = doc.at("blocks");
  if (blocks.size() != targets.size()) throw ShapeError("checkpoint: wrong number of blocks");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const json& b = blocks[i];
    const std::string name = b.at("name");
    const std::size_t rows = b.at("rows");
    const std::size_t cols = b.at("cols");
    if (name != targets[i].name || rows != targets[i].rows || cols != targets[i].cols) {
      throw ShapeError("checkpoint: block '" + name + "' has unexpected name or shape");
    }
    const auto values = decode_doubles(b.at("data"));
    if (values.size() != targets[i].values.size()) {
      throw ShapeError("checkpoint: block '" + name + "' payload length mismatch");
    }
    std::copy(values.begin(), values.end(), targets[i].values.begin());
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const SgnParams& params,
                     const InitConfig& init) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(params, init);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

std::map<std::string, std::size_t> checkpoint_block_sizes(const std::string& text) {
  const json doc = json::parse(text);
  std::map<std::string, std::size_t> sizes;
  for (const auto& b : doc.at("blocks")) {
    sizes[b.at("name").get<std::string>()] =
        b.at("rows").get<std::size_t>() * b.at("cols").get<std::size_t>();
  }
  return sizes;
}

}  // namespace sgn
