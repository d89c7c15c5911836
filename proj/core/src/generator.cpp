#include "ganinv/generator.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "ganinv/errors.hpp"
#include "ganinv/rng.hpp"

namespace ganinv {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "GENNET v1 ";
constexpr std::size_t kDcganBaseChannels = 32;
constexpr std::size_t kDcganMidChannels = 16;
constexpr double kConvStddev = 0.02;

AffineLayer random_affine(std::size_t in, std::size_t out, Rng& rng) {
  AffineLayer l;
  l.in = in;
  l.out = out;
  l.weight.resize(in * out);
  l.bias.assign(out, 0.0);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
  for (auto& w : l.weight) w = dist(rng);
  return l;
}

TransposedConv2dLayer random_tconv(std::size_t in_c, std::size_t out_c,
                                   std::size_t h, std::size_t w, Rng& rng) {
  constexpr std::size_t K = TransposedConv2dLayer::kernel_size;
  TransposedConv2dLayer l;
  l.in_channels = in_c;
  l.out_channels = out_c;
  l.in_height = h;
  l.in_width = w;
  l.kernel.resize(in_c * out_c * K * K);
  l.bias.assign(out_c, 0.0);
  std::normal_distribution<double> dist(0.0, kConvStddev);
  for (auto& k : l.kernel) k = dist(rng);
  return l;
}

void put_le64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le64(std::string_view in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

void put_doubles(std::string& out, const std::vector<double>& values) {
  for (double d : values) put_le64(out, std::bit_cast<std::uint64_t>(d));
}

json layer_metadata(const Layer& layer) {
  if (const auto* a = std::get_if<AffineLayer>(&layer)) {
    return {{"kind", "affine"}, {"in", a->in}, {"out", a->out}};
  }
  if (const auto* c = std::get_if<TransposedConv2dLayer>(&layer)) {
    return {{"kind", "transposed_conv2d"},
            {"in_channels", c->in_channels},
            {"out_channels", c->out_channels},
            {"in_height", c->in_height},
            {"in_width", c->in_width},
            {"kernel", TransposedConv2dLayer::kernel_size},
            {"stride", TransposedConv2dLayer::stride},
            {"padding", TransposedConv2dLayer::padding}};
  }
  const auto& act = std::get<ActivationLayer>(layer);
  return {{"kind", to_string(act.fn)}, {"size", act.size}};
}

json spec_metadata(const GeneratorSpec& spec) {
  return {{"architecture", to_string(spec.architecture)},
          {"latent_dim", spec.latent_dim},
          {"hidden_sizes", spec.hidden_sizes},
          {"hidden_activation", to_string(spec.hidden_activation)},
          {"output_shape", {spec.output_shape.channels, spec.output_shape.height,
                            spec.output_shape.width}},
          {"seed", spec.seed}};
}

// Field accessors that report the JSON path on failure.
const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(path + key, "missing");
  }
  return obj.at(key);
}

std::size_t size_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    throw FormatError(path + key, "expected a positive integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t u64_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_unsigned()) throw FormatError(path + key, "expected an unsigned integer");
  return v.get<std::uint64_t>();
}

std::string string_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw FormatError(path + key, "expected a string");
  return v.get<std::string>();
}

Shape shape_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_array() || v.size() != 3) throw FormatError(path + key, "expected [c,h,w]");
  std::size_t e[3];
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number_unsigned() || v[i].get<std::uint64_t>() == 0) {
      throw FormatError(path + key, "expected positive extents");
    }
    e[i] = v[i].get<std::size_t>();
  }
  return Shape{e[0], e[1], e[2]};
}

GeneratorSpec parse_spec(const json& meta) {
  const std::string p = "spec.";
  GeneratorSpec spec;
  try {
    spec.architecture = parse_architecture(string_field(meta, "architecture", p));
  } catch (const InputError& e) {
    throw FormatError(p + "architecture", e.what());
  }
  spec.latent_dim = size_field(meta, "latent_dim", p);
  const json& hidden = field(meta, "hidden_sizes", p);
  if (!hidden.is_array()) throw FormatError(p + "hidden_sizes", "expected an array");
  for (const auto& h : hidden) {
    if (!h.is_number_unsigned() || h.get<std::uint64_t>() == 0) {
      throw FormatError(p + "hidden_sizes", "expected positive integers");
    }
    spec.hidden_sizes.push_back(h.get<std::size_t>());
  }
  try {
    spec.hidden_activation = parse_activation(string_field(meta, "hidden_activation", p));
  } catch (const InputError& e) {
    throw FormatError(p + "hidden_activation", e.what());
  }
  spec.output_shape = shape_field(meta, "output_shape", p);
  spec.seed = u64_field(meta, "seed", p);
  return spec;
}

// Takes `count` doubles from the payload cursor.
std::vector<double> take(std::string_view payload, std::size_t& cursor, std::size_t count,
                         const std::string& where) {
  if (count > (payload.size() - cursor) / 8) {
    throw FormatError(where, "payload ends before " + std::to_string(count) +
                                 " values could be read");
  }
  std::vector<double> out(count);
  for (auto& d : out) {
    d = std::bit_cast<double>(get_le64(payload, cursor));
    cursor += 8;
  }
  return out;
}

Layer parse_layer(const json& meta, std::size_t index, std::string_view payload,
                  std::size_t& cursor) {
  const std::string p = "layers[" + std::to_string(index) + "].";
  const std::string kind = string_field(meta, "kind", p);
  if (kind == "affine") {
    AffineLayer l;
    l.in = size_field(meta, "in", p);
    l.out = size_field(meta, "out", p);
    l.weight = take(payload, cursor, l.in * l.out, p + "weight");
    l.bias = take(payload, cursor, l.out, p + "bias");
    return l;
  }
  if (kind == "transposed_conv2d") {
    constexpr std::size_t K = TransposedConv2dLayer::kernel_size;
    if (size_field(meta, "kernel", p) != K) throw FormatError(p + "kernel", "only 4 is supported");
    if (size_field(meta, "stride", p) != TransposedConv2dLayer::stride) {
      throw FormatError(p + "stride", "only 2 is supported");
    }
    if (u64_field(meta, "padding", p) != TransposedConv2dLayer::padding) {
      throw FormatError(p + "padding", "only 1 is supported");
    }
    TransposedConv2dLayer l;
    l.in_channels = size_field(meta, "in_channels", p);
    l.out_channels = size_field(meta, "out_channels", p);
    l.in_height = size_field(meta, "in_height", p);
    l.in_width = size_field(meta, "in_width", p);
    l.kernel = take(payload, cursor, l.in_channels * l.out_channels * K * K, p + "kernel");
    l.bias = take(payload, cursor, l.out_channels, p + "bias");
    return l;
  }
  if (kind == "tanh" || kind == "relu") {
    return ActivationLayer{parse_activation(kind), size_field(meta, "size", p)};
  }
  throw FormatError(p + "kind", "unknown layer kind '" + kind + "'");
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

std::string to_string(Architecture a) {
  return a == Architecture::mlp ? "mlp" : "dcgan_small";
}

Activation parse_activation(const std::string& text) {
  if (text == "tanh") return Activation::tanh;
  if (text == "relu") return Activation::relu;
  throw InputError("unknown activation '" + text + "' (expected tanh or relu)");
}

Architecture parse_architecture(const std::string& text) {
  if (text == "mlp") return Architecture::mlp;
  if (text == "dcgan_small" || text == "dcgan-small") return Architecture::dcgan_small;
  throw InputError("unknown architecture '" + text + "' (expected mlp or dcgan_small)");
}

GeneratorSpec reference_mlp_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.architecture = Architecture::mlp;
  spec.latent_dim = 100;
  spec.hidden_sizes = {128};
  spec.hidden_activation = Activation::tanh;
  spec.output_shape = Shape{1, 16, 16};
  spec.seed = seed;
  return spec;
}

GeneratorSpec reference_dcgan_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.architecture = Architecture::dcgan_small;
  spec.latent_dim = 100;
  spec.output_shape = Shape{1, 16, 16};
  spec.seed = seed;
  return spec;
}

void validate(const GeneratorSpec& spec) {
  if (spec.latent_dim < 1) throw ConfigError("latent_dim must be at least 1");
  const Shape& s = spec.output_shape;
  if (s.size() == 0) throw ConfigError("output_shape must have positive extents");
  if (s.channels != 1) throw ConfigError("output_shape: only 1 channel is supported");
  if (s.size() < spec.latent_dim) {
    throw ConfigError("output size " + std::to_string(s.size()) +
                      " is smaller than latent_dim " + std::to_string(spec.latent_dim));
  }
  for (std::size_t h : spec.hidden_sizes) {
    if (h == 0) throw ConfigError("hidden_sizes entries must be positive");
  }
  if (spec.architecture == Architecture::dcgan_small) {
    if (!spec.hidden_sizes.empty()) {
      throw ConfigError("hidden_sizes applies to mlp only");
    }
    if (s.height % 4 != 0 || s.width % 4 != 0) {
      throw ConfigError("dcgan_small needs height and width divisible by 4, got " +
                        to_string(s));
    }
  }
}

GeneratorNetwork build(const GeneratorSpec& spec) {
  validate(spec);
  Rng rng = derive_stream(spec.seed, 0, StreamPurpose::weights);
  std::vector<Layer> layers;
  const Shape& out = spec.output_shape;
  if (spec.architecture == Architecture::mlp) {
    std::size_t width = spec.latent_dim;
    for (std::size_t h : spec.hidden_sizes) {
      layers.emplace_back(random_affine(width, h, rng));
      layers.emplace_back(ActivationLayer{spec.hidden_activation, h});
      width = h;
    }
    layers.emplace_back(random_affine(width, out.size(), rng));
    layers.emplace_back(ActivationLayer{Activation::tanh, out.size()});
  } else {
    const std::size_t h4 = out.height / 4, w4 = out.width / 4;
    const std::size_t base = kDcganBaseChannels * h4 * w4;
    layers.emplace_back(random_affine(spec.latent_dim, base, rng));
    layers.emplace_back(ActivationLayer{Activation::relu, base});
    auto up1 = random_tconv(kDcganBaseChannels, kDcganMidChannels, h4, w4, rng);
    const std::size_t mid = output_size(Layer{up1});
    layers.emplace_back(std::move(up1));
    layers.emplace_back(ActivationLayer{Activation::relu, mid});
    layers.emplace_back(random_tconv(kDcganMidChannels, out.channels, h4 * 2, w4 * 2, rng));
    layers.emplace_back(ActivationLayer{Activation::tanh, out.size()});
  }
  return GeneratorNetwork(std::move(layers), out, spec.seed, spec);
}

double weight_fingerprint(const GeneratorNetwork& net) {
  double sum = 0.0;
  for (const Layer& layer : net.layers()) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      for (double w : a->weight) sum += w;
      for (double b : a->bias) sum += b;
    } else if (const auto* c = std::get_if<TransposedConv2dLayer>(&layer)) {
      for (double k : c->kernel) sum += k;
      for (double b : c->bias) sum += b;
    }
  }
  return sum;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string serialize(const GeneratorNetwork& net) {
  json meta;
  meta["latent_dim"] = net.latent_dim();
  const Shape& s = net.output_shape();
  meta["output_shape"] = {s.channels, s.height, s.width};
  meta["seed"] = net.seed();
  meta["spec"] = net.spec() ? spec_metadata(*net.spec()) : json(nullptr);
  json layers = json::array();
  std::string payload;
  for (const Layer& layer : net.layers()) {
    layers.push_back(layer_metadata(layer));
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      put_doubles(payload, a->weight);
      put_doubles(payload, a->bias);
    } else if (const auto* c = std::get_if<TransposedConv2dLayer>(&layer)) {
      put_doubles(payload, c->kernel);
      put_doubles(payload, c->bias);
    }
  }
  meta["layers"] = std::move(layers);
  meta["payload_bytes"] = payload.size();

  std::string out(kMagic);
  out += meta.dump();
  out.push_back('\n');
  out += payload;
  put_le64(out, fnv1a64({reinterpret_cast<const unsigned char*>(payload.data()),
                         payload.size()}));
  return out;
}

GeneratorNetwork deserialize(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, 7) != "GENNET ") {
    throw FormatError("magic", "not a GENNET file");
  }
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    const auto stop = bytes.find_first_of(" \n", 7);
    throw FormatError("version", "unsupported version '" +
                                     std::string(bytes.substr(7, stop - 7)) +
                                     "' (expected v1)");
  }
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw FormatError("header", "missing newline");

  json meta;
  try {
    meta = json::parse(bytes.substr(kMagic.size(), newline - kMagic.size()));
  } catch (const json::parse_error& e) {
    throw FormatError("header", std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!meta.is_object()) throw FormatError("header", "metadata must be a JSON object");

  const std::string_view body = bytes.substr(newline + 1);
  if (body.size() < 8) throw FormatError("checksum", "file truncated before checksum");
  const std::string_view payload = body.substr(0, body.size() - 8);
  const std::size_t declared = u64_field(meta, "payload_bytes", "");
  if (declared != payload.size()) {
    throw FormatError("payload_bytes", "header declares " + std::to_string(declared) +
                                           " bytes, file holds " +
                                           std::to_string(payload.size()));
  }
  const std::uint64_t stored = get_le64(body, payload.size());
  const std::uint64_t actual = fnv1a64(
      {reinterpret_cast<const unsigned char*>(payload.data()), payload.size()});
  if (stored != actual) throw FormatError("checksum", "payload checksum mismatch");

  const json& layer_meta = field(meta, "layers", "");
  if (!layer_meta.is_array() || layer_meta.empty()) {
    throw FormatError("layers", "expected a non-empty array");
  }
  std::size_t cursor = 0;
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < layer_meta.size(); ++i) {
    layers.push_back(parse_layer(layer_meta[i], i, payload, cursor));
  }
  if (cursor != payload.size()) {
    throw FormatError("layers", "dimensions account for " + std::to_string(cursor) +
                                    " payload bytes, file holds " +
                                    std::to_string(payload.size()));
  }

  const Shape shape = shape_field(meta, "output_shape", "");
  const std::uint64_t seed = u64_field(meta, "seed", "");
  std::optional<GeneratorSpec> spec;
  if (const json& s = field(meta, "spec", ""); !s.is_null()) spec = parse_spec(s);

  std::optional<GeneratorNetwork> net;
  try {
    net.emplace(std::move(layers), shape, seed, spec);
  } catch (const ConfigError& e) {
    throw FormatError("layers", e.what());
  }
  if (net->latent_dim() != size_field(meta, "latent_dim", "")) {
    throw FormatError("latent_dim", "does not match the first layer's input size");
  }
  return std::move(*net);
}

void save(const GeneratorNetwork& net, const std::filesystem::path& path) {
  const std::string bytes = serialize(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("path", "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("path", "write to '" + path.string() + "' failed");
}

GeneratorNetwork load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("path", "cannot open '" + path.string() + "'");
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  return deserialize(bytes);
}

}  // namespace ganinv
