#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "ganinv/diffnet.hpp"
#include "ganinv/generator_spec.hpp"

namespace ganinv {

/// Builds a network with weights drawn from the stream derived from
/// spec.seed: affine weights ~ Normal(0, 1/sqrt(fan_in)), transposed-conv
/// kernels ~ Normal(0, 0.02), all biases zero.
///
///   mlp:          [affine -> hidden_activation]* -> affine -> tanh
///   dcgan_small:  affine -> 32 x H/4 x W/4 -> relu -> tconv -> 16 x H/2 x W/2
///                 -> relu -> tconv -> C x H x W -> tanh
GeneratorNetwork build(const GeneratorSpec& spec);

/// Sum of every weight and bias in layer order. Cheap identity check for
/// a built network.
double weight_fingerprint(const GeneratorNetwork& net);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

/// GENNET v1 serialization:
///
///   "GENNET v1 " <single-line JSON metadata> "\n"
///   payload: little-endian IEEE-754 doubles, layer by layer
///            (affine: row-major weight then bias; tconv: kernel then bias)
///   trailer: little-endian 64-bit FNV-1a of the payload bytes
std::string serialize(const GeneratorNetwork& net);

/// Inverse of serialize. Throws FormatError naming the offending field.
GeneratorNetwork deserialize(std::string_view bytes);

/// Throws FormatError("path", ...) when the file cannot be written.
void save(const GeneratorNetwork& net, const std::filesystem::path& path);

/// Throws FormatError when the file is unreadable or malformed.
GeneratorNetwork load(const std::filesystem::path& path);

}  // namespace ganinv
