#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ganinv/generator_spec.hpp"
#include "ganinv/tensor.hpp"

namespace ganinv {

/// y = W x + b, W stored row-major (out x in).
struct AffineLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  friend bool operator==(const AffineLayer&, const AffineLayer&) = default;
};

/// Stride-2, kernel-4, padding-1 transposed convolution: every spatial
/// extent doubles. Kernel layout is (in_channels, out_channels, kh, kw);
/// one bias per output channel.
struct TransposedConv2dLayer {
  static constexpr std::size_t kernel_size = 4;
  static constexpr std::size_t stride = 2;
  static constexpr std::size_t padding = 1;

  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t in_height = 0;
  std::size_t in_width = 0;
  std::vector<double> kernel;
  std::vector<double> bias;

  std::size_t out_height() const noexcept { return in_height * stride; }
  std::size_t out_width() const noexcept { return in_width * stride; }

  friend bool operator==(const TransposedConv2dLayer&,
                         const TransposedConv2dLayer&) = default;
};

struct ActivationLayer {
  Activation fn = Activation::tanh;
  std::size_t size = 0;

  friend bool operator==(const ActivationLayer&,
                         const ActivationLayer&) = default;
};

using Layer = std::variant<AffineLayer, TransposedConv2dLayer, ActivationLayer>;

std::size_t input_size(const Layer& layer);
std::size_t output_size(const Layer& layer);

/// Number of learned scalars (weights and biases) in the layer.
std::size_t parameter_count(const Layer& layer);

/// Fixed-weight feed-forward map from latent space to image space.
/// Immutable after construction and safe to share between threads.
class GeneratorNetwork {
 public:
  /// Validates that layer sizes compose, that the first layer accepts the
  /// latent vector, that the last layer is tanh over the whole image and
  /// that every weight is finite. Throws ConfigError otherwise.
  GeneratorNetwork(std::vector<Layer> layers, Shape output_shape,
                   std::uint64_t seed = 0,
                   std::optional<GeneratorSpec> spec = std::nullopt);

  std::size_t latent_dim() const noexcept { return latent_dim_; }
  const Shape& output_shape() const noexcept { return output_shape_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  /// Recipe the network was built from, if any.
  const std::optional<GeneratorSpec>& spec() const noexcept { return spec_; }

  std::size_t parameter_count() const;

  friend bool operator==(const GeneratorNetwork& a, const GeneratorNetwork& b);

 private:
  std::vector<Layer> layers_;
  Shape output_shape_;
  std::uint64_t seed_;
  std::optional<GeneratorSpec> spec_;
  std::size_t latent_dim_;
};

struct ForwardResult;

/// Activations recorded by one forward pass. Only valid for the network and
/// input it was recorded from.
class Tape {
 public:
  const GeneratorNetwork* network() const noexcept { return network_; }
  /// values()[0] is the input, values()[i + 1] the output of layer i.
  const std::vector<std::vector<double>>& values() const noexcept {
    return values_;
  }

 private:
  friend ForwardResult forward(const GeneratorNetwork&,
                               std::span<const double>);
  const GeneratorNetwork* network_ = nullptr;
  std::vector<std::vector<double>> values_;
};

struct ForwardResult {
  ImageTensor image;
  Tape tape;
};

/// Evaluates the network and records a tape. Throws InputError when z has
/// the wrong length or a non-finite component.
ForwardResult forward(const GeneratorNetwork& net, std::span<const double> z);

/// Forward pass without recording.
ImageTensor evaluate(const GeneratorNetwork& net, std::span<const double> z);

/// Squared Euclidean distance sum_i (a_i - b_i)^2.
double l2_loss(const ImageTensor& a, const ImageTensor& b);
double l2_loss(std::span<const double> a, std::span<const double> b);

/// Exact gradient of l2_loss(phi(z), target) with respect to the z the tape
/// was recorded from. Throws ContractError on a tape from another network
/// and InputError on a target of the wrong shape.
std::vector<double> backward_input(const GeneratorNetwork& net,
                                   const Tape& tape,
                                   const ImageTensor& target);

/// Central differences of an arbitrary scalar function, coordinate by
/// coordinate: (f(z + h e_i) - f(z - h e_i)) / 2h.
std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> z, double h);

/// Central-difference estimate of the same gradient, one coordinate at a
/// time. Independent of backward_input; used as its oracle.
std::vector<double> finite_diff_grad(const GeneratorNetwork& net,
                                     std::span<const double> z,
                                     const ImageTensor& target, double h);

}  // namespace ganinv
