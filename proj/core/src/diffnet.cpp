#include "ganinv/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ganinv/errors.hpp"

namespace ganinv {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// Four independent partial sums; fixed order, so results stay deterministic.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void affine_forward(const AffineLayer& l, std::span<const double> x,
                    std::vector<double>& y) {
  y.assign(l.bias.begin(), l.bias.end());
  for (std::size_t r = 0; r < l.out; ++r) {
    y[r] += dot(l.weight.data() + r * l.in, x.data(), l.in);
  }
}

void affine_backward(const AffineLayer& l, std::span<const double> gy,
                     std::vector<double>& gx) {
  gx.assign(l.in, 0.0);
  for (std::size_t r = 0; r < l.out; ++r) {
    const double* row = l.weight.data() + r * l.in;
    const double g = gy[r];
    for (std::size_t c = 0; c < l.in; ++c) gx[c] += row[c] * g;
  }
}

// Output position oy receives input iy through kernel tap ky when
// oy = iy * stride - padding + ky.
void tconv_forward(const TransposedConv2dLayer& l, std::span<const double> x,
                   std::vector<double>& y) {
  constexpr std::size_t K = TransposedConv2dLayer::kernel_size;
  constexpr auto S = static_cast<long>(TransposedConv2dLayer::stride);
  constexpr auto P = static_cast<long>(TransposedConv2dLayer::padding);
  const std::size_t oh = l.out_height(), ow = l.out_width();
  const std::size_t plane = oh * ow;
  y.resize(l.out_channels * plane);
  for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
    std::fill_n(y.begin() + static_cast<long>(oc * plane), plane, l.bias[oc]);
  }
  for (std::size_t ic = 0; ic < l.in_channels; ++ic) {
    for (std::size_t iy = 0; iy < l.in_height; ++iy) {
      for (std::size_t ix = 0; ix < l.in_width; ++ix) {
        const double v = x[(ic * l.in_height + iy) * l.in_width + ix];
        for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
          const double* k = l.kernel.data() + (ic * l.out_channels + oc) * K * K;
          double* out = y.data() + oc * plane;
          for (std::size_t ky = 0; ky < K; ++ky) {
            const long oy = static_cast<long>(iy) * S - P + static_cast<long>(ky);
            if (oy < 0 || oy >= static_cast<long>(oh)) continue;
            for (std::size_t kx = 0; kx < K; ++kx) {
              const long ox = static_cast<long>(ix) * S - P + static_cast<long>(kx);
              if (ox < 0 || ox >= static_cast<long>(ow)) continue;
              out[static_cast<std::size_t>(oy) * ow + static_cast<std::size_t>(ox)] +=
                  v * k[ky * K + kx];
            }
          }
        }
      }
    }
  }
}

void tconv_backward(const TransposedConv2dLayer& l, std::span<const double> gy,
                    std::vector<double>& gx) {
  constexpr std::size_t K = TransposedConv2dLayer::kernel_size;
  constexpr auto S = static_cast<long>(TransposedConv2dLayer::stride);
  constexpr auto P = static_cast<long>(TransposedConv2dLayer::padding);
  const std::size_t oh = l.out_height(), ow = l.out_width();
  const std::size_t plane = oh * ow;
  gx.assign(l.in_channels * l.in_height * l.in_width, 0.0);
  for (std::size_t ic = 0; ic < l.in_channels; ++ic) {
    for (std::size_t iy = 0; iy < l.in_height; ++iy) {
      for (std::size_t ix = 0; ix < l.in_width; ++ix) {
        double acc = 0.0;
        for (std::size_t oc = 0; oc < l.out_channels; ++oc) {
          const double* k = l.kernel.data() + (ic * l.out_channels + oc) * K * K;
          const double* g = gy.data() + oc * plane;
          for (std::size_t ky = 0; ky < K; ++ky) {
            const long oy = static_cast<long>(iy) * S - P + static_cast<long>(ky);
            if (oy < 0 || oy >= static_cast<long>(oh)) continue;
            for (std::size_t kx = 0; kx < K; ++kx) {
              const long ox = static_cast<long>(ix) * S - P + static_cast<long>(kx);
              if (ox < 0 || ox >= static_cast<long>(ow)) continue;
              acc += g[static_cast<std::size_t>(oy) * ow + static_cast<std::size_t>(ox)] *
                     k[ky * K + kx];
            }
          }
        }
        gx[(ic * l.in_height + iy) * l.in_width + ix] = acc;
      }
    }
  }
}

void activation_forward(const ActivationLayer& l, std::span<const double> x,
                        std::vector<double>& y) {
  y.resize(x.size());
  if (l.fn == Activation::tanh) {
    std::transform(x.begin(), x.end(), y.begin(),
                   [](double v) { return std::tanh(v); });
  } else {
    std::transform(x.begin(), x.end(), y.begin(),
                   [](double v) { return v > 0.0 ? v : 0.0; });
  }
}

// Both derivatives are expressible through the layer output.
void activation_backward(const ActivationLayer& l, std::span<const double> y,
                         std::span<const double> gy, std::vector<double>& gx) {
  gx.resize(y.size());
  if (l.fn == Activation::tanh) {
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] = gy[i] * (1.0 - y[i] * y[i]);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] = y[i] > 0.0 ? gy[i] : 0.0;
  }
}

void apply(const Layer& layer, std::span<const double> x, std::vector<double>& y) {
  std::visit(overloaded{
                 [&](const AffineLayer& l) { affine_forward(l, x, y); },
                 [&](const TransposedConv2dLayer& l) { tconv_forward(l, x, y); },
                 [&](const ActivationLayer& l) { activation_forward(l, x, y); },
             },
             layer);
}

void check_input(const GeneratorNetwork& net, std::span<const double> z) {
  if (z.size() != net.latent_dim()) {
    throw InputError("forward: latent vector has length " +
                     std::to_string(z.size()) + ", network expects " +
                     std::to_string(net.latent_dim()));
  }
  if (!all_finite(z)) {
    throw InputError("forward: latent vector has a non-finite component");
  }
}

std::vector<double> const_params(const Layer& layer) {
  return std::visit(
      overloaded{
          [](const AffineLayer& l) {
            std::vector<double> v(l.weight);
            v.insert(v.end(), l.bias.begin(), l.bias.end());
            return v;
          },
          [](const TransposedConv2dLayer& l) {
            std::vector<double> v(l.kernel);
            v.insert(v.end(), l.bias.begin(), l.bias.end());
            return v;
          },
          [](const ActivationLayer&) { return std::vector<double>{}; },
      },
      layer);
}

}  // namespace

std::size_t input_size(const Layer& layer) {
  return std::visit(
      overloaded{
          [](const AffineLayer& l) { return l.in; },
          [](const TransposedConv2dLayer& l) {
            return l.in_channels * l.in_height * l.in_width;
          },
          [](const ActivationLayer& l) { return l.size; },
      },
      layer);
}

std::size_t output_size(const Layer& layer) {
  return std::visit(
      overloaded{
          [](const AffineLayer& l) { return l.out; },
          [](const TransposedConv2dLayer& l) {
            return l.out_channels * l.out_height() * l.out_width();
          },
          [](const ActivationLayer& l) { return l.size; },
      },
      layer);
}

std::size_t parameter_count(const Layer& layer) {
  return std::visit(
      overloaded{
          [](const AffineLayer& l) { return l.weight.size() + l.bias.size(); },
          [](const TransposedConv2dLayer& l) {
            return l.kernel.size() + l.bias.size();
          },
          [](const ActivationLayer&) { return std::size_t{0}; },
      },
      layer);
}

GeneratorNetwork::GeneratorNetwork(std::vector<Layer> layers, Shape output_shape,
                                   std::uint64_t seed,
                                   std::optional<GeneratorSpec> spec)
    : layers_(std::move(layers)),
      output_shape_(output_shape),
      seed_(seed),
      spec_(std::move(spec)),
      latent_dim_(0) {
  if (layers_.empty()) throw ConfigError("network has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    const Layer& layer = layers_[i];
    if (input_size(layer) == 0 || output_size(layer) == 0) {
      throw ConfigError(where + ": zero-sized layer");
    }
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      if (a->weight.size() != a->in * a->out || a->bias.size() != a->out) {
        throw ConfigError(where + ": affine parameter count does not match " +
                          std::to_string(a->out) + "x" + std::to_string(a->in));
      }
    } else if (const auto* c = std::get_if<TransposedConv2dLayer>(&layer)) {
      constexpr std::size_t K = TransposedConv2dLayer::kernel_size;
      if (c->kernel.size() != c->in_channels * c->out_channels * K * K ||
          c->bias.size() != c->out_channels) {
        throw ConfigError(where + ": transposed_conv2d parameter count mismatch");
      }
    }
    if (i > 0 && output_size(layers_[i - 1]) != input_size(layer)) {
      throw ConfigError(where + ": input size " + std::to_string(input_size(layer)) +
                        " does not match previous output size " +
                        std::to_string(output_size(layers_[i - 1])));
    }
    if (!all_finite(const_params(layer))) {
      throw ConfigError(where + ": non-finite weight");
    }
  }
  const auto* last = std::get_if<ActivationLayer>(&layers_.back());
  if (last == nullptr || last->fn != Activation::tanh) {
    throw ConfigError("final layer must be a tanh activation");
  }
  if (output_size(layers_.back()) != output_shape_.size()) {
    throw ConfigError("final layer size " + std::to_string(output_size(layers_.back())) +
                      " does not match output shape " + to_string(output_shape_));
  }
  latent_dim_ = input_size(layers_.front());
}

std::size_t GeneratorNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += ganinv::parameter_count(l);
  return n;
}

bool operator==(const GeneratorNetwork& a, const GeneratorNetwork& b) {
  return a.layers_ == b.layers_ && a.output_shape_ == b.output_shape_ &&
         a.seed_ == b.seed_ && a.spec_ == b.spec_;
}

ForwardResult forward(const GeneratorNetwork& net, std::span<const double> z) {
  check_input(net, z);
  ForwardResult result;
  Tape& tape = result.tape;
  tape.network_ = &net;
  tape.values_.reserve(net.layers().size() + 1);
  tape.values_.emplace_back(z.begin(), z.end());
  for (const Layer& layer : net.layers()) {
    std::vector<double> next;
    apply(layer, tape.values_.back(), next);
    tape.values_.push_back(std::move(next));
  }
  result.image = ImageTensor(net.output_shape(), tape.values_.back());
  return result;
}

ImageTensor evaluate(const GeneratorNetwork& net, std::span<const double> z) {
  check_input(net, z);
  std::vector<double> cur(z.begin(), z.end());
  std::vector<double> next;
  for (const Layer& layer : net.layers()) {
    apply(layer, cur, next);
    cur.swap(next);
  }
  return ImageTensor(net.output_shape(), std::move(cur));
}

double l2_loss(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("l2_loss: size mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double l2_loss(const ImageTensor& a, const ImageTensor& b) {
  if (!(a.shape == b.shape)) {
    throw InputError("l2_loss: shape mismatch (" + to_string(a.shape) + " vs " +
                     to_string(b.shape) + ")");
  }
  return l2_loss(a.values(), b.values());
}

std::vector<double> backward_input(const GeneratorNetwork& net, const Tape& tape,
                                   const ImageTensor& target) {
  const auto& layers = net.layers();
  const auto& values = tape.values();
  if (tape.network() != &net || values.size() != layers.size() + 1) {
    throw ContractError("backward_input: tape was not recorded on this network");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (values[i].size() != input_size(layers[i]) ||
        values[i + 1].size() != output_size(layers[i])) {
      throw ContractError("backward_input: tape does not match layer " +
                          std::to_string(i));
    }
  }
  if (!(target.shape == net.output_shape()) ||
      target.size() != net.output_shape().size()) {
    throw InputError("backward_input: target shape " + to_string(target.shape) +
                     " does not match network output " +
                     to_string(net.output_shape()));
  }

  const auto& y = values.back();
  std::vector<double> grad(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) grad[i] = 2.0 * (y[i] - target.data[i]);

  std::vector<double> next;
  for (std::size_t i = layers.size(); i-- > 0;) {
    std::visit(overloaded{
                   [&](const AffineLayer& l) { affine_backward(l, grad, next); },
                   [&](const TransposedConv2dLayer& l) { tconv_backward(l, grad, next); },
                   [&](const ActivationLayer& l) {
                     activation_backward(l, values[i + 1], grad, next);
                   },
               },
               layers[i]);
    grad.swap(next);
  }
  return grad;
}

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> z, double h) {
  if (!(h > 0.0)) throw InputError("central_difference: step must be positive");
  std::vector<double> probe(z.begin(), z.end());
  std::vector<double> grad(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_grad(const GeneratorNetwork& net,
                                     std::span<const double> z,
                                     const ImageTensor& target, double h) {
  return central_difference(
      [&](std::span<const double> p) { return l2_loss(evaluate(net, p), target); }, z, h);
}

}  // namespace ganinv
