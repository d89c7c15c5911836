#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ganinv {

/// A point in latent space. Components are expected in [-1, 1] but the
/// type itself does not enforce it (unclipped iterates leave the box).
using LatentVector = std::vector<double>;

/// Channel-major image geometry.
struct Shape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  constexpr std::size_t size() const noexcept {
    return channels * height * width;
  }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

/// "CxHxW", the form used on the command line.
std::string to_string(const Shape& shape);

/// Parses "CxHxW" (e.g. "1x16x16"). Throws InputError on malformed text or
/// zero extents.
Shape parse_shape(const std::string& text);

/// Flat generator output with its shape. Data is stored channel-major,
/// row-major within a channel.
struct ImageTensor {
  Shape shape;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(Shape s, std::vector<double> values)
      : shape(s), data(std::move(values)) {}
  explicit ImageTensor(Shape s) : shape(s), data(s.size(), 0.0) {}

  std::size_t size() const noexcept { return data.size(); }
  std::span<const double> values() const noexcept { return data; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

/// ||a - b||^2 / a.size(); the per-dimension latent error.
double latent_error(std::span<const double> truth,
                    std::span<const double> recovered);

}  // namespace ganinv
