#include "ganinv/tensor.hpp"

#include <charconv>

#include "ganinv/errors.hpp"

namespace ganinv {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.height) +
         "x" + std::to_string(shape.width);
}

Shape parse_shape(const std::string& text) {
  std::size_t extents[3] = {0, 0, 0};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    auto [next, ec] = std::from_chars(p, end, extents[i]);
    if (ec != std::errc{} || extents[i] == 0) {
      throw InputError("shape '" + text + "': expected CxHxW with positive extents");
    }
    p = next;
    if (i < 2) {
      if (p == end || (*p != 'x' && *p != 'X')) {
        throw InputError("shape '" + text + "': expected CxHxW");
      }
      ++p;
    }
  }
  if (p != end) {
    throw InputError("shape '" + text + "': trailing characters");
  }
  return Shape{extents[0], extents[1], extents[2]};
}

double latent_error(std::span<const double> truth,
                    std::span<const double> recovered) {
  if (truth.size() != recovered.size() || truth.empty()) {
    throw InputError("latent_error: dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double diff = truth[i] - recovered[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(truth.size());
}

}  // namespace ganinv
