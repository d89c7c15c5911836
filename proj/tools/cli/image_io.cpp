#include "cli/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "ganinv/errors.hpp"

namespace ganinv::cli {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw FormatError("pgm.header", "truncated header");
  return std::string(bytes.substr(start, pos - start));
}

std::size_t pgm_number(std::string_view bytes, std::size_t& pos, const char* field) {
  const std::string tok = pgm_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(),
                                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw FormatError(std::string("pgm.") + field, "expected a number, got '" + tok + "'");
  }
  if (tok.size() > 9) throw FormatError(std::string("pgm.") + field, "value too large");
  return std::stoul(tok);
}

}  // namespace

std::uint8_t to_gray(double p) {
  const double v = std::round((p + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

std::string encode_pgm(const ImageTensor& image) {
  const Shape& s = image.shape;
  std::string out = "P5\n" + std::to_string(s.width) + " " +
                    std::to_string(s.channels * s.height) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double p : image.data) out.push_back(static_cast<char>(to_gray(p)));
  return out;
}

ImageTensor decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") throw FormatError("pgm.magic", "expected binary PGM (P5)");
  const std::size_t width = pgm_number(bytes, pos, "width");
  const std::size_t height = pgm_number(bytes, pos, "height");
  const std::size_t maxval = pgm_number(bytes, pos, "maxval");
  if (width == 0 || height == 0) throw FormatError("pgm.size", "zero extent");
  if (maxval == 0 || maxval > 255) throw FormatError("pgm.maxval", "must be in [1, 255]");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("pgm.header", "missing separator before pixel data");
  }
  ++pos;
  if (bytes.size() - pos != width * height) {
    throw FormatError("pgm.data", "expected " + std::to_string(width * height) +
                                      " pixels, found " + std::to_string(bytes.size() - pos));
  }
  ImageTensor image(Shape{1, height, width});
  const double scale = 2.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < image.size(); ++i) {
    image.data[i] = static_cast<unsigned char>(bytes[pos + i]) * scale - 1.0;
  }
  return image;
}

std::string encode_tensor_json(const ImageTensor& image) {
  nlohmann::json j;
  j["shape"] = {image.shape.channels, image.shape.height, image.shape.width};
  j["data"] = image.data;
  return j.dump();
}

ImageTensor decode_tensor_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("tensor", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("shape") || !j["shape"].is_array() ||
      j["shape"].size() != 3) {
    throw FormatError("tensor.shape", "expected [c,h,w]");
  }
  std::size_t e[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = j["shape"][i];
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
      throw FormatError("tensor.shape", "extents must be positive integers");
    }
    e[i] = v.get<std::size_t>();
  }
  const Shape shape{e[0], e[1], e[2]};
  if (!j.contains("data") || !j["data"].is_array()) {
    throw FormatError("tensor.data", "expected an array of numbers");
  }
  const auto& data = j["data"];
  if (data.size() != shape.size()) {
    throw FormatError("tensor.data", "shape " + to_string(shape) + " needs " +
                                         std::to_string(shape.size()) + " values, found " +
                                         std::to_string(data.size()));
  }
  ImageTensor image(shape);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].is_number()) throw FormatError("tensor.data", "non-numeric entry");
    image.data[i] = data[i].get<double>();
    if (!std::isfinite(image.data[i])) throw FormatError("tensor.data", "non-finite entry");
  }
  return image;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("path", "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("path", "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("path", "write to '" + path.string() + "' failed");
}

ImageTensor load_target(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t first = 0;
  while (first < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[first]))) ++first;
  if (first < bytes.size() && bytes[first] == '{') return decode_tensor_json(bytes);
  return decode_pgm(bytes);
}

}  // namespace ganinv::cli
