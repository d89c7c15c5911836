#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ganinv/tensor.hpp"

namespace ganinv::cli {

/// Pixel p in [-1, 1] -> round((p + 1) * 127.5), clamped to [0, 255].
std::uint8_t to_gray(double p);

/// Binary PGM (P5), 8-bit. Channels are stacked vertically, so a C x H x W
/// image becomes a W x (C*H) picture.
std::string encode_pgm(const ImageTensor& image);

/// Inverse of encode_pgm for single-channel images; accepts comments and
/// any maxval in [1, 255]. Values map back to [-1, 1].
ImageTensor decode_pgm(std::string_view bytes);

/// {"shape":[c,h,w],"data":[...]}
std::string encode_tensor_json(const ImageTensor& image);
ImageTensor decode_tensor_json(std::string_view text);

/// Reads a target image, choosing the decoder from the file contents.
/// Throws FormatError on unreadable or malformed input.
ImageTensor load_target(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Throws FormatError("path", ...) on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ganinv::cli
