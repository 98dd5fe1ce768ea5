#pragma once

#include "splatc/splat_model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace splatc {

/// Reads an 8-bit RGB PNG or binary PPM (P6, maxval 255) into [0,1] floats.
/// The format is chosen from the file signature, not the extension.
/// Grayscale and alpha images are rejected.
ImageBuffer read_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// 8-bit quantization of a [0,1] image (values clamped, rounded).
std::vector<std::uint8_t> to_rgb8(const ImageBuffer& image);
ImageBuffer from_rgb8(int width, int height, std::span<const std::uint8_t> rgb);

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image);
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

/// Writes PNG for ".png" and PPM otherwise, via a temporary file renamed on success.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes `bytes` to a sibling temporary file and renames it over `path`;
/// on failure nothing is left at `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace splatc
