#pragma once

#include "splatc/renderer.hpp"
#include "splatc/splat_model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace splatc {

// GSF container, little-endian throughout:
//   0  magic "GS2F"
//   4  u16 version (1)
//   6  u16 width
//   8  u16 height
//   10 u32 count
//   14 u16 flags (bit 0: colors clamped on export; other bits reserved, 0)
//   16 count x 8 IEEE half values: mu.x mu.y l11 l21 l22 r g b

inline constexpr std::uint16_t kGsfVersion = 1;
inline constexpr std::uint16_t kGsfFlagClampedColors = 0x1;

/// Round-to-nearest-even conversion; values beyond the finite half range
/// (including NaN) throw OutOfRange.
std::uint16_t double_to_half(double value);
double half_to_double(std::uint16_t bits);

struct EncodeOptions {
    /// Clamp colors to [0,1] before quantization and set flag bit 0.
    bool clamp_colors = false;
};

/// Serializes the alive splats of `set` in index order.
std::vector<std::uint8_t> encode_gsf(const SplatSet& set, const EncodeOptions& options = {});

struct GsfHeader {
    std::uint16_t version = kGsfVersion;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint32_t count = 0;
    std::uint16_t flags = 0;
};

/// Parses and checks only the 16-byte header, plus the payload length.
GsfHeader read_gsf_header(std::span<const std::uint8_t> bytes);

SplatSet decode_gsf(std::span<const std::uint8_t> bytes);

/// render_tiled(decode_gsf(bytes)) clamped to [0,1].
ImageBuffer decode_to_image(std::span<const std::uint8_t> bytes, int tile_size = kDefaultTileSize, int workers = 0);

} // namespace splatc
