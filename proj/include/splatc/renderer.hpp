#pragma once

#include "splatc/splat_model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace splatc {

inline constexpr int kDefaultTileSize = 16;

/// Half-width of a splat's culling box in standard deviations. Outside the box
/// a splat weighs at most exp(-8) ~ 3.4e-4.
inline constexpr double kCutoffSigmas = 4.0;

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct TileRect {
    int x0, y0, x1, y1;

    bool operator==(const TileRect&) const = default;
};

/// Screen partition plus, per tile, the indices of the alive splats whose
/// culling box touches it. Bins list splats in ascending index order.
struct TileGrid {
    int tile_size = kDefaultTileSize;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<TileRect> tiles;
    std::vector<std::vector<std::uint32_t>> bins;
};

/// Pixel-space box mu +- kCutoffSigmas*sqrt(diag(Sigma)), as continuous coordinates.
struct PixelBox {
    double x0, y0, x1, y1;
};

PixelBox splat_bounds(const Gaussian2D& g, int width, int height);

TileGrid build_tiles(const SplatSet& set, int tile_size = kDefaultTileSize);

/// Reference evaluation: every alive splat at every pixel center, explicit
/// inverse covariance, double accumulation in index order. No culling.
ImageBuffer render_naive(const SplatSet& set);

/// Tile-binned evaluation. A splat contributes to every pixel of every tile
/// its bounding box touches and nothing elsewhere. Output is bit-identical for
/// any worker count (workers <= 0 selects default_workers()).
ImageBuffer render_tiled(const SplatSet& set, int tile_size = kDefaultTileSize, int workers = 0);

/// Renders every set; element k is bit-identical to render_tiled(sets[k]).
/// Tiles of all images are scheduled as one pool of work.
std::vector<ImageBuffer> render_batch(std::span<const SplatSet> sets, int tile_size = kDefaultTileSize,
                                      int workers = 0);

} // namespace splatc
