#include "splatc/renderer.hpp"

#include "raster_kernel.hpp"
#include "splatc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace splatc {

namespace detail {

std::vector<TileRect> make_tiles(int width, int height, int tile_size, int& tiles_x, int& tiles_y) {
    if (tile_size < 1) {
        throw Error(ErrorCode::InvalidConfig, "tile size must be >= 1");
    }
    tiles_x = (width + tile_size - 1) / tile_size;
    tiles_y = (height + tile_size - 1) / tile_size;
    std::vector<TileRect> tiles;
    tiles.reserve(static_cast<std::size_t>(tiles_x) * static_cast<std::size_t>(tiles_y));
    for (int ty = 0; ty < tiles_y; ++ty) {
        for (int tx = 0; tx < tiles_x; ++tx) {
            tiles.push_back({tx * tile_size, ty * tile_size, std::min((tx + 1) * tile_size, width),
                             std::min((ty + 1) * tile_size, height)});
        }
    }
    return tiles;
}

} // namespace detail

namespace {

int resolve_workers(int workers) { return workers > 0 ? workers : default_workers(); }

// Inclusive tile index range covered by [lo, hi] in pixel units; empty when
// the interval misses the frame.
bool tile_span(double lo, double hi, int extent, int tile_size, int tiles, int& first, int& last) {
    if (!(hi >= 0.0) || !(lo <= static_cast<double>(extent))) {
        return false;
    }
    const double clo = std::max(lo, 0.0);
    const double chi = std::min(hi, static_cast<double>(extent) - 1e-9);
    first = std::clamp(static_cast<int>(std::floor(clo / tile_size)), 0, tiles - 1);
    last = std::clamp(static_cast<int>(std::floor(chi / tile_size)), 0, tiles - 1);
    return first <= last;
}

void store_tile(const double* acc, const TileRect& rect, ImageBuffer& out) {
    const int tw = rect.x1 - rect.x0;
    for (int y = rect.y0; y < rect.y1; ++y) {
        for (int x = rect.x0; x < rect.x1; ++x) {
            const double* px = acc + static_cast<std::ptrdiff_t>((y - rect.y0) * tw + (x - rect.x0)) * 3;
            for (int ch = 0; ch < 3; ++ch) {
                out.at(x, y, ch) = static_cast<float>(px[ch]);
            }
        }
    }
}

struct PreparedSet {
    TileGrid grid;
    std::vector<detail::Projected> projected;
    detail::PixelCenters centers;
};

PreparedSet prepare(const SplatSet& set, int tile_size) {
    ensure_valid(set);
    PreparedSet prep{build_tiles(set, tile_size), {}, detail::PixelCenters(set.width, set.height)};
    prep.projected.reserve(set.size());
    for (const Gaussian2D& g : set.gaussians) {
        prep.projected.push_back(detail::project(g));
    }
    return prep;
}

void render_prepared_tile(const PreparedSet& prep, std::size_t tile, ImageBuffer& out, detail::TileScratch& scratch) {
    const TileRect& rect = prep.grid.tiles[tile];
    detail::accumulate_tile(prep.projected, prep.grid.bins[tile], rect, prep.centers, scratch, false);
    store_tile(scratch.image.data(), rect, out);
}

} // namespace

PixelBox splat_bounds(const Gaussian2D& g, int width, int height) {
    const Sym2 cov = covariance_of(g);
    const double hx = kCutoffSigmas * std::sqrt(cov.xx) * width;
    const double hy = kCutoffSigmas * std::sqrt(cov.yy) * height;
    const double cx = g.mu[0] * width;
    const double cy = g.mu[1] * height;
    return {cx - hx, cy - hy, cx + hx, cy + hy};
}

TileGrid build_tiles(const SplatSet& set, int tile_size) {
    ensure_valid(set);
    TileGrid grid;
    grid.tile_size = tile_size;
    grid.tiles = detail::make_tiles(set.width, set.height, tile_size, grid.tiles_x, grid.tiles_y);
    grid.bins.resize(grid.tiles.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.alive[i]) {
            continue;
        }
        const PixelBox box = splat_bounds(set.gaussians[i], set.width, set.height);
        int tx0 = 0, tx1 = 0, ty0 = 0, ty1 = 0;
        if (!tile_span(box.x0, box.x1, set.width, tile_size, grid.tiles_x, tx0, tx1) ||
            !tile_span(box.y0, box.y1, set.height, tile_size, grid.tiles_y, ty0, ty1)) {
            continue;
        }
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int tx = tx0; tx <= tx1; ++tx) {
                grid.bins[static_cast<std::size_t>(ty * grid.tiles_x + tx)].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    return grid;
}

ImageBuffer render_naive(const SplatSet& set) {
    ensure_valid(set);
    std::vector<double> acc(static_cast<std::size_t>(set.width) * static_cast<std::size_t>(set.height) * 3, 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.alive[i]) {
            continue;
        }
        const Gaussian2D& g = set.gaussians[i];
        const Sym2 cov = covariance_of(g);
        const double det = cov.det();
        if (!(det > 0.0) || !std::isfinite(det)) {
            throw Error(ErrorCode::SingularCovariance, "covariance is not invertible", i);
        }
        const double ia = cov.yy / det;
        const double ib = -cov.xy / det;
        const double ic = cov.xx / det;
        for (int y = 0; y < set.height; ++y) {
            const double dy = (y + 0.5) / set.height - g.mu[1];
            for (int x = 0; x < set.width; ++x) {
                const double dx = (x + 0.5) / set.width - g.mu[0];
                const double m = ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy;
                const double w = std::exp(-0.5 * m);
                double* px = &acc[(static_cast<std::size_t>(y) * static_cast<std::size_t>(set.width) +
                                   static_cast<std::size_t>(x)) *
                                  3];
                for (int ch = 0; ch < 3; ++ch) {
                    px[ch] += w * g.color[static_cast<std::size_t>(ch)];
                }
            }
        }
    }
    std::vector<float> data(acc.size());
    std::transform(acc.begin(), acc.end(), data.begin(), [](double v) { return static_cast<float>(v); });
    return ImageBuffer(set.width, set.height, std::move(data));
}

ImageBuffer render_tiled(const SplatSet& set, int tile_size, int workers) {
    const PreparedSet prep = prepare(set, tile_size);
    ImageBuffer out(set.width, set.height);
    parallel_for(prep.grid.tiles.size(), resolve_workers(workers), [&](std::size_t tile) {
        thread_local detail::TileScratch scratch;
        render_prepared_tile(prep, tile, out, scratch);
    });
    return out;
}

std::vector<ImageBuffer> render_batch(std::span<const SplatSet> sets, int tile_size, int workers) {
    if (sets.empty()) {
        return {};
    }
    for (const SplatSet& s : sets) {
        if (s.width != sets.front().width || s.height != sets.front().height) {
            throw Error(ErrorCode::MixedDimensions, "all sets in a batch must share width and height");
        }
    }

    std::vector<PreparedSet> prepared;
    prepared.reserve(sets.size());
    for (const SplatSet& s : sets) {
        prepared.push_back(prepare(s, tile_size));
    }
    std::vector<ImageBuffer> out;
    out.reserve(sets.size());
    for (const SplatSet& s : sets) {
        out.emplace_back(s.width, s.height);
    }

    // Flat (image, tile) work list so small images still fill every worker.
    const std::size_t tiles_per_image = prepared.front().grid.tiles.size();
    parallel_for(sets.size() * tiles_per_image, resolve_workers(workers), [&](std::size_t item) {
        thread_local detail::TileScratch scratch;
        const std::size_t image = item / tiles_per_image;
        render_prepared_tile(prepared[image], item % tiles_per_image, out[image], scratch);
    });
    return out;
}

} // namespace splatc
