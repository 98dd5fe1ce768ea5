#pragma once

// Shared per-tile kernels for the tiled forward and backward passes. Both
// passes must evaluate the exact same function, so they live together.

#include "splatc/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace splatc::detail {

/// Per-splat constants for evaluating
///   z1 = dx / s1,  z2 = (dy - l21 * z1) / s2,  w = exp(-(z1^2 + z2^2) / 2)
/// which equals exp(-0.5 d^T Sigma^-1 d) for Sigma = L L^T.
struct Projected {
    double mux, muy;
    double inv_s1, inv_s2, l21;
    double r, g, b;
    // q as a quadratic in dx for a fixed row: q = qa dx^2 + 2 (dy * qb) dx + (dy * inv_s2)^2
    double qa, qb;
};

inline Projected project(const Gaussian2D& g) {
    const CholFactor f = activated_factor(g);
    const double is1 = 1.0 / f.s1;
    const double is2 = 1.0 / f.s2;
    const double m = f.l21 * is1 * is2;
    return {g.mu[0], g.mu[1], is1, is2, f.l21, g.color[0], g.color[1], g.color[2], is1 * is1 + m * m, -is2 * m};
}

/// Pixel-center coordinates in normalized units, per column and per row.
struct PixelCenters {
    std::vector<double> xs;
    std::vector<double> ys;
    double step_x;

    PixelCenters(int width, int height)
        : xs(static_cast<std::size_t>(width)), ys(static_cast<std::size_t>(height)), step_x(1.0 / width) {
        for (int x = 0; x < width; ++x) {
            xs[static_cast<std::size_t>(x)] = (x + 0.5) / width;
        }
        for (int y = 0; y < height; ++y) {
            ys[static_cast<std::size_t>(y)] = (y + 0.5) / height;
        }
    }
};

/// Weights of one splat along pixels [x0, x1) of row y, written to w[0..x1-x0).
///
/// Along a row q is quadratic in x, so consecutive weights differ by a ratio
/// that itself changes by a constant factor `decay` = exp(-qa h^2). The walk
/// starts at the pixel nearest the row maximum and moves outwards, so it only
/// multiplies by factors <= 1 and cannot overflow; underflow to zero is the
/// correct limit.
inline void row_weights(const Projected& p, const PixelCenters& centers, double decay, int y, int x0, int x1,
                        double* w) {
    const double dy = centers.ys[static_cast<std::size_t>(y)] - p.muy;
    const double lin = dy * p.qb; // q = qa dx^2 + 2 lin dx + c0
    const double c0 = dy * p.inv_s2 * (dy * p.inv_s2);
    const double h = centers.step_x;
    const double peak_x = p.mux - lin / p.qa;
    const int n = x1 - x0;
    const int start = std::clamp(static_cast<int>(std::floor(peak_x / h)), x0, x1 - 1) - x0;

    const double dx0 = centers.xs[static_cast<std::size_t>(x0 + start)] - p.mux;
    const double q0 = (p.qa * dx0 + 2.0 * lin) * dx0 + c0;
    const double w0 = std::exp(-0.5 * q0);
    w[start] = w0;
    if (n == 1) {
        return;
    }
    const double slope = p.qa * dx0 + lin;
    const double half_step = 0.5 * p.qa * h * h;
    // right: (q(dx0 + h) - q(dx0)) / 2 = h slope + qa h^2 / 2
    const double right = std::exp(-(h * slope + half_step));
    double ratio = right;
    double cur = w0;
    for (int k = start + 1; k < n; ++k) {
        cur *= ratio;
        ratio *= decay;
        w[k] = cur;
    }
    if (start == 0) {
        return;
    }
    // left: (q(dx0 - h) - q(dx0)) / 2 = -h slope + qa h^2 / 2; left * right = decay
    ratio = right > 1e-200 ? decay / right : std::exp(-(-h * slope + half_step));
    cur = w0;
    for (int k = start - 1; k >= 0; --k) {
        cur *= ratio;
        ratio *= decay;
        w[k] = cur;
    }
}

inline double row_decay(const Projected& p, const PixelCenters& centers) {
    return std::exp(-p.qa * centers.step_x * centers.step_x);
}

/// Tile-local scratch reused across tiles on one worker.
struct TileScratch {
    std::vector<double> image;   // 3 doubles per tile pixel
    std::vector<double> weights; // bin.size() x tile pixels
};

/// Accumulates the bin's splats, in bin order, into scratch.image (row-major,
/// 3 doubles per pixel). When `keep_weights` is set the per-splat weights are
/// retained in scratch.weights for backward_tile.
inline void accumulate_tile(std::span<const Projected> splats, std::span<const std::uint32_t> bin, const TileRect& rect,
                            const PixelCenters& centers, TileScratch& scratch, bool keep_weights) {
    const int tw = rect.x1 - rect.x0;
    const int th = rect.y1 - rect.y0;
    const std::size_t pixels = static_cast<std::size_t>(tw * th);
    scratch.image.assign(pixels * 3, 0.0);
    if (keep_weights) {
        scratch.weights.resize(bin.size() * pixels);
    } else {
        scratch.weights.resize(pixels);
    }
    for (std::size_t k = 0; k < bin.size(); ++k) {
        const Projected& p = splats[bin[k]];
        double* wk = scratch.weights.data() + (keep_weights ? k * pixels : 0);
        const double decay = row_decay(p, centers);
        for (int y = rect.y0; y < rect.y1; ++y) {
            double* wrow = wk + static_cast<std::ptrdiff_t>((y - rect.y0) * tw);
            row_weights(p, centers, decay, y, rect.x0, rect.x1, wrow);
            double* row = scratch.image.data() + static_cast<std::ptrdiff_t>((y - rect.y0) * tw) * 3;
            for (int i = 0; i < tw; ++i) {
                const double w = wrow[i];
                row[3 * i + 0] += w * p.r;
                row[3 * i + 1] += w * p.g;
                row[3 * i + 2] += w * p.b;
            }
        }
    }
}

/// Per-splat partial sums collected by one tile of the backward pass.
///
/// With q = A dx^2 + 2 B dx dy + C dy^2 and G = dL/dq = -w/2 * dL/dw, every
/// geometric derivative is a linear combination of the moments
/// sum G dx, sum G dy, sum G dx^2, sum G dx dy, sum G dy^2.
/// The color sums are sum dL/dI_ch * w.
struct SplatPartial {
    double m_x = 0.0, m_y = 0.0, m_xx = 0.0, m_xy = 0.0, m_yy = 0.0;
    double s_r = 0.0, s_g = 0.0, s_b = 0.0;
};

/// scratch.image must hold dL/dI per tile pixel.
inline void backward_tile(std::span<const Projected> splats, std::span<const std::uint32_t> bin, const TileRect& rect,
                          const PixelCenters& centers, TileScratch& scratch, SplatPartial* partials) {
    const int tw = rect.x1 - rect.x0;
    scratch.weights.resize(static_cast<std::size_t>(2 * tw));
    double* wrow = scratch.weights.data();
    double* dxs = wrow + tw;
    for (std::size_t k = 0; k < bin.size(); ++k) {
        const Projected& p = splats[bin[k]];
        const double decay = row_decay(p, centers);
        for (int i = 0; i < tw; ++i) {
            dxs[i] = centers.xs[static_cast<std::size_t>(rect.x0 + i)] - p.mux;
        }
        SplatPartial acc;
        for (int y = rect.y0; y < rect.y1; ++y) {
            const double dy = centers.ys[static_cast<std::size_t>(y)] - p.muy;
            const double* row = scratch.image.data() + static_cast<std::ptrdiff_t>((y - rect.y0) * tw) * 3;
            row_weights(p, centers, decay, y, rect.x0, rect.x1, wrow);
            double r0 = 0.0, r1 = 0.0, r2 = 0.0;
            double cr = 0.0, cg = 0.0, cb = 0.0;
            for (int i = 0; i < tw; ++i) {
                const double w = wrow[i];
                const double* gi = row + 3 * i;
                cr += gi[0] * w;
                cg += gi[1] * w;
                cb += gi[2] * w;
                const double big_g = -0.5 * w * (gi[0] * p.r + gi[1] * p.g + gi[2] * p.b);
                const double gx = big_g * dxs[i];
                r0 += big_g;
                r1 += gx;
                r2 += gx * dxs[i];
            }
            acc.s_r += cr;
            acc.s_g += cg;
            acc.s_b += cb;
            acc.m_x += r1;
            acc.m_xx += r2;
            acc.m_y += dy * r0;
            acc.m_xy += dy * r1;
            acc.m_yy += dy * dy * r0;
        }
        partials[k] = acc;
    }
}

/// Tile rectangles for a frame, row-major.
std::vector<TileRect> make_tiles(int width, int height, int tile_size, int& tiles_x, int& tiles_y);

} // namespace splatc::detail
