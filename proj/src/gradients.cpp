#include "splatc/gradients.hpp"

#include "raster_kernel.hpp"
#include "splatc/parallel.hpp"

#include <cmath>

namespace splatc {

namespace {

double l1_term(const SplatSet& set, double l1_weight) {
    const std::size_t n_alive = set.alive_count();
    if (l1_weight == 0.0 || n_alive == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.alive[i]) {
            const Vec3& c = set.gaussians[i].color;
            sum += std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
        }
    }
    return l1_weight * sum / static_cast<double>(n_alive);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

BackwardResult evaluate(const SplatSet& set, const ImageBuffer& target, const LossOptions& options, bool want_grad,
                        ImageBuffer* render_out) {
    ensure_valid(set);
    if (target.width() != set.width || target.height() != set.height) {
        throw Error(ErrorCode::DimensionMismatch, "target dimensions differ from the splat set");
    }
    if (!(options.l1_weight >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "l1 weight must be >= 0");
    }

    const TileGrid grid = build_tiles(set, options.tile_size);
    std::vector<detail::Projected> projected;
    projected.reserve(set.size());
    for (const Gaussian2D& g : set.gaussians) {
        projected.push_back(detail::project(g));
    }
    const detail::PixelCenters centers(set.width, set.height);
    const double n_entries = static_cast<double>(target.size());
    const double grad_scale = 2.0 / n_entries;

    std::vector<double> tile_sq(grid.tiles.size(), 0.0);
    std::vector<std::vector<detail::SplatPartial>> tile_partials(want_grad ? grid.tiles.size() : 0);
    if (render_out != nullptr && (render_out->width() != set.width || render_out->height() != set.height)) {
        *render_out = ImageBuffer(set.width, set.height);
    }

    const int workers = options.workers > 0 ? options.workers : default_workers();
    parallel_for(grid.tiles.size(), workers, [&](std::size_t tile) {
        thread_local detail::TileScratch scratch;
        const TileRect& rect = grid.tiles[tile];
        const int tw = rect.x1 - rect.x0;
        detail::accumulate_tile(projected, grid.bins[tile], rect, centers, scratch, false);

        double sq = 0.0;
        for (int y = rect.y0; y < rect.y1; ++y) {
            for (int x = rect.x0; x < rect.x1; ++x) {
                double* px = scratch.image.data() + static_cast<std::ptrdiff_t>((y - rect.y0) * tw + (x - rect.x0)) * 3;
                for (int ch = 0; ch < 3; ++ch) {
                    if (render_out != nullptr) {
                        render_out->at(x, y, ch) = static_cast<float>(px[ch]);
                    }
                    const double r = px[ch] - static_cast<double>(target.at(x, y, ch));
                    sq += r * r;
                    px[ch] = grad_scale * r; // scratch now holds dL/dI
                }
            }
        }
        tile_sq[tile] = sq;

        if (want_grad) {
            auto& partials = tile_partials[tile];
            partials.resize(grid.bins[tile].size());
            detail::backward_tile(projected, grid.bins[tile], rect, centers, scratch, partials.data());
        }
    });

    BackwardResult result;
    double total_sq = 0.0;
    for (const double sq : tile_sq) {
        total_sq += sq;
    }
    result.loss = total_sq / n_entries + l1_term(set, options.l1_weight);
    if (!want_grad) {
        return result;
    }

    // Deterministic merge: fixed tile order, then bin order within a tile.
    std::vector<detail::SplatPartial> totals(set.size());
    for (std::size_t tile = 0; tile < grid.tiles.size(); ++tile) {
        const auto& bin = grid.bins[tile];
        const auto& partials = tile_partials[tile];
        for (std::size_t k = 0; k < bin.size(); ++k) {
            detail::SplatPartial& t = totals[bin[k]];
            const detail::SplatPartial& p = partials[k];
            t.m_x += p.m_x;
            t.m_y += p.m_y;
            t.m_xx += p.m_xx;
            t.m_xy += p.m_xy;
            t.m_yy += p.m_yy;
            t.s_r += p.s_r;
            t.s_g += p.s_g;
            t.s_b += p.s_b;
        }
    }

    result.grads = GradientSet(set.size());
    const std::size_t n_alive = set.alive_count();
    const double l1_scale = n_alive > 0 ? options.l1_weight / static_cast<double>(n_alive) : 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.alive[i]) {
            continue;
        }
        const detail::Projected& p = projected[i];
        const detail::SplatPartial& t = totals[i];
        const Gaussian2D& g = set.gaussians[i];
        // q = A dx^2 + 2 B dx dy + C dy^2 with
        //   A = is1^2 (1 + l21^2 is2^2),  B = -l21 is1 is2^2,  C = is2^2.
        const double is1 = p.inv_s1;
        const double is2 = p.inv_s2;
        const double l21 = p.l21;
        const double a = is1 * is1 * (1.0 + l21 * l21 * is2 * is2);
        const double b = -l21 * is1 * is2 * is2;
        const double c = is2 * is2;
        result.grads.d_mu[i] = {-2.0 * (a * t.m_x + b * t.m_y), -2.0 * (b * t.m_x + c * t.m_y)};
        // dL/dtheta = dA/dtheta m_xx + 2 dB/dtheta m_xy + dC/dtheta m_yy
        const double d_s1 = -2.0 * a * is1 * t.m_xx - 2.0 * b * is1 * t.m_xy;
        const double d_l21 = 2.0 * l21 * is1 * is1 * is2 * is2 * t.m_xx - 2.0 * is1 * is2 * is2 * t.m_xy;
        const double is2_3 = is2 * is2 * is2;
        const double d_s2 = -2.0 * is1 * is1 * l21 * l21 * is2_3 * t.m_xx + 4.0 * l21 * is1 * is2_3 * t.m_xy -
                            2.0 * is2_3 * t.m_yy;
        result.grads.d_chol[i] = {d_s1 * sigmoid(g.chol[0]), d_l21, d_s2 * sigmoid(g.chol[2])};
        result.grads.d_color[i] = {t.s_r + l1_scale * sign(g.color[0]), t.s_g + l1_scale * sign(g.color[1]),
                                   t.s_b + l1_scale * sign(g.color[2])};
    }
    return result;
}

} // namespace

double loss(const SplatSet& set, const ImageBuffer& target, const LossOptions& options) {
    return evaluate(set, target, options, false, nullptr).loss;
}

BackwardResult backward(const SplatSet& set, const ImageBuffer& target, const LossOptions& options,
                        ImageBuffer* render_out) {
    return evaluate(set, target, options, true, render_out);
}

} // namespace splatc
