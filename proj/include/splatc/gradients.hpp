#pragma once

#include "splatc/renderer.hpp"
#include "splatc/splat_model.hpp"

#include <vector>

namespace splatc {

/// dL/d(parameter) for every splat, in the unconstrained parameter space.
struct GradientSet {
    std::vector<Vec2> d_mu;
    std::vector<Vec3> d_chol;
    std::vector<Vec3> d_color;

    explicit GradientSet(std::size_t n = 0) : d_mu(n, Vec2{}), d_chol(n, Vec3{}), d_color(n, Vec3{}) {}
    std::size_t size() const { return d_mu.size(); }
};

struct LossOptions {
    double l1_weight = 0.0;
    int tile_size = kDefaultTileSize;
    int workers = 0;
};

/// MSE(render_tiled(set), target) over all H*W*3 entries, plus
/// l1_weight / n_alive * sum over alive splats of |c|_1.
double loss(const SplatSet& set, const ImageBuffer& target, const LossOptions& options = {});

struct BackwardResult {
    double loss = 0.0;
    GradientSet grads;
};

/// Loss and its exact gradient. The forward function is the tile-culled one
/// used by render_tiled, evaluated in double precision. When `render_out` is
/// given it receives the (unclamped) reconstruction.
BackwardResult backward(const SplatSet& set, const ImageBuffer& target, const LossOptions& options = {},
                        ImageBuffer* render_out = nullptr);

} // namespace splatc
