#pragma once

#include "splatc/pruning.hpp"
#include "splatc/renderer.hpp"
#include "splatc/splat_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace splatc {

enum class InitStrategy { Structured, Random };

std::string_view to_string(InitStrategy s);
InitStrategy parse_init_strategy(std::string_view text);

struct FitConfig {
    std::size_t num_gaussians = 400;
    std::size_t iterations = 3000;
    // Position and shear steps are in units of the structured-init cell
    // sigma, so one setting behaves alike at every splat density. The
    // diagonal Cholesky entries pass through softplus, which already makes
    // their steps relative to the splat size.
    double lr_mu = 0.04;
    double lr_chol = 1e-2;   // diagonal entries l11, l22
    double lr_shear = 0.1;   // off-diagonal entry l21
    double lr_color = 1e-2;
    double l1_weight = 0.0;
    InitStrategy init_strategy = InitStrategy::Structured;
    /// Structured-init standard deviation as a fraction of the short cell side
    /// (0.5 puts the 1-sigma contour on the inscribed circle).
    double init_sigma_scale = 0.5;
    std::optional<PruneConfig> prune;
    std::uint64_t seed = 0;
    int tile_size = kDefaultTileSize;
    int workers = 0;
    std::size_t log_every = 50;

    /// Scales every group from one rate; lr = 1e-2 gives the defaults.
    void set_learning_rate(double lr) {
        lr_mu = 4.0 * lr;
        lr_shear = 10.0 * lr;
        lr_chol = lr_color = lr;
    }
    void check() const;
};

struct FitReport {
    std::vector<std::size_t> logged_iterations;
    std::vector<double> loss_trajectory;
    std::vector<double> psnr_trajectory;
    std::vector<std::size_t> alive_counts;
    double initial_psnr = 0.0;
    double final_psnr = 0.0;
    double wall_time = 0.0;
    std::optional<PruneStats> prune_stats;
};

struct FitResult {
    SplatSet set;
    FitReport report;
};

/// Grid shape used by structured init: rows = round(sqrt(n*H/W)), cols = ceil(n/rows).
struct GridShape {
    std::size_t rows;
    std::size_t cols;
};
GridShape structured_grid(int width, int height, std::size_t num_gaussians);

/// Splat sigma (normalized units) for structured init of n splats.
double structured_sigma(int width, int height, std::size_t num_gaussians, double sigma_scale = 0.5);

SplatSet init_structured(const ImageBuffer& target, std::size_t num_gaussians, double sigma_scale = 0.5);
SplatSet init_random(const ImageBuffer& target, std::size_t num_gaussians, std::uint64_t seed,
                     double sigma_scale = 0.5);

/// Adam fit of a splat set to `target`. Returns the compacted set.
FitResult fit(const ImageBuffer& target, const FitConfig& config);

/// Fits every target; element k equals fit(targets[k], config with seed + k).
std::vector<FitResult> fit_batch(std::span<const ImageBuffer> targets, const FitConfig& config);

} // namespace splatc
