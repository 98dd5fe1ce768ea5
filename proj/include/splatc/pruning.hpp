#pragma once

#include "splatc/splat_model.hpp"

#include <cstddef>
#include <optional>

namespace splatc {

enum class LuminanceMode {
    Rec601, // |0.299 r + 0.587 g + 0.114 b|
    L2Norm, // |c|_2
};

double luminance(const Vec3& color, LuminanceMode mode = LuminanceMode::Rec601);

struct PruneConfig {
    double luminance_threshold = 0.0;
    double max_prune_fraction = 0.95;
    double schedule_fraction = 0.7;
    /// When set, the threshold is chosen by bisection to prune this fraction
    /// of the alive splats instead of using luminance_threshold.
    std::optional<double> target_ratio;
    LuminanceMode mode = LuminanceMode::Rec601;

    void check() const;
};

struct PruneStats {
    std::size_t pruned_count = 0;
    std::size_t alive_before = 0;
    double pruning_ratio = 0.0;
    double threshold_used = 0.0;
};

struct PruneResult {
    SplatSet set;
    PruneStats stats;
};

/// Marks dead every alive splat with luminance strictly below the threshold,
/// lowest luminance first (ties by lower index), stopping at
/// floor(max_prune_fraction * n_alive).
PruneResult prune(const SplatSet& set, const PruneConfig& config);

/// Threshold whose pruning ratio is closest to `ratio` (bisection on the
/// threshold; the achievable ratios are multiples of 1/n_alive).
double threshold_for_ratio(const SplatSet& set, double ratio, LuminanceMode mode = LuminanceMode::Rec601,
                           double max_prune_fraction = 1.0);

} // namespace splatc
