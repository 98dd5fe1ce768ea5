#include "splatc/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace splatc {

double luminance(const Vec3& color, LuminanceMode mode) {
    switch (mode) {
    case LuminanceMode::Rec601:
        return std::abs(0.299 * color[0] + 0.587 * color[1] + 0.114 * color[2]);
    case LuminanceMode::L2Norm:
        return std::sqrt(color[0] * color[0] + color[1] * color[1] + color[2] * color[2]);
    }
    return 0.0;
}

void PruneConfig::check() const {
    if (!(luminance_threshold >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "luminance threshold must be >= 0");
    }
    if (!(max_prune_fraction >= 0.0 && max_prune_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "max prune fraction must lie in [0,1]");
    }
    if (!(schedule_fraction > 0.0 && schedule_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "schedule fraction must lie in (0,1]");
    }
    if (target_ratio && !(*target_ratio >= 0.0 && *target_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "target pruning ratio must lie in [0,1]");
    }
}

namespace {

struct Candidate {
    double lum;
    std::size_t index;
};

std::vector<Candidate> alive_by_luminance(const SplatSet& set, LuminanceMode mode) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.alive[i]) {
            out.push_back({luminance(set.gaussians[i].color, mode), i});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.lum < b.lum; });
    return out;
}

std::size_t prune_count(const std::vector<Candidate>& sorted, double threshold, std::size_t cap) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), threshold,
                                        [](const Candidate& c, double t) { return c.lum < t; });
    return std::min(static_cast<std::size_t>(below - sorted.begin()), cap);
}

std::size_t cap_for(std::size_t n_alive, double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_alive) + 1e-9));
}

} // namespace

double threshold_for_ratio(const SplatSet& set, double ratio, LuminanceMode mode, double max_prune_fraction) {
    const auto sorted = alive_by_luminance(set, mode);
    if (sorted.empty() || ratio <= 0.0) {
        return 0.0;
    }
    const std::size_t n = sorted.size();
    const std::size_t cap = cap_for(n, max_prune_fraction);
    const std::size_t wanted =
        std::min(cap, static_cast<std::size_t>(std::llround(std::clamp(ratio, 0.0, 1.0) * static_cast<double>(n))));
    if (wanted == 0) {
        return 0.0;
    }

    double lo = 0.0; // prunes fewer than wanted
    double hi = sorted.back().lum * 2.0 + 1.0;
    if (prune_count(sorted, lo, cap) >= wanted) {
        return lo;
    }
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (prune_count(sorted, mid, cap) >= wanted) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

PruneResult prune(const SplatSet& set, const PruneConfig& config) {
    config.check();
    ensure_valid(set);
    const auto sorted = alive_by_luminance(set, config.mode);
    const std::size_t cap = cap_for(sorted.size(), config.max_prune_fraction);
    const double threshold = config.target_ratio
                                 ? threshold_for_ratio(set, *config.target_ratio, config.mode, config.max_prune_fraction)
                                 : config.luminance_threshold;
    const std::size_t count = prune_count(sorted, threshold, cap);

    PruneResult result{set, {}};
    for (std::size_t k = 0; k < count; ++k) {
        result.set.alive[sorted[k].index] = false;
    }
    result.stats.pruned_count = count;
    result.stats.alive_before = sorted.size();
    result.stats.pruning_ratio = sorted.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(sorted.size());
    result.stats.threshold_used = threshold;
    return result;
}

} // namespace splatc
