#include "splatc/fitter.hpp"

#include "splatc/adam.hpp"
#include "splatc/gradients.hpp"
#include "splatc/metrics.hpp"
#include "splatc/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace splatc {

std::string_view to_string(InitStrategy s) { return s == InitStrategy::Structured ? "structured" : "random"; }

InitStrategy parse_init_strategy(std::string_view text) {
    if (text == "structured") {
        return InitStrategy::Structured;
    }
    if (text == "random") {
        return InitStrategy::Random;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown init strategy '" + std::string(text) + "'");
}

void FitConfig::check() const {
    if (num_gaussians < 1) {
        throw Error(ErrorCode::InvalidConfig, "num_gaussians must be >= 1");
    }
    if (iterations < 1) {
        throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
    }
    if (!(lr_mu > 0.0 && lr_chol > 0.0 && lr_shear > 0.0 && lr_color > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "learning rates must be > 0");
    }
    if (!(l1_weight >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "l1 weight must be >= 0");
    }
    if (!(init_sigma_scale > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "init sigma scale must be > 0");
    }
    if (tile_size < 1) {
        throw Error(ErrorCode::InvalidConfig, "tile size must be >= 1");
    }
    if (log_every < 1) {
        throw Error(ErrorCode::InvalidConfig, "log interval must be >= 1");
    }
    if (prune) {
        prune->check();
    }
}

GridShape structured_grid(int width, int height, std::size_t num_gaussians) {
    const double aspect = static_cast<double>(height) / static_cast<double>(width);
    const auto rows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(num_gaussians) * aspect))));
    const std::size_t cols = (num_gaussians + rows - 1) / rows;
    return {rows, cols};
}

double structured_sigma(int width, int height, std::size_t num_gaussians, double sigma_scale) {
    const GridShape grid = structured_grid(width, height, num_gaussians);
    return sigma_scale * std::min(1.0 / static_cast<double>(grid.cols), 1.0 / static_cast<double>(grid.rows));
}

namespace {

// Pixel indices whose centers fall in [lo, hi) of normalized coordinates;
// falls back to the pixel under the interval midpoint when none do.
std::pair<int, int> pixel_range(double lo, double hi, int extent) {
    int first = std::max(0, static_cast<int>(std::ceil(lo * extent - 0.5)));
    int last = std::min(extent, static_cast<int>(std::ceil(hi * extent - 0.5)));
    if (first >= last) {
        first = std::clamp(static_cast<int>(std::floor(0.5 * (lo + hi) * extent)), 0, extent - 1);
        last = first + 1;
    }
    return {first, last};
}

} // namespace

SplatSet init_structured(const ImageBuffer& target, std::size_t num_gaussians, double sigma_scale) {
    if (num_gaussians < 1) {
        throw Error(ErrorCode::InvalidConfig, "num_gaussians must be >= 1");
    }
    const int w = target.width();
    const int h = target.height();
    const GridShape grid = structured_grid(w, h, num_gaussians);
    const double sigma = structured_sigma(w, h, num_gaussians, sigma_scale);
    const double cw = 1.0 / static_cast<double>(grid.cols);
    const double ch = 1.0 / static_cast<double>(grid.rows);

    SplatSet set(w, h);
    set.gaussians.reserve(num_gaussians);
    for (std::size_t k = 0; k < num_gaussians; ++k) {
        const std::size_t row = k / grid.cols;
        const std::size_t col = k % grid.cols;
        const auto [x0, x1] = pixel_range(static_cast<double>(col) * cw, static_cast<double>(col + 1) * cw, w);
        const auto [y0, y1] = pixel_range(static_cast<double>(row) * ch, static_cast<double>(row + 1) * ch, h);
        Vec3 mean{0.0, 0.0, 0.0};
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                for (int c = 0; c < 3; ++c) {
                    mean[static_cast<std::size_t>(c)] += target.at(x, y, c);
                }
            }
        }
        const double count = static_cast<double>((x1 - x0) * (y1 - y0));
        for (double& m : mean) {
            m /= count;
        }
        set.push_back(Gaussian2D::isotropic({(static_cast<double>(col) + 0.5) * cw, (static_cast<double>(row) + 0.5) * ch},
                                            sigma, mean));
    }
    return set;
}

SplatSet init_random(const ImageBuffer& target, std::size_t num_gaussians, std::uint64_t seed, double sigma_scale) {
    if (num_gaussians < 1) {
        throw Error(ErrorCode::InvalidConfig, "num_gaussians must be >= 1");
    }
    const double base_sigma = structured_sigma(target.width(), target.height(), num_gaussians, sigma_scale);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.25, 1.0);

    SplatSet set(target.width(), target.height());
    set.gaussians.reserve(num_gaussians);
    for (std::size_t k = 0; k < num_gaussians; ++k) {
        Gaussian2D g;
        g.mu = {unit(rng), unit(rng)};
        g.chol = {inverse_softplus(scale(rng) * base_sigma), 0.0, inverse_softplus(scale(rng) * base_sigma)};
        g.color = {unit(rng), unit(rng), unit(rng)};
        set.push_back(g);
    }
    return set;
}

namespace {

constexpr std::size_t kParamsPerSplat = 8;

void pack(const SplatSet& set, std::vector<double>& flat) {
    flat.resize(set.size() * kParamsPerSplat);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Gaussian2D& g = set.gaussians[i];
        double* p = &flat[i * kParamsPerSplat];
        p[0] = g.mu[0];
        p[1] = g.mu[1];
        p[2] = g.chol[0];
        p[3] = g.chol[1];
        p[4] = g.chol[2];
        p[5] = g.color[0];
        p[6] = g.color[1];
        p[7] = g.color[2];
    }
}

void unpack(const std::vector<double>& flat, SplatSet& set) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        Gaussian2D& g = set.gaussians[i];
        const double* p = &flat[i * kParamsPerSplat];
        g.mu = {p[0], p[1]};
        g.chol = {p[2], p[3], p[4]};
        g.color = {p[5], p[6], p[7]};
    }
}

void pack_grads(const GradientSet& grads, std::vector<double>& flat) {
    flat.resize(grads.size() * kParamsPerSplat);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        double* p = &flat[i * kParamsPerSplat];
        p[0] = grads.d_mu[i][0];
        p[1] = grads.d_mu[i][1];
        p[2] = grads.d_chol[i][0];
        p[3] = grads.d_chol[i][1];
        p[4] = grads.d_chol[i][2];
        p[5] = grads.d_color[i][0];
        p[6] = grads.d_color[i][1];
        p[7] = grads.d_color[i][2];
    }
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

FitResult fit(const ImageBuffer& target, const FitConfig& config) {
    config.check();
    const auto start = std::chrono::steady_clock::now();

    SplatSet set = config.init_strategy == InitStrategy::Structured
                       ? init_structured(target, config.num_gaussians, config.init_sigma_scale)
                       : init_random(target, config.num_gaussians, config.seed, config.init_sigma_scale);

    const LossOptions options{config.l1_weight, config.tile_size,
                              config.workers > 0 ? config.workers : default_workers()};
    const std::size_t prune_at =
        config.prune ? static_cast<std::size_t>(std::floor(config.prune->schedule_fraction *
                                                           static_cast<double>(config.iterations)))
                     : config.iterations + 1;

    std::vector<double> params;
    std::vector<double> grads;
    pack(set, params);
    const double cell_sigma =
        structured_sigma(target.width(), target.height(), config.num_gaussians, config.init_sigma_scale);
    std::vector<double> lrs(params.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        double* lr = &lrs[i * kParamsPerSplat];
        lr[0] = lr[1] = config.lr_mu * cell_sigma;
        lr[2] = lr[4] = config.lr_chol;
        lr[3] = config.lr_shear * cell_sigma;
        lr[5] = lr[6] = lr[7] = config.lr_color;
    }
    Adam adam(params.size());

    FitResult result;
    FitReport& report = result.report;
    ImageBuffer render(target.width(), target.height());

    auto apply_prune = [&] {
        PruneResult pruned = prune(set, *config.prune);
        set = std::move(pruned.set);
        report.prune_stats = pruned.stats;
    };

    for (std::size_t it = 0; it < config.iterations; ++it) {
        if (it == prune_at) {
            apply_prune();
        }
        const bool log_now = it % config.log_every == 0 || it + 1 == config.iterations;
        BackwardResult step = backward(set, target, options, log_now ? &render : nullptr);
        pack_grads(step.grads, grads);
        if (!std::isfinite(step.loss) || !all_finite(grads)) {
            throw Error(ErrorCode::NonFiniteLoss, "optimization diverged", it);
        }
        if (log_now) {
            const double p = psnr(render, target);
            if (it == 0) {
                report.initial_psnr = p;
            }
            report.logged_iterations.push_back(it);
            report.loss_trajectory.push_back(step.loss);
            report.psnr_trajectory.push_back(p);
            report.alive_counts.push_back(set.alive_count());
        }
        adam.step(params, grads, lrs, [&](std::size_t slot) { return set.alive[slot / kParamsPerSplat]; });
        if (!all_finite(params)) {
            throw Error(ErrorCode::NonFiniteLoss, "parameters became non-finite", it);
        }
        unpack(params, set);
    }
    if (prune_at == config.iterations) {
        apply_prune();
    }

    result.set = compact(set);
    report.final_psnr = psnr(render_tiled(result.set, config.tile_size, options.workers), target);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<FitResult> fit_batch(std::span<const ImageBuffer> targets, const FitConfig& config) {
    config.check();
    for (const ImageBuffer& t : targets) {
        if (t.width() != targets.front().width() || t.height() != targets.front().height()) {
            throw Error(ErrorCode::MixedDimensions, "all targets in a batch must share width and height");
        }
    }
    std::vector<FitResult> results(targets.size());
    if (targets.empty()) {
        return results;
    }

    // Images run concurrently; leftover workers go to the per-image tile loops.
    // Fit output does not depend on the worker split.
    const int workers = config.workers > 0 ? config.workers : default_workers();
    const int outer = std::min<int>(workers, static_cast<int>(targets.size()));
    const int inner = std::max(1, workers / std::max(outer, 1));
    parallel_for(targets.size(), outer, [&](std::size_t k) {
        FitConfig local = config;
        local.seed = config.seed + k;
        local.workers = inner;
        results[k] = fit(targets[k], local);
    });
    return results;
}

} // namespace splatc
