#pragma once

// Central finite-difference oracle for the loss gradient.

#include "splatc/gradients.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

namespace splatc::tsupport {

struct FdReport {
    double max_rel_error = 0.0;
    std::size_t worst_splat = 0;
    int worst_param = 0; // 0-1 mu, 2-4 chol, 5-7 color
    double analytic = 0.0;
    double numeric = 0.0;
};

inline double& param_ref(Gaussian2D& g, int p) {
    if (p < 2) {
        return g.mu[static_cast<std::size_t>(p)];
    }
    if (p < 5) {
        return g.chol[static_cast<std::size_t>(p - 2)];
    }
    return g.color[static_cast<std::size_t>(p - 5)];
}

inline double grad_ref(const GradientSet& gs, std::size_t i, int p) {
    if (p < 2) {
        return gs.d_mu[i][static_cast<std::size_t>(p)];
    }
    if (p < 5) {
        return gs.d_chol[i][static_cast<std::size_t>(p - 2)];
    }
    return gs.d_color[i][static_cast<std::size_t>(p - 5)];
}

inline FdReport fd_check(const SplatSet& set, const ImageBuffer& target, const LossOptions& options,
                         double step = 1e-6) {
    const GradientSet analytic = backward(set, target, options).grads;
    FdReport rep;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.alive[i]) {
            continue;
        }
        for (int p = 0; p < 8; ++p) {
            SplatSet plus = set;
            SplatSet minus = set;
            param_ref(plus.gaussians[i], p) += step;
            param_ref(minus.gaussians[i], p) -= step;
            const double fd = (loss(plus, target, options) - loss(minus, target, options)) / (2.0 * step);
            const double a = grad_ref(analytic, i, p);
            const double rel = std::fabs(a - fd) / (std::fabs(fd) + 1e-8);
            if (rel > rep.max_rel_error) {
                rep = {rel, i, p, a, fd};
            }
        }
    }
    return rep;
}

/// Random FD instance: n in [1, 8] splats on 16x16, random target in [0,1].
struct FdInstance {
    SplatSet set;
    ImageBuffer target;
    LossOptions options;
};

inline FdInstance random_fd_instance(std::mt19937_64& rng, std::size_t n) {
    RandomSetOptions o;
    o.sigma_min = 0.05;
    o.sigma_max = 0.3;
    o.color_min = -0.5;
    o.color_max = 1.0;
    FdInstance inst{random_set(rng, 16, 16, n, o), random_image(rng, 16, 16), {}};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    inst.options.l1_weight = u(rng) < 0.5 ? 0.0 : 0.05 * u(rng);
    inst.options.workers = 1;
    return inst;
}

} // namespace splatc::tsupport
