#include "fd_check.hpp"
#include "splatc/gradients.hpp"
#include "splatc/renderer.hpp"

#include <gtest/gtest.h>

using namespace splatc;
using namespace splatc::tsupport;

TEST(Gradients, LossOfPerfectFitIsZero) {
    SplatSet s(12, 12);
    s.push_back(Gaussian2D::isotropic({0.5, 0.5}, 0.2, {0, 0, 0}));
    EXPECT_EQ(loss(s, ImageBuffer(12, 12)), 0.0);
    EXPECT_EQ(loss(SplatSet(8, 8), ImageBuffer(8, 8)), 0.0);
}

TEST(Gradients, LossClosedFormOnFourByFour) {
    // One splat on 4x4, target (x + y + ch) / 10, l1 weight 0.1. Reference
    // value from an explicit per-pixel evaluation with a matrix inverse.
    SplatSet s(4, 4);
    s.push_back(Gaussian2D::make({0.4, 0.6}, {inverse_softplus(0.3), 0.1, inverse_softplus(0.2)}, {0.8, -0.2, 0.5}));
    ImageBuffer t(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            for (int c = 0; c < 3; ++c) {
                t.at(x, y, c) = static_cast<float>((x + y + c) / 10.0);
            }
        }
    }
    EXPECT_NEAR(loss(s, t, {.l1_weight = 0.1}), 0.30619357643255085, 1e-12);
    EXPECT_NEAR(loss(s, t), 0.30619357643255085 - 0.15, 1e-12);
}

TEST(Gradients, DimensionMismatch) {
    try {
        (void)loss(SplatSet(8, 8), ImageBuffer(8, 9));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
    EXPECT_THROW((void)backward(SplatSet(8, 8), ImageBuffer(9, 8)), Error);
}

TEST(Gradients, ZeroResidualGivesZeroGradients) {
    std::mt19937_64 rng(1);
    SplatSet s = random_set(rng, 20, 20, 6);
    for (Gaussian2D& g : s.gaussians) {
        g.color = {0, 0, 0};
    }
    const BackwardResult r = backward(s, ImageBuffer(20, 20));
    EXPECT_EQ(r.loss, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(r.grads.d_mu[i], (Vec2{0, 0}));
        EXPECT_EQ(r.grads.d_chol[i], (Vec3{0, 0, 0}));
        EXPECT_EQ(r.grads.d_color[i], (Vec3{0, 0, 0}));
    }
}

TEST(Gradients, NearPerfectReconstructionHasTinyGradients) {
    // The target is the render stored in float, so the residual is at float rounding level.
    std::mt19937_64 rng(2);
    const SplatSet s = random_set(rng, 24, 24, 8);
    const BackwardResult r = backward(s, render_tiled(s));
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (double v : r.grads.d_mu[i]) {
            EXPECT_LT(std::fabs(v), 1e-6);
        }
        for (double v : r.grads.d_chol[i]) {
            EXPECT_LT(std::fabs(v), 1e-6);
        }
        for (double v : r.grads.d_color[i]) {
            EXPECT_LT(std::fabs(v), 1e-6);
        }
    }
}

TEST(Gradients, L1TermGradientIsSignOverAliveCount) {
    std::mt19937_64 rng(3);
    RandomSetOptions o;
    o.color_min = -1.0;
    SplatSet s = random_set(rng, 24, 24, 7, o);
    s.gaussians[2].color[1] = 0.0; // sign(0) = 0
    s.alive[5] = false;
    const double lambda = 0.03;
    for (const ImageBuffer& target : {random_image(rng, 24, 24), ImageBuffer(24, 24, 0.5f)}) {
        const BackwardResult with = backward(s, target, {.l1_weight = lambda});
        const BackwardResult without = backward(s, target, {.l1_weight = 0.0});
        for (std::size_t i = 0; i < s.size(); ++i) {
            EXPECT_EQ(with.grads.d_mu[i], without.grads.d_mu[i]);
            EXPECT_EQ(with.grads.d_chol[i], without.grads.d_chol[i]);
            for (std::size_t c = 0; c < 3; ++c) {
                const double col = s.gaussians[i].color[c];
                const double sign = col > 0 ? 1.0 : (col < 0 ? -1.0 : 0.0);
                const double expected = s.alive[i] ? lambda / 6.0 * sign : 0.0;
                EXPECT_NEAR(with.grads.d_color[i][c] - without.grads.d_color[i][c], expected, 1e-15);
            }
        }
    }
}

TEST(Gradients, DeadSplatsHaveExactlyZeroGradients) {
    std::mt19937_64 rng(4);
    SplatSet s = random_set(rng, 24, 24, 6);
    s.alive[1] = false;
    s.alive[4] = false;
    const BackwardResult r = backward(s, random_image(rng, 24, 24), {.l1_weight = 0.1});
    for (std::size_t i : {1u, 4u}) {
        EXPECT_EQ(r.grads.d_mu[i], (Vec2{0, 0}));
        EXPECT_EQ(r.grads.d_chol[i], (Vec3{0, 0, 0}));
        EXPECT_EQ(r.grads.d_color[i], (Vec3{0, 0, 0}));
    }
    EXPECT_NE(r.grads.d_color[0], (Vec3{0, 0, 0}));
}

TEST(Gradients, BackwardLossEqualsLossBitExactly) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const SplatSet s = random_set(rng, 37, 29, 20);
        const ImageBuffer target = random_image(rng, 37, 29);
        const LossOptions opt{.l1_weight = 0.01 * t, .tile_size = 8};
        EXPECT_EQ(backward(s, target, opt).loss, loss(s, target, opt));
    }
}

TEST(Gradients, RenderOutputMatchesRenderTiled) {
    std::mt19937_64 rng(6);
    const SplatSet s = random_set(rng, 40, 30, 25);
    ImageBuffer out(40, 30);
    (void)backward(s, random_image(rng, 40, 30), {}, &out);
    EXPECT_EQ(out, render_tiled(s));
}

TEST(Gradients, DeterministicAcrossWorkers) {
    std::mt19937_64 rng(7);
    const SplatSet s = random_set(rng, 80, 64, 150);
    const ImageBuffer target = random_image(rng, 80, 64);
    const BackwardResult a = backward(s, target, {.workers = 1});
    for (int w : {2, 5}) {
        const BackwardResult b = backward(s, target, {.workers = w});
        EXPECT_EQ(a.loss, b.loss);
        EXPECT_EQ(a.grads.d_mu, b.grads.d_mu);
        EXPECT_EQ(a.grads.d_chol, b.grads.d_chol);
        EXPECT_EQ(a.grads.d_color, b.grads.d_color);
    }
}

TEST(Gradients, FiniteDifferencesSmallInstance) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        const FdInstance inst = random_fd_instance(rng, 4);
        const FdReport r = fd_check(inst.set, inst.target, inst.options);
        EXPECT_LT(r.max_rel_error, 1e-5) << "instance " << t << " splat " << r.worst_splat << " param "
                                         << r.worst_param << " analytic " << r.analytic << " fd " << r.numeric;
    }
}

TEST(Gradients, FiniteDifferencesHundredInstances) {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<std::size_t> count(1, 8);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const FdInstance inst = random_fd_instance(rng, count(rng));
        worst = std::max(worst, fd_check(inst.set, inst.target, inst.options).max_rel_error);
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Gradients, FiniteDifferencesAcrossTiles) {
    // Several tiles and ragged edges exercise the per-tile partial merge.
    std::mt19937_64 rng(41);
    RandomSetOptions o;
    o.sigma_min = 0.05;
    o.sigma_max = 0.15;
    for (int t = 0; t < 3; ++t) {
        const SplatSet s = random_set(rng, 37, 29, 6, o);
        const ImageBuffer target = random_image(rng, 37, 29);
        const FdReport r = fd_check(s, target, {.l1_weight = 0.0, .tile_size = 8, .workers = 3});
        EXPECT_LT(r.max_rel_error, 1e-4) << "splat " << r.worst_splat << " param " << r.worst_param;
    }
}
