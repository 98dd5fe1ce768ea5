#pragma once

#include "splatc/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace splatc {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
};

inline double softplus(double x) {
    // log1p(exp(x)) without overflow for large x
    return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// d softplus / dx
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Inverse of softplus for y > 0.
inline double inverse_softplus(double y) {
    return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

/// One colored anisotropic Gaussian.
///
/// `mu` lives in normalized image coordinates. `chol` holds the unconstrained
/// lower-triangular factor parameters (l11, l21, l22); the covariance is
/// L * L^T with L = [[softplus(l11), 0], [l21, softplus(l22)]], so any finite
/// parameter vector yields an SPD covariance. `color` is unconstrained.
struct Gaussian2D {
    Vec2 mu{0.5, 0.5};
    Vec3 chol{0.0, 0.0, 0.0};
    Vec3 color{0.0, 0.0, 0.0};

    bool finite() const;

    /// Builds a splat and rejects NaN/Inf parameters.
    static Gaussian2D make(Vec2 mu, Vec3 chol, Vec3 color);
    /// Isotropic splat with standard deviation `sigma` (normalized units).
    static Gaussian2D isotropic(Vec2 mu, double sigma, Vec3 color);

    bool operator==(const Gaussian2D&) const = default;
};

/// Cholesky factor after activation: L = [[s1, 0], [l21, s2]].
struct CholFactor {
    double s1;
    double l21;
    double s2;
};

CholFactor activated_factor(const Gaussian2D& g);

/// Sigma = L * L^T.
Sym2 covariance_of(const Gaussian2D& g);

/// Dense H x W x 3 float image, row-major, channels interleaved.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, float fill = 0.0f);
    ImageBuffer(int width, int height, std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    float& at(int x, int y, int ch) { return data_[index(x, y, ch)]; }
    float at(int x, int y, int ch) const { return data_[index(x, y, ch)]; }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    bool all_finite() const;
    ImageBuffer clamped() const;

    bool operator==(const ImageBuffer&) const = default;

private:
    std::size_t index(int x, int y, int ch) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(ch);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// The fitted representation of one image. Pruned splats stay in place with
/// their mask bit cleared until `compact` removes them.
struct SplatSet {
    int width = 1;
    int height = 1;
    std::vector<Gaussian2D> gaussians;
    std::vector<bool> alive;

    SplatSet() = default;
    SplatSet(int w, int h) : width(w), height(h) {}
    SplatSet(int w, int h, std::vector<Gaussian2D> gs);

    std::size_t size() const { return gaussians.size(); }
    std::size_t alive_count() const;
    void push_back(const Gaussian2D& g);

    bool operator==(const SplatSet&) const = default;
};

/// Returns the first violated invariant, or nullopt when the set is valid.
std::optional<Error> validate(const SplatSet& set);
void ensure_valid(const SplatSet& set);

SplatSet compact(const SplatSet& set);

} // namespace splatc
