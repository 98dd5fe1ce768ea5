#include "splatc/splat_model.hpp"

#include <algorithm>

namespace splatc {

namespace {
template <std::size_t N>
bool all_finite(const std::array<double, N>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
} // namespace

bool Gaussian2D::finite() const { return all_finite(mu) && all_finite(chol) && all_finite(color); }

Gaussian2D Gaussian2D::make(Vec2 mu, Vec3 chol, Vec3 color) {
    Gaussian2D g{mu, chol, color};
    if (!g.finite()) {
        throw Error(ErrorCode::NonFinite, "gaussian parameters must be finite");
    }
    return g;
}

Gaussian2D Gaussian2D::isotropic(Vec2 mu, double sigma, Vec3 color) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::OutOfRange, "sigma must be positive");
    }
    const double raw = inverse_softplus(sigma);
    return make(mu, {raw, 0.0, raw}, color);
}

CholFactor activated_factor(const Gaussian2D& g) {
    return {softplus(g.chol[0]), g.chol[1], softplus(g.chol[2])};
}

Sym2 covariance_of(const Gaussian2D& g) {
    const auto [s1, l21, s2] = activated_factor(g);
    return {s1 * s1, s1 * l21, l21 * l21 + s2 * s2};
}

ImageBuffer::ImageBuffer(int width, int height, float fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)) * 3, fill) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::DimensionMismatch, "image dimensions must be >= 1");
    }
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw Error(ErrorCode::DimensionMismatch, "image data length must be width*height*3");
    }
    if (!all_finite()) {
        throw Error(ErrorCode::NonFinite, "image data must be finite");
    }
}

bool ImageBuffer::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

ImageBuffer ImageBuffer::clamped() const {
    ImageBuffer out = *this;
    for (float& v : out.data_) {
        v = std::clamp(v, 0.0f, 1.0f);
    }
    return out;
}

SplatSet::SplatSet(int w, int h, std::vector<Gaussian2D> gs)
    : width(w), height(h), gaussians(std::move(gs)), alive(gaussians.size(), true) {}

std::size_t SplatSet::alive_count() const {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
}

void SplatSet::push_back(const Gaussian2D& g) {
    gaussians.push_back(g);
    alive.push_back(true);
}

std::optional<Error> validate(const SplatSet& set) {
    if (set.width < 1 || set.height < 1) {
        return Error(ErrorCode::DimensionMismatch, "width and height must be >= 1");
    }
    if (set.alive.size() != set.gaussians.size()) {
        return Error(ErrorCode::DimensionMismatch, "alive mask length differs from gaussian count");
    }
    for (std::size_t i = 0; i < set.gaussians.size(); ++i) {
        if (!set.gaussians[i].finite()) {
            return Error(ErrorCode::NonFinite, "non-finite gaussian parameter", i);
        }
    }
    return std::nullopt;
}

void ensure_valid(const SplatSet& set) {
    if (auto err = validate(set)) {
        throw *err;
    }
}

SplatSet compact(const SplatSet& set) {
    SplatSet out(set.width, set.height);
    out.gaussians.reserve(set.alive_count());
    for (std::size_t i = 0; i < set.gaussians.size(); ++i) {
        if (set.alive[i]) {
            out.push_back(set.gaussians[i]);
        }
    }
    return out;
}

} // namespace splatc
