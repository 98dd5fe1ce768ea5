#pragma once

#include "splatc/splat_model.hpp"

#include <cstddef>
#include <limits>

namespace splatc {

/// Bytes per splat in the float16 payload: 8 parameters x 2 bytes.
inline constexpr std::size_t kBytesPerSplat = 16;
inline constexpr std::size_t kGsfHeaderBytes = 16;

/// Mean squared error over all entries of two images clamped to [0,1].
double mse(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR for peak 1.0 on clamped images; +infinity when the images match.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR from an MSE value (+infinity at zero).
double psnr_from_mse(double mse);

/// Raw 24-bit RGB bytes divided by the float16 splat payload bytes.
double compression_ratio(int width, int height, std::size_t n_gaussians);

struct QualityReport {
    double mse = 0.0;
    double psnr_db = std::numeric_limits<double>::infinity();
    double compression_ratio = 0.0;
    double compression_ratio_with_header = 0.0;
    std::size_t n_gaussians = 0;
    std::size_t bytes_payload = 0;
    std::size_t bytes_total = 0;
};

QualityReport quality_report(const ImageBuffer& reference, const ImageBuffer& reconstruction,
                             std::size_t n_gaussians);

} // namespace splatc
