#include "splatc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace splatc {

double mse(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::DimensionMismatch, "images differ in size");
    }
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(std::clamp(da[i], 0.0f, 1.0f)) -
                         static_cast<double>(std::clamp(db[i], 0.0f, 1.0f));
        sum += d * d;
    }
    return sum / static_cast<double>(da.size());
}

double psnr_from_mse(double value) {
    if (value <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / value);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) { return psnr_from_mse(mse(a, b)); }

double compression_ratio(int width, int height, std::size_t n_gaussians) {
    if (width < 1 || height < 1 || n_gaussians < 1) {
        throw Error(ErrorCode::OutOfRange, "compression ratio needs width, height and count >= 1");
    }
    const double raw = static_cast<double>(width) * static_cast<double>(height) * 3.0;
    return raw / (static_cast<double>(n_gaussians) * static_cast<double>(kBytesPerSplat));
}

QualityReport quality_report(const ImageBuffer& reference, const ImageBuffer& reconstruction,
                             std::size_t n_gaussians) {
    QualityReport r;
    r.mse = mse(reference, reconstruction);
    r.psnr_db = psnr_from_mse(r.mse);
    r.n_gaussians = n_gaussians;
    r.bytes_payload = n_gaussians * kBytesPerSplat;
    r.bytes_total = r.bytes_payload + kGsfHeaderBytes;
    const double raw = static_cast<double>(reference.width()) * reference.height() * 3.0;
    r.compression_ratio = n_gaussians > 0 ? compression_ratio(reference.width(), reference.height(), n_gaussians)
                                          : std::numeric_limits<double>::infinity();
    r.compression_ratio_with_header = raw / static_cast<double>(r.bytes_total);
    return r;
}

} // namespace splatc
