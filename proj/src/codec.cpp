#include "splatc/codec.hpp"

#include "splatc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace splatc {

std::uint16_t double_to_half(double value) {
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::OutOfRange, "non-finite value has no half encoding");
    }
    const std::uint16_t sign = std::signbit(value) ? 0x8000 : 0x0000;
    const double a = std::abs(value);
    if (a == 0.0) {
        return sign;
    }
    int k = 0;
    std::frexp(a, &k); // a = m * 2^k, m in [0.5, 1)
    int e = k - 1;
    if (e < -14) {
        // Subnormal: units of 2^-24. Scaling is exact, nearbyint rounds to even.
        const double q = std::nearbyint(std::ldexp(a, 24));
        return static_cast<std::uint16_t>(sign | static_cast<std::uint16_t>(q));
    }
    double mant = std::nearbyint(std::ldexp(a, 10 - e)); // [1024, 2048]
    if (mant == 2048.0) {
        mant = 1024.0;
        ++e;
    }
    if (e > 15) {
        throw Error(ErrorCode::OutOfRange, "value " + std::to_string(value) + " exceeds the half range");
    }
    return static_cast<std::uint16_t>(sign | static_cast<std::uint16_t>((e + 15) << 10) |
                                      static_cast<std::uint16_t>(static_cast<int>(mant) - 1024));
}

double half_to_double(std::uint16_t bits) {
    const double sign = (bits & 0x8000) != 0 ? -1.0 : 1.0;
    const int exponent = (bits >> 10) & 0x1f;
    const int fraction = bits & 0x3ff;
    if (exponent == 0) {
        return sign * std::ldexp(static_cast<double>(fraction), -24);
    }
    if (exponent == 31) {
        return fraction == 0 ? sign * std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::quiet_NaN();
    }
    return sign * std::ldexp(static_cast<double>(fraction + 1024), exponent - 25);
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

constexpr std::array<std::uint8_t, 4> kMagic{'G', 'S', '2', 'F'};

} // namespace

std::vector<std::uint8_t> encode_gsf(const SplatSet& set, const EncodeOptions& options) {
    ensure_valid(set);
    if (set.width > 0xffff || set.height > 0xffff) {
        throw Error(ErrorCode::OutOfRange, "GSF dimensions are limited to 65535");
    }
    const std::size_t count = set.alive_count();
    if (count > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::OutOfRange, "too many splats for GSF");
    }

    std::vector<std::uint8_t> out;
    out.reserve(kGsfHeaderBytes + count * kBytesPerSplat);
    for (const std::uint8_t b : kMagic) {
        out.push_back(b);
    }
    put_u16(out, kGsfVersion);
    put_u16(out, static_cast<std::uint16_t>(set.width));
    put_u16(out, static_cast<std::uint16_t>(set.height));
    put_u32(out, static_cast<std::uint32_t>(count));
    put_u16(out, options.clamp_colors ? kGsfFlagClampedColors : 0);

    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.alive[i]) {
            continue;
        }
        const Gaussian2D& g = set.gaussians[i];
        auto color = g.color;
        if (options.clamp_colors) {
            for (double& c : color) {
                c = std::clamp(c, 0.0, 1.0);
            }
        }
        const std::array<double, 8> values{g.mu[0],   g.mu[1],   g.chol[0], g.chol[1],
                                           g.chol[2], color[0], color[1], color[2]};
        for (std::size_t p = 0; p < values.size(); ++p) {
            try {
                put_u16(out, double_to_half(values[p]));
            } catch (const Error& e) {
                throw Error(ErrorCode::OutOfRange, e.what(), i * 8 + p);
            }
        }
    }
    return out;
}

GsfHeader read_gsf_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size()) {
        throw Error(ErrorCode::TruncatedPayload, "file shorter than the magic number");
    }
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw Error(ErrorCode::BadMagic, "not a GSF file");
    }
    if (bytes.size() < kGsfHeaderBytes) {
        throw Error(ErrorCode::TruncatedPayload, "file shorter than the 16-byte header");
    }
    GsfHeader h;
    h.version = get_u16(bytes, 4);
    h.width = get_u16(bytes, 6);
    h.height = get_u16(bytes, 8);
    h.count = get_u32(bytes, 10);
    h.flags = get_u16(bytes, 14);
    if (h.version != kGsfVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "GSF version " + std::to_string(h.version));
    }
    if ((h.flags & ~kGsfFlagClampedColors) != 0) {
        throw Error(ErrorCode::UnsupportedVersion, "reserved flag bits set");
    }
    if (h.width == 0 || h.height == 0) {
        throw Error(ErrorCode::SizeMismatch, "zero image dimension");
    }
    const std::uint64_t expected = kGsfHeaderBytes + static_cast<std::uint64_t>(h.count) * kBytesPerSplat;
    if (bytes.size() < expected) {
        throw Error(ErrorCode::TruncatedPayload, "payload holds " + std::to_string(bytes.size() - kGsfHeaderBytes) +
                                                     " bytes, header promises " +
                                                     std::to_string(expected - kGsfHeaderBytes));
    }
    if (bytes.size() > expected) {
        throw Error(ErrorCode::SizeMismatch, "trailing bytes after payload");
    }
    return h;
}

SplatSet decode_gsf(std::span<const std::uint8_t> bytes) {
    const GsfHeader h = read_gsf_header(bytes);
    SplatSet set(h.width, h.height);
    set.gaussians.reserve(h.count);
    for (std::uint32_t i = 0; i < h.count; ++i) {
        std::array<double, 8> v{};
        for (std::size_t p = 0; p < v.size(); ++p) {
            v[p] = half_to_double(get_u16(bytes, kGsfHeaderBytes + (static_cast<std::size_t>(i) * 8 + p) * 2));
        }
        Gaussian2D g{{v[0], v[1]}, {v[2], v[3], v[4]}, {v[5], v[6], v[7]}};
        if (!g.finite()) {
            throw Error(ErrorCode::NonFinite, "non-finite half value in payload", i);
        }
        set.push_back(g);
    }
    return set;
}

ImageBuffer decode_to_image(std::span<const std::uint8_t> bytes, int tile_size, int workers) {
    return render_tiled(decode_gsf(bytes), tile_size, workers).clamped();
}

} // namespace splatc
