#include "splatc/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

namespace splatc {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::Io, "read failed for " + path.string());
    }
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::random_device rd;
    const std::filesystem::path tmp = path.string() + ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::Io, "cannot create " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorCode::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error(ErrorCode::Io, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::vector<std::uint8_t> to_rgb8(const ImageBuffer& image) {
    const auto data = image.data();
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = std::clamp(data[i], 0.0f, 1.0f);
        out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    return out;
}

ImageBuffer from_rgb8(int width, int height, std::span<const std::uint8_t> rgb) {
    std::vector<float> data(rgb.size());
    std::transform(rgb.begin(), rgb.end(), data.begin(), [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return ImageBuffer(width, height, std::move(data));
}

namespace {

// P6 header tokens separated by whitespace, '#' comments allowed.
class PpmHeader {
public:
    explicit PpmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    long next_number() {
        skip_space();
        long value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            ++pos_;
            if (++digits > 9) {
                throw Error(ErrorCode::Io, "PPM header number too large");
            }
        }
        if (digits == 0) {
            throw Error(ErrorCode::Io, "malformed PPM header");
        }
        return value;
    }

    std::size_t pos() const { return pos_; }
    void set_pos(std::size_t p) { pos_ = p; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_]) != 0) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes) {
    PpmHeader header(bytes);
    header.set_pos(2);
    const long width = header.next_number();
    const long height = header.next_number();
    const long maxval = header.next_number();
    if (width < 1 || height < 1 || width > 65535 || height > 65535) {
        throw Error(ErrorCode::Io, "PPM dimensions out of range");
    }
    if (maxval != 255) {
        throw Error(ErrorCode::Io, "only 8-bit PPM (maxval 255) is supported");
    }
    const std::size_t start = header.pos() + 1; // single whitespace byte after maxval
    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (start > bytes.size() || bytes.size() - start < need) {
        throw Error(ErrorCode::Io, "PPM pixel data truncated");
    }
    return from_rgb8(static_cast<int>(width), static_cast<int>(height), bytes.subspan(start, need));
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) == 0) {
        throw Error(ErrorCode::Io, std::string("PNG decode failed: ") + image.message);
    }
    const bool has_color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    if (!has_color || has_alpha) {
        png_image_free(&image);
        throw Error(ErrorCode::Io, "only RGB PNG images are supported (no grayscale or alpha)");
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr) == 0) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::Io, "PNG decode failed: " + msg);
    }
    return from_rgb8(static_cast<int>(image.width), static_cast<int>(image.height), rgb);
}

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

} // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
        return decode_png(bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
        return decode_ppm(bytes);
    }
    throw Error(ErrorCode::Io, "unrecognized image format (expected PNG or binary PPM)");
}

ImageBuffer read_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const auto rgb = to_rgb8(image);
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = PNG_FORMAT_RGB;
    const auto rgb = to_rgb8(image);
    png_alloc_size_t size = 0;
    if (png_image_write_to_memory(&png, nullptr, &size, 0, rgb.data(), 0, nullptr) == 0) {
        throw Error(ErrorCode::Io, std::string("PNG encode failed: ") + png.message);
    }
    std::vector<std::uint8_t> out(size);
    if (png_image_write_to_memory(&png, out.data(), &size, 0, rgb.data(), 0, nullptr) == 0) {
        throw Error(ErrorCode::Io, std::string("PNG encode failed: ") + png.message);
    }
    out.resize(size);
    return out;
}

void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    write_file_atomic(path, ext == ".png" ? encode_png(image) : encode_ppm(image));
}

} // namespace splatc
