#include "splatc/corpus.hpp"

#include "splatc/image_io.hpp"
#include "splatc/renderer.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace splatc {

namespace {

ImageBuffer make_gradient(std::uint64_t seed, int w, int h) {
    // Golden-ratio steps spread the direction evenly over seeds; seed 0 is horizontal.
    const double a = 2.0 * std::numbers::pi * std::fmod(static_cast<double>(seed) * 0.6180339887498949, 1.0);
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w;
            const double v = (y + 0.5) / h;
            const double t = 0.5 + 0.5 * ((u - 0.5) * ca + (v - 0.5) * sa) * std::numbers::sqrt2;
            img.at(x, y, 0) = static_cast<float>(0.1 + 0.8 * t);
            img.at(x, y, 1) = static_cast<float>(0.1 + 0.8 * v);
            img.at(x, y, 2) = static_cast<float>(0.1 + 0.8 * (1.0 - u));
        }
    }
    return img;
}

ImageBuffer make_checker(std::uint64_t seed, int w, int h) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tone(0.1, 0.9);
    const std::array<double, 3> dark{tone(rng) * 0.5, tone(rng) * 0.5, tone(rng) * 0.5};
    const std::array<double, 3> light{0.5 + tone(rng) * 0.5, 0.5 + tone(rng) * 0.5, 0.5 + tone(rng) * 0.5};
    constexpr int kSquares = 8;
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int cx = x * kSquares / w;
            const int cy = y * kSquares / h;
            const auto& c = ((cx + cy) % 2 == 0) ? dark : light;
            for (int ch = 0; ch < 3; ++ch) {
                img.at(x, y, ch) = static_cast<float>(c[static_cast<std::size_t>(ch)]);
            }
        }
    }
    return img;
}

SyntheticImage make_blobs(std::uint64_t seed, int w, int h) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.1, 0.9);
    std::uniform_real_distribution<double> sigma(0.04, 0.12);
    std::uniform_real_distribution<double> shear(-0.04, 0.04);
    std::uniform_real_distribution<double> tone(0.1, 1.0);
    SplatSet truth(w, h);
    for (std::size_t i = 0; i < kBlobCount; ++i) {
        Gaussian2D g;
        g.mu = {pos(rng), pos(rng)};
        g.chol = {inverse_softplus(sigma(rng)), shear(rng), inverse_softplus(sigma(rng))};
        g.color = {tone(rng), tone(rng), tone(rng)};
        truth.push_back(g);
    }
    ImageBuffer img = render_tiled(truth, kDefaultTileSize, 1);
    const float peak = *std::max_element(img.data().begin(), img.data().end());
    if (peak > 1.0f) {
        // The render is linear in color, so rescaling keeps the truth exact.
        const double scale = 1.0 / static_cast<double>(peak);
        for (Gaussian2D& g : truth.gaussians) {
            for (double& c : g.color) {
                c *= scale;
            }
        }
        img = render_tiled(truth, kDefaultTileSize, 1);
    }
    return {img.clamped(), truth};
}

ImageBuffer make_bandlimited_noise(std::uint64_t seed, int w, int h) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(-6.0, 6.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    constexpr int kWaves = 12;
    std::vector<double> field(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0.0);
    for (int ch = 0; ch < 3; ++ch) {
        for (int k = 0; k < kWaves; ++k) {
            const double fx = freq(rng);
            const double fy = freq(rng);
            const double ph = phase(rng);
            const double a = amp(rng);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double u = (x + 0.5) / w;
                    const double v = (y + 0.5) / h;
                    field[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) *
                              3 +
                          static_cast<std::size_t>(ch)] += a * std::sin(2.0 * std::numbers::pi * (fx * u + fy * v) + ph);
                }
            }
        }
    }
    const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
    const double span = std::max(*hi - *lo, 1e-12);
    std::vector<float> data(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        data[i] = static_cast<float>(0.1 + 0.8 * (field[i] - *lo) / span);
    }
    return ImageBuffer(w, h, std::move(data));
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidConfig, "manifest: bad value for " + key + ": '" + text + "'");
    }
    return value;
}

std::vector<std::uint8_t> fetch_url(const std::string& url, const std::string& name) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::FetchFailed, name + ": malformed url " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    try {
        httplib::Client client(origin);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res) {
            throw Error(ErrorCode::FetchFailed, name + ": " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::FetchFailed, name + ": HTTP " + std::to_string(res->status));
        }
        return {res->body.begin(), res->body.end()};
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::FetchFailed, name + ": " + e.what());
    }
}

ImageBuffer checked_image(const CorpusEntry& entry, std::span<const std::uint8_t> bytes) {
    const std::string digest = sha256_hex(bytes);
    if (digest != entry.sha256) {
        throw Error(ErrorCode::ChecksumMismatch, entry.name + ": expected " + entry.sha256 + ", got " + digest);
    }
    ImageBuffer img = decode_image(bytes);
    if ((entry.width != 0 && img.width() != entry.width) || (entry.height != 0 && img.height() != entry.height)) {
        throw Error(ErrorCode::DimensionMismatch, entry.name + ": unexpected image size");
    }
    return img;
}

} // namespace

SyntheticImage generate_synthetic(std::string_view name, std::uint64_t seed, int width, int height) {
    if (name == "gradient") {
        return {make_gradient(seed, width, height), std::nullopt};
    }
    if (name == "checker") {
        return {make_checker(seed, width, height), std::nullopt};
    }
    if (name == "gaussian-blobs") {
        return make_blobs(seed, width, height);
    }
    if (name == "bandlimited-noise") {
        return {make_bandlimited_noise(seed, width, height), std::nullopt};
    }
    throw Error(ErrorCode::UnknownName, "no synthetic generator named '" + std::string(name) + "'");
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    CorpusManifest manifest;
    manifest.base_dir = base_dir;
    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        CorpusEntry entry;
        std::string source = "synthetic";
        std::istringstream fields(line);
        std::string field;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) {
                throw Error(ErrorCode::InvalidConfig, "manifest line " + std::to_string(line_no) + ": expected key=value");
            }
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "name") {
                entry.name = value;
            } else if (key == "source") {
                source = value;
            } else if (key == "generator") {
                entry.generator = value;
            } else if (key == "seed") {
                entry.seed = parse_number<std::uint64_t>(value, key);
            } else if (key == "path" || key == "url") {
                entry.location = value;
            } else if (key == "sha256") {
                entry.sha256 = value;
                std::transform(entry.sha256.begin(), entry.sha256.end(), entry.sha256.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            } else if (key == "width") {
                entry.width = parse_number<int>(value, key);
            } else if (key == "height") {
                entry.height = parse_number<int>(value, key);
            } else {
                throw Error(ErrorCode::InvalidConfig, "manifest line " + std::to_string(line_no) + ": unknown key " + key);
            }
        }
        if (entry.name.empty()) {
            throw Error(ErrorCode::InvalidConfig, "manifest line " + std::to_string(line_no) + ": missing name");
        }
        if (source == "synthetic") {
            entry.source = SourceKind::Synthetic;
            if (entry.generator.empty()) {
                entry.generator = entry.name;
            }
            if (entry.width == 0 || entry.height == 0) {
                entry.width = entry.width == 0 ? 224 : entry.width;
                entry.height = entry.height == 0 ? 224 : entry.height;
            }
        } else if (source == "local" || source == "url") {
            entry.source = source == "local" ? SourceKind::LocalPath : SourceKind::Url;
            if (entry.location.empty()) {
                throw Error(ErrorCode::InvalidConfig, entry.name + ": missing path/url");
            }
            if (entry.sha256.size() != 64 ||
                entry.sha256.find_first_not_of("0123456789abcdef") != std::string::npos) {
                throw Error(ErrorCode::InvalidConfig, entry.name + ": sha256 must be 64 hex digits");
            }
        } else {
            throw Error(ErrorCode::InvalidConfig, entry.name + ": unknown source '" + source + "'");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                          path.parent_path());
}

CorpusManifest synthetic_manifest(int width, int height, std::uint64_t seed) {
    CorpusManifest m;
    for (const std::string_view name : kSyntheticNames) {
        CorpusEntry e;
        e.name = std::string(name);
        e.generator = e.name;
        e.seed = seed;
        e.width = width;
        e.height = height;
        m.entries.push_back(std::move(e));
    }
    return m;
}

std::vector<CorpusImage> resolve(const CorpusManifest& manifest, const std::filesystem::path& cache_dir) {
    std::vector<CorpusImage> out;
    out.reserve(manifest.entries.size());
    for (const CorpusEntry& entry : manifest.entries) {
        switch (entry.source) {
        case SourceKind::Synthetic:
            out.push_back({entry.name, generate_synthetic(entry.generator, entry.seed, entry.width, entry.height).image});
            break;
        case SourceKind::LocalPath: {
            std::filesystem::path p = entry.location;
            if (p.is_relative() && !manifest.base_dir.empty()) {
                p = manifest.base_dir / p;
            }
            out.push_back({entry.name, checked_image(entry, read_file(p))});
            break;
        }
        case SourceKind::Url: {
            const std::filesystem::path cached = cache_dir / (entry.sha256 + ".png");
            if (std::filesystem::exists(cached)) {
                out.push_back({entry.name, checked_image(entry, read_file(cached))});
                break;
            }
            const auto bytes = fetch_url(entry.location, entry.name);
            ImageBuffer img = checked_image(entry, bytes);
            std::filesystem::create_directories(cache_dir);
            write_file_atomic(cached, bytes);
            out.push_back({entry.name, std::move(img)});
            break;
        }
        }
    }
    return out;
}

ImageBuffer downsample2x(const ImageBuffer& image) {
    const int w = std::max(1, image.width() / 2);
    const int h = std::max(1, image.height() / 2);
    ImageBuffer out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < 3; ++ch) {
                const int x0 = std::min(2 * x, image.width() - 1);
                const int x1 = std::min(2 * x + 1, image.width() - 1);
                const int y0 = std::min(2 * y, image.height() - 1);
                const int y1 = std::min(2 * y + 1, image.height() - 1);
                out.at(x, y, ch) =
                    0.25f * (image.at(x0, y0, ch) + image.at(x1, y0, ch) + image.at(x0, y1, ch) + image.at(x1, y1, ch));
            }
        }
    }
    return out;
}

} // namespace splatc
