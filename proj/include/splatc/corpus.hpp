#pragma once

#include "splatc/splat_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splatc {

inline constexpr std::string_view kSyntheticNames[] = {"gradient", "checker", "gaussian-blobs", "bandlimited-noise"};

struct SyntheticImage {
    ImageBuffer image;
    /// Ground-truth splats for "gaussian-blobs"; empty otherwise.
    std::optional<SplatSet> truth;
};

/// Deterministic test image per (name, seed, size). Throws UnknownName.
SyntheticImage generate_synthetic(std::string_view name, std::uint64_t seed, int width = 224, int height = 224);

/// Number of splats used by the "gaussian-blobs" generator.
inline constexpr std::size_t kBlobCount = 24;

enum class SourceKind { Synthetic, LocalPath, Url };

struct CorpusEntry {
    std::string name;
    SourceKind source = SourceKind::Synthetic;
    std::string generator; // synthetic: generator name (defaults to `name`)
    std::uint64_t seed = 0;
    std::string location;  // local path (relative to the manifest) or URL
    std::string sha256;    // lowercase hex; required for non-synthetic entries
    int width = 0;         // synthetic: output size; others: expected size (0 = any)
    int height = 0;
};

struct CorpusManifest {
    std::vector<CorpusEntry> entries;
    std::filesystem::path base_dir;
};

/// Manifest text: one entry per line as whitespace-separated key=value pairs,
/// '#' starts a comment. Keys: name, source (synthetic|local|url), generator,
/// seed, path, url, sha256, width, height.
CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Built-in manifest of the four synthetic generators at the given size.
CorpusManifest synthetic_manifest(int width = 224, int height = 224, std::uint64_t seed = 0);

struct CorpusImage {
    std::string name;
    ImageBuffer image;
};

/// Generates synthetic entries and loads local/url entries after checksum
/// verification. URL entries are cached as <cache_dir>/<sha256>.png.
std::vector<CorpusImage> resolve(const CorpusManifest& manifest, const std::filesystem::path& cache_dir);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// 2x2 box downsampling (odd trailing rows/columns dropped).
ImageBuffer downsample2x(const ImageBuffer& image);

} // namespace splatc
