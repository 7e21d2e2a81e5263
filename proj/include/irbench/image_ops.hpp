#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace irbench {

struct ImageInfo {
    int width = 0;
    int height = 0;
};

using Bytes = std::vector<unsigned char>;

Bytes read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const Bytes& bytes);

/// Decode probe: nullopt when the bytes are not a decodable image.
std::optional<ImageInfo> decode_info(const Bytes& bytes);
std::optional<ImageInfo> probe_image(const std::filesystem::path& path);

/// Mean luma (Rec.601 grayscale, 0..255) of an encoded image.
double mean_luma(const Bytes& bytes);

/// Re-encode to the given size (bilinear). Source aspect is the target aspect
/// in every caller, so nothing is letterboxed.
Bytes resample_png(const Bytes& bytes, int width, int height);

/// Deterministic synthetic PNG used by fixtures and tests: a seeded pattern of
/// blocks and gradients so distinct seeds decode to distinct pixels.
Bytes make_test_png(int width, int height, std::uint32_t seed);

/// Uniform grayscale PNG (every pixel = level); mean luma is exactly level.
Bytes make_uniform_png(int width, int height, unsigned char level);

}  // namespace irbench
