#include "irbench/image_ops.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>

#include "irbench/errors.hpp"

namespace irbench {

Bytes read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot read: " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const Bytes& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError("write failed: " + path.string());
}

std::optional<ImageInfo> decode_info(const Bytes& bytes) {
    if (bytes.empty()) return std::nullopt;
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
    if (m.empty()) return std::nullopt;
    return ImageInfo{m.cols, m.rows};
}

std::optional<ImageInfo> probe_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    return decode_info(read_file_bytes(path));
}

double mean_luma(const Bytes& bytes) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw DecodeFailure("mean_luma: image does not decode");
    return cv::mean(m)[0];
}

Bytes resample_png(const Bytes& bytes, int width, int height) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw DecodeFailure("resample: image does not decode");
    cv::Mat resized;
    cv::resize(m, resized, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
    std::vector<unsigned char> out;
    if (!cv::imencode(".png", resized, out)) throw Error("png encode failed");
    return out;
}

Bytes make_test_png(int width, int height, std::uint32_t seed) {
    cv::Mat m(height, width, CV_8UC3);
    // xorshift keeps the pattern independent of any library RNG.
    std::uint32_t s = seed * 2654435761u + 1u;
    auto next = [&s] {
        s ^= s << 13;
        s ^= s >> 17;
        s ^= s << 5;
        return s;
    };
    std::uint32_t base = next();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            auto& px = m.at<cv::Vec3b>(y, x);
            std::uint32_t block = ((x / 4) * 31u + (y / 4) * 17u + base);
            // High-contrast checker so every seed yields strong edges, with
            // seed-dependent per-block texture on top.
            bool bright = (((x / 8) + (y / 8)) & 1) != 0;
            unsigned char lo = static_cast<unsigned char>(30 + (block & 0x1f));
            unsigned char hi = static_cast<unsigned char>(190 + ((block >> 5) & 0x3f));
            unsigned char v = bright ? hi : lo;
            px[0] = v;
            px[1] = static_cast<unsigned char>(v ^ (base & 0x0f));
            px[2] = static_cast<unsigned char>(
                std::clamp(v + (x * 32 / std::max(1, width - 1)) - 16, 0, 255));
        }
    }
    std::vector<unsigned char> out;
    if (!cv::imencode(".png", m, out)) throw Error("png encode failed");
    return out;
}

Bytes make_uniform_png(int width, int height, unsigned char level) {
    cv::Mat m(height, width, CV_8UC1, cv::Scalar(level));
    std::vector<unsigned char> out;
    if (!cv::imencode(".png", m, out)) throw Error("png encode failed");
    return out;
}

}  // namespace irbench
