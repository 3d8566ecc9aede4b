#include "somqe/image.hpp"

#include <cmath>
#include <cstdint>

#include "somqe/error.hpp"

namespace somqe {

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb8 fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

RasterImage::RasterImage(std::size_t width, std::size_t height, std::vector<Rgb8> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != width_ * height_)
        throw PreconditionError("pixel count does not match width x height");
}

double pixel_to_gray(const PixelVector& p) {
    return (299.0 * p.r + 587.0 * p.g + 114.0 * p.b) / 1000.0;
}

double round_to_decimals(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

RgbMeanResult rgb_mean(const RasterImage& image) {
    if (image.empty()) throw PreconditionError("rgb_mean: empty image");
    // 255000 * N fits in 64 bits for any image that fits in memory.
    std::uint64_t sum = 0;
    for (const Rgb8& p : image.pixels())
        sum += 299u * p.r + 587u * p.g + 114u * p.b;
    const double n = static_cast<double>(image.size());
    RgbMeanResult result;
    result.mean_full = static_cast<double>(sum) / (1000.0 * n);
    result.mean_reported = round_to_decimals(result.mean_full, 3);
    return result;
}

}  // namespace somqe
