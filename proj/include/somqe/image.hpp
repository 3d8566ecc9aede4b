#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "somqe/pixel.hpp"

namespace somqe {

/// Width x height grid of 8-bit RGB pixels, stored row-major.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(std::size_t width, std::size_t height, Rgb8 fill = {});
    RasterImage(std::size_t width, std::size_t height, std::vector<Rgb8> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    Rgb8& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
    const Rgb8& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

    std::span<Rgb8> pixels() noexcept { return pixels_; }
    std::span<const Rgb8> pixels() const noexcept { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Rgb8> pixels_;
};

struct RgbMeanResult {
    double mean_full = 0.0;      // full double precision
    double mean_reported = 0.0;  // mean_full rounded to 3 decimals
};

/// Luminance-weighted gray: 0.299 R + 0.587 G + 0.114 B.
///
/// Evaluated as (299 R + 587 G + 114 B) / 1000 so that integer channels give
/// an exact numerator and gray(v, v, v) == v holds bit-exactly.
double pixel_to_gray(const PixelVector& p);

/// Mean gray level of all pixels. The sum of integer numerators is
/// accumulated exactly, so the result is independent of pixel order and
/// thread count.
RgbMeanResult rgb_mean(const RasterImage& image);

double round_to_decimals(double value, int decimals);

/// 8-bit RGB, RGBA, gray or gray+alpha PNG. Alpha is dropped; gray expands to R=G=B.
RasterImage load_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG.
void save_png(const RasterImage& image, const std::filesystem::path& path);

}  // namespace somqe
