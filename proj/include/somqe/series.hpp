#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "somqe/image.hpp"
#include "somqe/pixel.hpp"

namespace somqe {

namespace palette {
inline constexpr Rgb8 white{255, 255, 255};
inline constexpr Rgb8 black{0, 0, 0};
inline constexpr Rgb8 dark_gray{127, 127, 127};
inline constexpr Rgb8 light_gray{191, 191, 191};
inline constexpr Rgb8 red{255, 0, 0};
inline constexpr Rgb8 green{0, 255, 0};
inline constexpr Rgb8 blue{0, 0, 255};
inline constexpr Rgb8 background{179, 179, 179};
}  // namespace palette

// pi as used for dot areas.
inline constexpr double kDotPi = 3.14;

/// round((d/2)^2 * 3.14); 113 for the standard 12 px dot.
long dot_area_px(long diameter);

/// Inverse of the area formula: 2 sqrt(area / 3.14).
double diameter_for_area(long area);

struct PixelOffset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const PixelOffset&, const PixelOffset&) = default;
};

/// Filled disk holding exactly `area` pixels: the `area` lattice offsets
/// nearest the center (ties by dy, then dx). Disks of increasing area are
/// nested, and a complete shell reproduces the "within radius" disk, e.g.
/// area 113 is every offset with dx^2 + dy^2 <= 36.
std::vector<PixelOffset> disk_offsets(long area);

struct DotSpec {
    long cx = 0;  // center pixel
    long cy = 0;
    long area_px = 113;
    Rgb8 color{};
};

void stamp(RasterImage& image, const DotSpec& dot);
void stamp(RasterImage& image, const DotSpec& dot, Rgb8 color);

enum class SeriesKind {
    dot_size_sweep,
    dot_count_sweep,
    dot_shift_sweep,
    chroma_decrement,
    single_pixel_g_sweep,
    noise_pixel_removal,
};

// Contrast sign of the manipulated dots: positive = white, negative = black.
enum class Polarity { positive, negative };
enum class Channel { r, g, b };

std::string_view to_string(SeriesKind kind);
std::string_view to_string(Polarity p);
std::string_view to_string(Channel c);
SeriesKind series_kind_from_string(std::string_view name);
Polarity polarity_from_string(std::string_view name);
Channel channel_from_string(std::string_view name);

struct SeriesSpec {
    std::string name;
    SeriesKind kind = SeriesKind::dot_size_sweep;
    std::size_t width = 2360;
    std::size_t height = 1996;
    std::size_t n_dots_per_color = 50;
    long diameter_px = 12;
    std::uint64_t seed = 1;

    Polarity polarity = Polarity::negative;  // size, count and shift sweeps
    Channel channel = Channel::r;            // chroma_decrement
    std::vector<int> percents;               // size and count sweeps
    std::vector<int> shifts_px;              // shift sweep
    std::vector<int> channel_values;         // chroma_decrement; first entry is the reference value
    std::vector<int> g_values;               // single_pixel_g_sweep
    std::size_t n_images = 70;               // noise_pixel_removal, reference included

    /// Spec for `kind` with the standard sweep parameters and default dimensions.
    static SeriesSpec defaults(SeriesKind kind);

    friend bool operator==(const SeriesSpec&, const SeriesSpec&) = default;
};

/// Throws ValidationError naming the offending field.
void validate(const SeriesSpec& spec);

struct ManifestEntry {
    std::size_t index = 0;  // 0 = reference
    std::string description;
    std::vector<std::pair<std::string, double>> params;
};

struct GeneratedSeries {
    RasterImage reference;
    std::vector<RasterImage> tests;
    std::vector<ManifestEntry> manifest;  // tests.size() + 1 entries
    std::vector<DotSpec> reference_dots;  // empty for non-dot series
    std::vector<std::string> notes;
};

/// The series' reference image (identical to gen_series(spec).reference).
RasterImage gen_reference(const SeriesSpec& spec);

GeneratedSeries gen_series(const SeriesSpec& spec);

}  // namespace somqe
