#pragma once

#include <cmath>
#include <cstdint>

namespace somqe {

/// Real-valued RGB vector in 8-bit channel-level units (0.0 to 255.0 for
/// image pixels). Used both for SOM inputs and for model vectors.
struct PixelVector {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    friend bool operator==(const PixelVector&, const PixelVector&) = default;
};

inline double squared_distance(const PixelVector& a, const PixelVector& b) {
    const double dr = a.r - b.r;
    const double dg = a.g - b.g;
    const double db = a.b - b.b;
    return dr * dr + dg * dg + db * db;
}

inline double distance(const PixelVector& a, const PixelVector& b) {
    return std::sqrt(squared_distance(a, b));
}

/// Stored 8-bit pixel.
struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    constexpr PixelVector vec() const { return {double(r), double(g), double(b)}; }
    constexpr std::uint32_t packed() const {
        return (std::uint32_t(r) << 16) | (std::uint32_t(g) << 8) | std::uint32_t(b);
    }

    friend constexpr bool operator==(const Rgb8&, const Rgb8&) = default;
    friend constexpr auto operator<=>(const Rgb8& a, const Rgb8& b) { return a.packed() <=> b.packed(); }
};

}  // namespace somqe
