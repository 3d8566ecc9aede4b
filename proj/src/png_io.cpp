#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "somqe/error.hpp"
#include "somqe/image.hpp"

namespace somqe {

namespace {

constexpr std::array<unsigned char, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

// Signature + IHDR header: length(4) type(4) width(4) height(4) depth(1) color(1).
void check_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(ImageErrorKind::io, "cannot open " + path.string());
    std::array<unsigned char, 26> head{};
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got < kSignature.size() || std::memcmp(head.data(), kSignature.data(), kSignature.size()) != 0)
        throw ImageError(ImageErrorKind::not_png, path.string() + " is not a PNG file");
    if (got < head.size() || std::memcmp(head.data() + 12, "IHDR", 4) != 0)
        throw ImageError(ImageErrorKind::decode, path.string() + ": truncated or missing IHDR");
    const int bit_depth = head[24];
    if (bit_depth != 8)
        throw ImageError(ImageErrorKind::unsupported_format,
                         path.string() + ": bit depth " + std::to_string(bit_depth) + " (only 8 is supported)");
}

}  // namespace

RasterImage load_png(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw ImageError(ImageErrorKind::not_found, "no such file: " + path.string());
    check_header(path);

    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&img, path.c_str()) == 0)
        throw ImageError(ImageErrorKind::decode, path.string() + ": " + img.message);

    img.format = PNG_FORMAT_RGBA;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
    if (png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr) == 0) {
        const std::string message = img.message;
        png_image_free(&img);
        throw ImageError(ImageErrorKind::decode, path.string() + ": " + message);
    }

    const std::size_t width = img.width;
    const std::size_t height = img.height;
    std::vector<Rgb8> pixels(width * height);
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = {buffer[4 * i], buffer[4 * i + 1], buffer[4 * i + 2]};
    return RasterImage(width, height, std::move(pixels));
}

void save_png(const RasterImage& image, const std::filesystem::path& path) {
    if (image.empty()) throw PreconditionError("save_png: empty image");
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = PNG_FORMAT_RGB;
    static_assert(sizeof(Rgb8) == 3);
    const auto* data = reinterpret_cast<const png_byte*>(image.pixels().data());
    if (png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr) == 0)
        throw ImageError(ImageErrorKind::io, "cannot write " + path.string() + ": " + img.message);
}

}  // namespace somqe
