#include "somqe/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "somqe/error.hpp"
#include "somqe/rng.hpp"

namespace somqe {

namespace {

constexpr std::size_t kMaxPlacementAttempts = 200'000;

std::string pct(int p) { return (p >= 0 ? "+" : "") + std::to_string(p) + "%"; }

bool is_dot_kind(SeriesKind kind) {
    return kind != SeriesKind::single_pixel_g_sweep && kind != SeriesKind::noise_pixel_removal;
}

Rgb8 polarity_color(Polarity p) { return p == Polarity::positive ? palette::white : palette::black; }

Rgb8 channel_color(Channel c, int value) {
    const auto v = static_cast<std::uint8_t>(value);
    switch (c) {
        case Channel::r: return {v, 0, 0};
        case Channel::g: return {0, v, 0};
        case Channel::b: return {0, 0, v};
    }
    return {};
}

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](T a, T b) { return !(a < b); }) == v.end();
}

long grown_area(long base, int percent) {
    return std::lround(static_cast<double>(base) * (1.0 + percent / 100.0));
}

std::size_t count_increment(std::size_t n, int percent) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(n) * percent / 100.0));
}

// Occupancy grid used for non-overlapping random placement. Marked cells are
// dot pixels dilated by one, which keeps a one-pixel gap between dots.
class Placer {
public:
    Placer(std::size_t width, std::size_t height, Rng& rng)
        : w_(static_cast<long>(width)), h_(static_cast<long>(height)), busy_(width * height, 0), rng_(rng) {}

    // Places `footprint` at a random free position at least one pixel from
    // every border. Returns the center.
    std::pair<long, long> place(const std::vector<PixelOffset>& footprint) {
        long min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
        for (const auto& o : footprint) {
            min_dx = std::min<long>(min_dx, o.dx);
            max_dx = std::max<long>(max_dx, o.dx);
            min_dy = std::min<long>(min_dy, o.dy);
            max_dy = std::max<long>(max_dy, o.dy);
        }
        const long x_lo = 1 - min_dx, x_hi = w_ - 2 - max_dx;
        const long y_lo = 1 - min_dy, y_hi = h_ - 2 - max_dy;
        if (x_lo > x_hi || y_lo > y_hi)
            throw CapacityError("dot footprint does not fit inside a " + std::to_string(w_) + "x" +
                                std::to_string(h_) + " image without touching the border");
        for (std::size_t attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
            const long cx = x_lo + static_cast<long>(rng_.uniform_index(static_cast<std::uint64_t>(x_hi - x_lo + 1)));
            const long cy = y_lo + static_cast<long>(rng_.uniform_index(static_cast<std::uint64_t>(y_hi - y_lo + 1)));
            if (fits(footprint, cx, cy)) {
                mark(footprint, cx, cy);
                return {cx, cy};
            }
        }
        throw CapacityError("could not place a dot after " + std::to_string(kMaxPlacementAttempts) +
                            " attempts; image too small for the requested dot count");
    }

private:
    bool fits(const std::vector<PixelOffset>& footprint, long cx, long cy) const {
        return std::none_of(footprint.begin(), footprint.end(), [&](const PixelOffset& o) {
            return busy_[static_cast<std::size_t>((cy + o.dy) * w_ + (cx + o.dx))] != 0;
        });
    }

    void mark(const std::vector<PixelOffset>& footprint, long cx, long cy) {
        for (const auto& o : footprint)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dx = -1; dx <= 1; ++dx) {
                    const long x = cx + o.dx + dx, y = cy + o.dy + dy;
                    if (x >= 0 && x < w_ && y >= 0 && y < h_) busy_[static_cast<std::size_t>(y * w_ + x)] = 1;
                }
    }

    long w_, h_;
    std::vector<std::uint8_t> busy_;
    Rng& rng_;
};

std::vector<PixelOffset> translated_union(const std::vector<PixelOffset>& disk, const std::vector<int>& shifts_left) {
    std::set<std::pair<int, int>> cells;
    for (const auto& o : disk) cells.emplace(o.dy, o.dx);
    for (int s : shifts_left)
        for (const auto& o : disk) cells.emplace(o.dy, o.dx - s);
    std::vector<PixelOffset> out;
    out.reserve(cells.size());
    for (const auto& [dy, dx] : cells) out.push_back({dx, dy});
    return out;
}

struct Layout {
    std::vector<DotSpec> dots;      // reference dots; designated (if any) first
    std::vector<DotSpec> extras;    // count sweep additions, in order of use
    bool has_designated = false;
};

Layout make_layout(const SeriesSpec& spec, Rng& rng) {
    Layout layout;
    const long base_area = dot_area_px(spec.diameter_px);
    const auto base_disk = disk_offsets(base_area);
    const std::size_t n = spec.n_dots_per_color;
    Placer placer(spec.width, spec.height, rng);

    std::vector<Rgb8> colors;
    Rgb8 designated_color{};
    if (spec.kind == SeriesKind::chroma_decrement) {
        designated_color = channel_color(spec.channel, spec.channel_values.front());
        colors = {designated_color};
    } else {
        designated_color = polarity_color(spec.polarity);
        colors = {palette::white, palette::black, palette::dark_gray, palette::light_gray};
    }

    std::vector<Rgb8> order;
    if (n > 0 && spec.kind != SeriesKind::dot_count_sweep) {
        std::vector<PixelOffset> footprint = base_disk;
        if (spec.kind == SeriesKind::dot_size_sweep)
            footprint = disk_offsets(grown_area(base_area, spec.percents.back()));
        else if (spec.kind == SeriesKind::dot_shift_sweep)
            footprint = translated_union(base_disk, spec.shifts_px);
        const auto [cx, cy] = placer.place(footprint);
        layout.dots.push_back({cx, cy, base_area, designated_color});
        layout.has_designated = true;
    }
    for (const Rgb8& c : colors) {
        std::size_t count = n;
        if (layout.has_designated && c == designated_color) --count;
        for (std::size_t i = 0; i < count; ++i) {
            const auto [cx, cy] = placer.place(base_disk);
            layout.dots.push_back({cx, cy, base_area, c});
        }
    }
    if (spec.kind == SeriesKind::dot_count_sweep) {
        const std::size_t extra = count_increment(n, spec.percents.back());
        for (std::size_t i = 0; i < extra; ++i) {
            const auto [cx, cy] = placer.place(base_disk);
            layout.extras.push_back({cx, cy, base_area, designated_color});
        }
    }
    return layout;
}

RasterImage render(const SeriesSpec& spec, const std::vector<DotSpec>& dots) {
    RasterImage image(spec.width, spec.height, palette::background);
    for (const auto& d : dots) stamp(image, d);
    return image;
}

RasterImage noise_image(const SeriesSpec& spec, Rng& rng) {
    RasterImage image(spec.width, spec.height);
    for (Rgb8& p : image.pixels()) {
        const std::uint64_t v = rng.next();
        p = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)};
    }
    return image;
}

ManifestEntry reference_entry(const SeriesSpec& spec) {
    return {0, "reference (" + std::string(to_string(spec.kind)) + ", seed " + std::to_string(spec.seed) + ")", {}};
}

void gen_dot_series(const SeriesSpec& spec, Rng& rng, GeneratedSeries& out) {
    if (spec.n_dots_per_color == 0)
        throw ValidationError("n_dots_per_color", "must be >= 1 for " + std::string(to_string(spec.kind)));
    Layout layout = make_layout(spec, rng);
    out.reference = render(spec, layout.dots);
    out.reference_dots = layout.dots;
    out.manifest.push_back(reference_entry(spec));

    const long base_area = layout.dots.empty() ? 0 : layout.dots.front().area_px;
    std::size_t index = 1;
    switch (spec.kind) {
        case SeriesKind::dot_size_sweep: {
            const DotSpec& d = layout.dots.front();
            for (int p : spec.percents) {
                DotSpec grown = d;
                grown.area_px = grown_area(base_area, p);
                RasterImage img = out.reference;
                stamp(img, grown);
                out.tests.push_back(std::move(img));
                out.manifest.push_back({index++,
                                        "designated dot area " + std::to_string(base_area) + " -> " +
                                            std::to_string(grown.area_px) + " px (" + pct(p) + ")",
                                        {{"percent", p},
                                         {"area_px", double(grown.area_px)},
                                         {"diameter_px", diameter_for_area(grown.area_px)},
                                         {"cx", double(d.cx)},
                                         {"cy", double(d.cy)}}});
            }
            break;
        }
        case SeriesKind::dot_count_sweep: {
            const std::size_t n = spec.n_dots_per_color;
            for (int p : spec.percents) {
                const std::size_t extra = count_increment(n, p);
                RasterImage img = out.reference;
                for (std::size_t i = 0; i < extra; ++i) stamp(img, layout.extras[i]);
                out.tests.push_back(std::move(img));
                out.manifest.push_back({index++,
                                        std::string(to_string(spec.polarity)) + " dot count " + std::to_string(n) +
                                            " -> " + std::to_string(n + extra) + " (" + pct(p) + ")",
                                        {{"percent", p}, {"added_dots", double(extra)}, {"dot_count", double(n + extra)}}});
            }
            break;
        }
        case SeriesKind::dot_shift_sweep: {
            const DotSpec& d = layout.dots.front();
            for (int s : spec.shifts_px) {
                DotSpec moved = d;
                moved.cx -= s;
                RasterImage img = out.reference;
                stamp(img, d, palette::background);
                stamp(img, moved);
                out.tests.push_back(std::move(img));
                out.manifest.push_back({index++,
                                        "designated dot shifted left by " + std::to_string(s) + " px",
                                        {{"shift_px", s}, {"cx", double(moved.cx)}, {"cy", double(moved.cy)}}});
            }
            break;
        }
        case SeriesKind::chroma_decrement: {
            const DotSpec& d = layout.dots.front();
            for (std::size_t k = 1; k < spec.channel_values.size(); ++k) {
                const int v = spec.channel_values[k];
                RasterImage img = out.reference;
                stamp(img, d, channel_color(spec.channel, v));
                out.tests.push_back(std::move(img));
                out.manifest.push_back({index++,
                                        "designated dot " + std::string(to_string(spec.channel)) + " channel " +
                                            std::to_string(spec.channel_values.front()) + " -> " + std::to_string(v),
                                        {{"channel_value", v}, {"cx", double(d.cx)}, {"cy", double(d.cy)}}});
            }
            break;
        }
        default:
            break;
    }
}

void gen_g_sweep(const SeriesSpec& spec, Rng& rng, GeneratedSeries& out) {
    out.reference = RasterImage(spec.width, spec.height, palette::background);
    out.manifest.push_back(reference_entry(spec));
    const auto idx = static_cast<std::size_t>(rng.uniform_index(out.reference.size()));
    const std::size_t x = idx % spec.width, y = idx / spec.width;
    std::size_t index = 1;
    for (int g : spec.g_values) {
        RasterImage img = out.reference;
        img.at(x, y).g = static_cast<std::uint8_t>(g);
        out.tests.push_back(std::move(img));
        out.manifest.push_back({index++,
                                "pixel (" + std::to_string(x) + "," + std::to_string(y) + ") G = " + std::to_string(g),
                                {{"g", g}, {"x", double(x)}, {"y", double(y)}}});
    }
    if (spec.g_values.size() != 100)
        out.notes.push_back(std::to_string(spec.g_values.size()) +
                            " G values generated; the nominal series length is 100 images");
}

void gen_noise_removal(const SeriesSpec& spec, Rng& rng, GeneratedSeries& out) {
    out.reference = noise_image(spec, rng);
    out.manifest.push_back(reference_entry(spec));
    const auto pixels = out.reference.pixels();
    const std::size_t wanted = spec.n_images - 1;
    std::set<std::size_t> chosen;
    std::vector<std::size_t> order;
    const std::size_t max_draws = 1000 * (wanted + 1);
    for (std::size_t draws = 0; order.size() < wanted; ++draws) {
        if (draws >= max_draws) throw CapacityError("not enough non-black pixels to remove");
        const auto idx = static_cast<std::size_t>(rng.uniform_index(pixels.size()));
        if (pixels[idx] == palette::black || !chosen.insert(idx).second) continue;
        order.push_back(idx);
    }
    RasterImage img = out.reference;
    for (std::size_t k = 0; k < wanted; ++k) {
        const std::size_t idx = order[k];
        const std::size_t x = idx % spec.width, y = idx / spec.width;
        img.pixels()[idx] = palette::black;
        out.tests.push_back(img);
        out.manifest.push_back({k + 1,
                                "pixel (" + std::to_string(x) + "," + std::to_string(y) + ") set to (0,0,0); " +
                                    std::to_string(k + 1) + " removed in total",
                                {{"x", double(x)}, {"y", double(y)}, {"removed_total", double(k + 1)}}});
    }
}

}  // namespace

long dot_area_px(long diameter) {
    if (diameter < 0) throw PreconditionError("dot diameter must be >= 0");
    const double r = static_cast<double>(diameter) / 2.0;
    return std::lround(r * r * kDotPi);
}

double diameter_for_area(long area) { return 2.0 * std::sqrt(static_cast<double>(area) / kDotPi); }

std::vector<PixelOffset> disk_offsets(long area) {
    if (area <= 0) return {};
    // Every offset within distance `reach` is in the box, and there are more than `area` of them.
    const int reach = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(area) / 3.0))) + 2;
    std::vector<PixelOffset> all;
    for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) all.push_back({dx, dy});
    std::stable_sort(all.begin(), all.end(), [](const PixelOffset& a, const PixelOffset& b) {
        return a.dx * a.dx + a.dy * a.dy < b.dx * b.dx + b.dy * b.dy;
    });
    all.resize(static_cast<std::size_t>(area));
    return all;
}

void stamp(RasterImage& image, const DotSpec& dot) { stamp(image, dot, dot.color); }

void stamp(RasterImage& image, const DotSpec& dot, Rgb8 color) {
    for (const auto& o : disk_offsets(dot.area_px)) {
        const long x = dot.cx + o.dx, y = dot.cy + o.dy;
        if (x < 0 || y < 0 || x >= static_cast<long>(image.width()) || y >= static_cast<long>(image.height()))
            throw CapacityError("dot at (" + std::to_string(dot.cx) + "," + std::to_string(dot.cy) +
                                ") would be clipped by the image border");
        image.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = color;
    }
}

std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::dot_size_sweep: return "dot_size_sweep";
        case SeriesKind::dot_count_sweep: return "dot_count_sweep";
        case SeriesKind::dot_shift_sweep: return "dot_shift_sweep";
        case SeriesKind::chroma_decrement: return "chroma_decrement";
        case SeriesKind::single_pixel_g_sweep: return "single_pixel_g_sweep";
        case SeriesKind::noise_pixel_removal: return "noise_pixel_removal";
    }
    return "?";
}

std::string_view to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::r: return "R";
        case Channel::g: return "G";
        case Channel::b: return "B";
    }
    return "?";
}

SeriesKind series_kind_from_string(std::string_view name) {
    for (auto k : {SeriesKind::dot_size_sweep, SeriesKind::dot_count_sweep, SeriesKind::dot_shift_sweep,
                   SeriesKind::chroma_decrement, SeriesKind::single_pixel_g_sweep, SeriesKind::noise_pixel_removal})
        if (name == to_string(k)) return k;
    throw ValidationError("kind", "unknown series kind '" + std::string(name) + "'");
}

Polarity polarity_from_string(std::string_view name) {
    if (name == "positive" || name == "white") return Polarity::positive;
    if (name == "negative" || name == "black") return Polarity::negative;
    throw ValidationError("polarity", "expected positive|negative, got '" + std::string(name) + "'");
}

Channel channel_from_string(std::string_view name) {
    if (name == "R" || name == "r") return Channel::r;
    if (name == "G" || name == "g") return Channel::g;
    if (name == "B" || name == "b") return Channel::b;
    throw ValidationError("channel", "expected R|G|B, got '" + std::string(name) + "'");
}

SeriesSpec SeriesSpec::defaults(SeriesKind kind) {
    SeriesSpec spec;
    spec.kind = kind;
    spec.name = std::string(to_string(kind));
    switch (kind) {
        case SeriesKind::dot_size_sweep: spec.percents = {10, 20, 30, 40, 60}; break;
        case SeriesKind::dot_count_sweep: spec.percents = {10, 20, 30, 40, 50}; break;
        case SeriesKind::dot_shift_sweep: spec.shifts_px = {20, 40, 60, 80, 100}; break;
        case SeriesKind::chroma_decrement: spec.channel_values = {255, 150, 100, 50}; break;
        case SeriesKind::single_pixel_g_sweep:
            for (int g = 1; g <= 30; ++g) spec.g_values.push_back(g);
            for (int g = 55; g <= 80; ++g) spec.g_values.push_back(g);
            for (int g = 210; g <= 255; ++g) spec.g_values.push_back(g);
            break;
        case SeriesKind::noise_pixel_removal:
            spec.width = 1003;
            spec.height = 1037;
            spec.n_images = 70;
            break;
    }
    return spec;
}

void validate(const SeriesSpec& spec) {
    if (spec.width == 0) throw ValidationError("width", "must be >= 1");
    if (spec.height == 0) throw ValidationError("height", "must be >= 1");
    const std::size_t n_pixels = spec.width * spec.height;
    switch (spec.kind) {
        case SeriesKind::dot_size_sweep:
        case SeriesKind::dot_count_sweep:
            if (spec.percents.empty()) throw ValidationError("percents", "must not be empty");
            if (spec.percents.front() <= 0) throw ValidationError("percents", "must be positive");
            if (!strictly_increasing(spec.percents))
                throw ValidationError("percents", "must be strictly increasing without duplicates");
            if (spec.kind == SeriesKind::dot_count_sweep) {
                std::vector<std::size_t> increments;
                for (int p : spec.percents) increments.push_back(count_increment(spec.n_dots_per_color, p));
                if (spec.n_dots_per_color > 0 && (increments.front() == 0 || !strictly_increasing(increments)))
                    throw ValidationError("n_dots_per_color", "too few dots for the requested percents to differ");
            }
            break;
        case SeriesKind::dot_shift_sweep:
            if (spec.shifts_px.empty()) throw ValidationError("shifts_px", "must not be empty");
            if (spec.shifts_px.front() <= 0) throw ValidationError("shifts_px", "must be positive");
            if (!strictly_increasing(spec.shifts_px))
                throw ValidationError("shifts_px", "must be strictly increasing without duplicates");
            break;
        case SeriesKind::chroma_decrement: {
            if (spec.channel_values.size() < 2)
                throw ValidationError("channel_values", "need the reference value plus at least one decrement");
            for (int v : spec.channel_values)
                if (v < 0 || v > 255) throw ValidationError("channel_values", "values must be in [0, 255]");
            std::vector<int> reversed(spec.channel_values.rbegin(), spec.channel_values.rend());
            if (!strictly_increasing(reversed))
                throw ValidationError("channel_values", "must be strictly decreasing without duplicates");
            break;
        }
        case SeriesKind::single_pixel_g_sweep: {
            if (spec.g_values.empty()) throw ValidationError("g_values", "must not be empty");
            for (int g : spec.g_values)
                if (g < 0 || g > 255) throw ValidationError("g_values", "values must be in [0, 255]");
            std::set<int> unique(spec.g_values.begin(), spec.g_values.end());
            if (unique.size() != spec.g_values.size()) throw ValidationError("g_values", "duplicate value");
            break;
        }
        case SeriesKind::noise_pixel_removal:
            if (spec.n_images < 2) throw ValidationError("n_images", "must be >= 2");
            if (spec.n_images - 1 > n_pixels) throw ValidationError("n_images", "more removals than pixels");
            break;
    }
    if (is_dot_kind(spec.kind) && spec.diameter_px < 1) throw ValidationError("diameter_px", "must be >= 1");
}

RasterImage gen_reference(const SeriesSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    switch (spec.kind) {
        case SeriesKind::single_pixel_g_sweep:
            return RasterImage(spec.width, spec.height, palette::background);
        case SeriesKind::noise_pixel_removal:
            return noise_image(spec, rng);
        default:
            return render(spec, make_layout(spec, rng).dots);
    }
}

GeneratedSeries gen_series(const SeriesSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    GeneratedSeries out;
    switch (spec.kind) {
        case SeriesKind::single_pixel_g_sweep: gen_g_sweep(spec, rng, out); break;
        case SeriesKind::noise_pixel_removal: gen_noise_removal(spec, rng, out); break;
        default: gen_dot_series(spec, rng, out); break;
    }
    return out;
}

}  // namespace somqe
