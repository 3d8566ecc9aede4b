#include "somqe/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <unordered_set>

#include "somqe/error.hpp"
#include "somqe/rng.hpp"

namespace somqe {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::size_t kChunk = std::size_t{1} << 16;
constexpr double kFixedScale = 4294967296.0;  // 2^32

// Runs fn(chunk_index, begin, end) over fixed chunks of [0, n). Chunk
// boundaries depend only on n, never on the thread count.
template <typename Fn>
void for_each_chunk(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    const std::size_t stride = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n_chunks, 1));
    auto worker = [&fn, n, n_chunks, stride](std::size_t first) {
        for (std::size_t c = first; c < n_chunks; c += stride) fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    };
    if (stride == 1) {
        worker(0);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < stride; ++t) pool.emplace_back(worker, t);
}

// Structure-of-arrays copy of the codebook for the scoring loop.
struct Codebook {
    std::vector<double> r, g, b;
    explicit Codebook(const SomMap& map) {
        for (const PixelVector& m : map.models()) {
            r.push_back(m.r);
            g.push_back(m.g);
            b.push_back(m.b);
        }
    }
    // Returns (index, squared distance).
    std::pair<std::size_t, double> nearest(double x, double y, double z) const {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double dr = x - r[i];
            const double dg = y - g[i];
            const double db = z - b[i];
            const double d2 = dr * dr + dg * dg + db * db;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        return {best, best_d2};
    }
};

double decay(DecaySchedule kind, double start, std::size_t t, std::size_t iterations) {
    const double floor = std::min(kScheduleFloor, start);
    const double frac = static_cast<double>(t) / static_cast<double>(iterations);
    double value = start;
    switch (kind) {
        case DecaySchedule::linear:
            value = start * (1.0 - frac);
            break;
        case DecaySchedule::exponential:
            value = start > floor ? start * std::pow(floor / start, frac) : start;
            break;
    }
    return std::max(value, floor);
}

void check_step(const TrainingConfig& config, std::size_t t) {
    if (t >= config.iterations)
        throw PreconditionError("iteration index " + std::to_string(t) + " out of range [0, " +
                                std::to_string(config.iterations) + ")");
}

}  // namespace

std::string_view to_string(DecaySchedule s) {
    switch (s) {
        case DecaySchedule::linear: return "linear";
        case DecaySchedule::exponential: return "exponential";
    }
    return "linear";
}

DecaySchedule decay_schedule_from_string(std::string_view name) {
    if (name == "linear") return DecaySchedule::linear;
    if (name == "exponential") return DecaySchedule::exponential;
    throw ValidationError("schedule", "unknown decay schedule '" + std::string(name) + "'");
}

void validate(const TrainingConfig& config) {
    if (config.rows == 0 || config.cols == 0) throw ValidationError("rows/cols", "map must have at least one node");
    if (config.iterations < 1) throw ValidationError("iterations", "must be >= 1");
    if (!(config.alpha0 >= 0.0 && config.alpha0 <= 1.0)) throw ValidationError("alpha0", "must be in [0, 1]");
    if (!(config.radius0 > 0.0) || !std::isfinite(config.radius0)) throw ValidationError("radius0", "must be > 0");
}

double alpha_at(const TrainingConfig& config, std::size_t t) {
    check_step(config, t);
    return decay(config.alpha_schedule, config.alpha0, t, config.iterations);
}

double radius_at(const TrainingConfig& config, std::size_t t) {
    check_step(config, t);
    return decay(config.radius_schedule, config.radius0, t, config.iterations);
}

NeighborhoodKernel::NeighborhoodKernel(double radius) : radius_(radius), inv_two_r2_(0.5 / (radius * radius)) {
    if (!(radius > 0.0)) throw PreconditionError("kernel radius must be > 0");
}

double NeighborhoodKernel::at_squared_distance(double grid_d2) const { return std::exp(-grid_d2 * inv_two_r2_); }

double NeighborhoodKernel::operator()(GridCoord winner, GridCoord node) const {
    const double dr = double(winner.row) - double(node.row);
    const double dc = double(winner.col) - double(node.col);
    return at_squared_distance(dr * dr + dc * dc);
}

SomMap::SomMap(std::size_t rows, std::size_t cols, std::vector<PixelVector> models)
    : rows_(rows), cols_(cols), models_(std::move(models)) {
    if (rows_ == 0 || cols_ == 0) throw PreconditionError("SomMap: empty lattice");
    if (models_.size() != rows_ * cols_) throw PreconditionError("SomMap: model count != rows x cols");
    for (const PixelVector& m : models_)
        if (!std::isfinite(m.r) || !std::isfinite(m.g) || !std::isfinite(m.b))
            throw PreconditionError("SomMap: non-finite model vector");
}

std::size_t SomMap::update(const PixelVector& x, double alpha, const NeighborhoodKernel& kernel) {
    const std::size_t winner = bmu(*this, x);
    const GridCoord wc = coord(winner);
    for (std::size_t i = 0; i < models_.size(); ++i) {
        const double step = alpha * kernel(wc, coord(i));
        PixelVector& m = models_[i];
        m.r += step * (x.r - m.r);
        m.g += step * (x.g - m.g);
        m.b += step * (x.b - m.b);
    }
    return winner;
}

std::size_t bmu(const SomMap& map, const PixelVector& x) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double d2 = squared_distance(x, map.model(i));
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

SomMap init_models(const RasterImage& image, const TrainingConfig& config, Rng& rng) {
    validate(config);
    const std::size_t k = config.rows * config.cols;
    if (image.size() < k)
        throw PreconditionError("image has " + std::to_string(image.size()) + " pixels; need at least " +
                                std::to_string(k) + " to initialize the map");
    // Distinct indices, kept in draw order.
    std::vector<std::size_t> picked;
    std::unordered_set<std::size_t> seen;
    while (picked.size() < k) {
        const auto idx = static_cast<std::size_t>(rng.uniform_index(image.size()));
        if (seen.insert(idx).second) picked.push_back(idx);
    }
    std::vector<PixelVector> models;
    models.reserve(k);
    for (std::size_t idx : picked) models.push_back(image.pixels()[idx].vec());
    return SomMap(config.rows, config.cols, std::move(models));
}

SomMap init_models(const RasterImage& image, const TrainingConfig& config) {
    Rng rng(config.seed);
    return init_models(image, config, rng);
}

SomMap train(const RasterImage& image, const TrainingConfig& config) {
    Rng rng(config.seed);
    SomMap map = init_models(image, config, rng);
    const auto pixels = image.pixels();
    for (std::size_t t = 0; t < config.iterations; ++t) {
        const PixelVector x = pixels[rng.uniform_index(pixels.size())].vec();
        map.update(x, alpha_at(config, t), NeighborhoodKernel(radius_at(config, t)));
    }
    for (const PixelVector& m : map.models())
        if (!std::isfinite(m.r) || !std::isfinite(m.g) || !std::isfinite(m.b))
            throw Error("training produced a non-finite model vector");
    return map;
}

std::vector<std::size_t> QeResult::empty_models() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment_counts.size(); ++i)
        if (assignment_counts[i] == 0) out.push_back(i);
    return out;
}

QeResult quantization_error(const SomMap& map, const RasterImage& image, unsigned threads) {
    if (image.empty()) throw PreconditionError("quantization_error: empty image");
    const Codebook book(map);
    const auto pixels = image.pixels();
    const std::size_t n_chunks = (pixels.size() + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> sums(n_chunks, 0);
    std::vector<std::vector<std::size_t>> counts(n_chunks, std::vector<std::size_t>(map.size(), 0));

    for_each_chunk(pixels.size(), threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::uint64_t sum = 0;
        auto& local = counts[c];
        for (std::size_t i = begin; i < end; ++i) {
            const Rgb8 p = pixels[i];
            const auto [idx, d2] = book.nearest(p.r, p.g, p.b);
            ++local[idx];
            sum += static_cast<std::uint64_t>(std::llround(std::sqrt(d2) * kFixedScale));
        }
        sums[c] = sum;
    });

    QeResult result;
    result.n_pixels = pixels.size();
    result.assignment_counts.assign(map.size(), 0);
    u128 total = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        total += sums[c];
        for (std::size_t i = 0; i < map.size(); ++i) result.assignment_counts[i] += counts[c][i];
    }
    result.qe = static_cast<double>(total) / kFixedScale / static_cast<double>(pixels.size());
    return result;
}

QeResult quantization_error(const SomMap& map, std::span<const PixelVector> inputs, unsigned threads) {
    if (inputs.empty()) throw PreconditionError("quantization_error: no input vectors");
    const Codebook book(map);
    const std::size_t n_chunks = (inputs.size() + kChunk - 1) / kChunk;
    std::vector<std::pair<double, double>> partial(n_chunks);  // (sum, compensation)
    std::vector<std::vector<std::size_t>> counts(n_chunks, std::vector<std::size_t>(map.size(), 0));

    // Neumaier summation.
    auto add = [](std::pair<double, double>& acc, double v) {
        const double t = acc.first + v;
        if (std::abs(acc.first) >= std::abs(v))
            acc.second += (acc.first - t) + v;
        else
            acc.second += (v - t) + acc.first;
        acc.first = t;
    };

    for_each_chunk(inputs.size(), threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::pair<double, double> acc{0.0, 0.0};
        auto& local = counts[c];
        for (std::size_t i = begin; i < end; ++i) {
            const PixelVector& x = inputs[i];
            const auto [idx, d2] = book.nearest(x.r, x.g, x.b);
            ++local[idx];
            add(acc, std::sqrt(d2));
        }
        partial[c] = acc;
    });

    QeResult result;
    result.n_pixels = inputs.size();
    result.assignment_counts.assign(map.size(), 0);
    std::pair<double, double> total{0.0, 0.0};
    for (std::size_t c = 0; c < n_chunks; ++c) {
        add(total, partial[c].first);
        add(total, partial[c].second);
        for (std::size_t i = 0; i < map.size(); ++i) result.assignment_counts[i] += counts[c][i];
    }
    result.qe = (total.first + total.second) / static_cast<double>(inputs.size());
    return result;
}

}  // namespace somqe
