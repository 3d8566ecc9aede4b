#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "somqe/image.hpp"
#include "somqe/pixel.hpp"

namespace somqe {

class Rng;

enum class DecaySchedule { linear, exponential };

std::string_view to_string(DecaySchedule s);
DecaySchedule decay_schedule_from_string(std::string_view name);

// Schedules never drop below this value (or below their start value, if smaller).
inline constexpr double kScheduleFloor = 1e-4;

struct TrainingConfig {
    std::size_t rows = 4;
    std::size_t cols = 4;
    std::size_t iterations = 10'000;
    double alpha0 = 0.2;   // initial learning rate
    double radius0 = 1.2;  // initial neighborhood width, in grid units
    std::uint64_t seed = 0;
    DecaySchedule alpha_schedule = DecaySchedule::linear;
    DecaySchedule radius_schedule = DecaySchedule::linear;

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Throws ValidationError naming the bad field. alpha0 == 0 is accepted and
/// turns training into a no-op.
void validate(const TrainingConfig& config);

/// Learning rate at step t (0 <= t < iterations). Linear: alpha0 (1 - t/T);
/// exponential: geometric from alpha0 to the floor. Clamped at
/// min(kScheduleFloor, alpha0).
double alpha_at(const TrainingConfig& config, std::size_t t);
double radius_at(const TrainingConfig& config, std::size_t t);

struct GridCoord {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Gaussian over squared grid distance: h = exp(-d^2 / (2 radius^2)).
/// h == 1 at the winner; may underflow to 0 far from it once the radius is small.
class NeighborhoodKernel {
public:
    explicit NeighborhoodKernel(double radius);

    double radius() const noexcept { return radius_; }
    double operator()(GridCoord winner, GridCoord node) const;
    double at_squared_distance(double grid_d2) const;

private:
    double radius_;
    double inv_two_r2_;
};

/// rows x cols lattice of model vectors, row-major (index = row * cols + col).
class SomMap {
public:
    SomMap(std::size_t rows, std::size_t cols, std::vector<PixelVector> models);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return models_.size(); }

    std::span<const PixelVector> models() const noexcept { return models_; }
    const PixelVector& model(std::size_t i) const { return models_[i]; }
    GridCoord coord(std::size_t i) const { return {i / cols_, i % cols_}; }

    // Applies one Kohonen update toward x: m_i += alpha * h(c, i) * (x - m_i).
    // Returns the winning index c.
    std::size_t update(const PixelVector& x, double alpha, const NeighborhoodKernel& kernel);

    friend bool operator==(const SomMap&, const SomMap&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<PixelVector> models_;
};

/// Index of the model nearest to x in Euclidean distance; lowest index wins ties.
std::size_t bmu(const SomMap& map, const PixelVector& x);

/// Models set to rows*cols distinct pixels of `image` drawn with `rng`.
SomMap init_models(const RasterImage& image, const TrainingConfig& config, Rng& rng);
SomMap init_models(const RasterImage& image, const TrainingConfig& config);

/// Seeds Rng(config.seed), initializes from the image, then runs
/// config.iterations single-sample updates, each on a pixel drawn uniformly
/// with replacement.
SomMap train(const RasterImage& image, const TrainingConfig& config);

struct QeResult {
    double qe = 0.0;  // mean distance to the BMU, channel-level units
    std::size_t n_pixels = 0;
    std::vector<std::size_t> assignment_counts;  // one per model

    std::vector<std::size_t> empty_models() const;
};

/// Mean Euclidean distance from each pixel to its BMU.
///
/// Per-pixel distances are summed in 2^-32 fixed point with integer
/// arithmetic, so the result does not depend on pixel order or `threads`.
QeResult quantization_error(const SomMap& map, const RasterImage& image, unsigned threads = 1);

/// Same metric over arbitrary vectors (no value-range assumption). Uses
/// compensated summation over fixed-size chunks combined in order.
QeResult quantization_error(const SomMap& map, std::span<const PixelVector> inputs, unsigned threads = 1);

}  // namespace somqe
