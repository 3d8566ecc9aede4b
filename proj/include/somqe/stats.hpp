#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace somqe::stats {

/// I_x(a, b) by Lentz's continued fraction; absolute error below 1e-13 for
/// the argument ranges the t distribution needs.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);

double normal_cdf(double z);
double normal_quantile(double p);

struct TTestResult {
    double t_stat = 0.0;  // 0 when degenerate
    std::size_t df = 0;
    double p_two_sided = 1.0;
    double mean_difference = 0.0;  // sample mean - mu0
    std::pair<double, double> ci95{0.0, 0.0};  // for the mean difference
    bool significant_at_05 = false;
    bool degenerate = false;  // zero sample variance; t undefined
};

/// One-sample t-test of mean(samples) against mu0, two-sided.
/// Samples that are all bit-identical give degenerate = true, p = 1.
TTestResult one_sample_t(std::span<const double> samples, double mu0);

struct ShapiroWilkResult {
    double w = 1.0;
    double p_value = 1.0;
    bool degenerate = false;  // constant sample
};

inline constexpr std::size_t kShapiroMinN = 3;
inline constexpr std::size_t kShapiroMaxN = 50;

/// Shapiro-Wilk W with Royston's coefficient and p-value approximations.
ShapiroWilkResult shapiro_wilk(std::span<const double> samples);

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;  // two-sided, t with n - 2 df
    std::size_t n = 0;
};

CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct TrendResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. r_squared is 0 for constant y.
TrendResult linear_trend(std::span<const double> x, std::span<const double> y);

}  // namespace somqe::stats
