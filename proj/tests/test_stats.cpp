#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "somqe/error.hpp"
#include "somqe/stats.hpp"

using namespace somqe;
using namespace somqe::stats;

namespace {

struct Moments {
    double mean;
    double sd;
};

Moments moments(const std::vector<double>& v) {
    long double sum = 0;
    for (double x : v) sum += x;
    const long double mean = sum / v.size();
    long double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {double(mean), double(std::sqrt(ss / (v.size() - 1)))};
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("t distribution agrees with Boost.Math") {
    for (double df : {1.0, 2.0, 3.0, 5.0, 9.0, 30.0, 69.0, 250.0}) {
        const boost::math::students_t dist(df);
        for (double t : {-40.0, -6.0, -2.5, -1.0, -0.1, 0.0, 0.3, 1.7, 2.2, 4.0, 12.0}) {
            INFO("df=", df, " t=", t);
            CHECK(student_t_cdf(t, df) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-9));
        }
        for (double p : {0.001, 0.025, 0.1, 0.5, 0.8, 0.975, 0.9995}) {
            INFO("df=", df, " p=", p);
            CHECK(student_t_quantile(p, df) == doctest::Approx(boost::math::quantile(dist, p)).epsilon(1e-9));
        }
    }
    CHECK(student_t_quantile(0.975, 5) == doctest::Approx(2.570581835636314).epsilon(1e-12));
    CHECK_THROWS_AS(student_t_quantile(1.0, 5), PreconditionError);
    CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), PreconditionError);
}

TEST_CASE("normal distribution agrees with Boost.Math") {
    const boost::math::normal dist;
    for (double p : {1e-10, 1e-4, 0.02425, 0.1, 0.5, 0.7, 0.97575, 0.999, 0.999999}) {
        INFO("p=", p);
        CHECK(normal_quantile(p) == doctest::Approx(boost::math::quantile(dist, p)).epsilon(1e-12));
    }
    for (double z : {-8.0, -3.0, -0.5, 0.0, 1.0, 2.5})
        CHECK(normal_cdf(z) == doctest::Approx(boost::math::cdf(dist, z)).epsilon(1e-12));
}

TEST_CASE("incomplete beta boundary values") {
    CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(1, 1) = x and I_x(a, 1) = x^a
    CHECK(regularized_incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(regularized_incomplete_beta(3.5, 1, 0.6) == doctest::Approx(std::pow(0.6, 3.5)).epsilon(1e-13));
    CHECK_THROWS_AS(regularized_incomplete_beta(0, 1, 0.5), PreconditionError);
}

TEST_CASE("one-sample t-test") {
    SUBCASE("frozen reference values") {
        const std::vector<double> x{1.2, 2.3, 2.9, 4.1, 5.0, 6.3};
        const auto r = one_sample_t(x, 2.0);
        CHECK(r.t_stat == doctest::Approx(2.1426204002884677).epsilon(1e-12));
        CHECK(r.p_two_sided == doctest::Approx(0.08503496256441828).epsilon(1e-9));
        CHECK(r.df == 5);
        CHECK_FALSE(r.significant_at_05);
        CHECK_FALSE(r.degenerate);
    }
    SUBCASE("textbook formula on random data") {
        std::mt19937_64 gen(2024);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 3 + trial * 3;
            std::vector<double> x(n);
            const double loc = trial * 0.7 - 5.0, scale = 0.1 + trial;
            for (double& v : x) v = loc + scale * noise(gen);
            const double mu0 = loc + 0.4 * scale;
            const Moments m = moments(x);
            const double se = m.sd / std::sqrt(double(n));
            const double t = (m.mean - mu0) / se;
            const boost::math::students_t dist(double(n - 1));
            const double p = 2 * boost::math::cdf(dist, -std::abs(t));
            const double q = boost::math::quantile(dist, 0.975);

            const auto r = one_sample_t(x, mu0);
            INFO("trial ", trial);
            CHECK(r.t_stat == doctest::Approx(t).epsilon(1e-10));
            CHECK(r.p_two_sided == doctest::Approx(p).epsilon(1e-9));
            CHECK(r.mean_difference == doctest::Approx(m.mean - mu0).epsilon(1e-12));
            CHECK(r.ci95.first == doctest::Approx(m.mean - mu0 - q * se).epsilon(1e-9));
            CHECK(r.ci95.second == doctest::Approx(m.mean - mu0 + q * se).epsilon(1e-9));
            CHECK(r.significant_at_05 == (p < 0.05));
            CHECK(r.ci95.first <= r.mean_difference);
            CHECK(r.mean_difference <= r.ci95.second);
        }
    }
    SUBCASE("location-shift equivariance") {
        const std::vector<double> x{0.31, 0.35, 0.29, 0.40, 0.33, 0.38};
        std::vector<double> shifted(x);
        for (double& v : shifted) v += 1000.0;
        const auto a = one_sample_t(x, 0.3), b = one_sample_t(shifted, 1000.3);
        CHECK(a.t_stat == doctest::Approx(b.t_stat).epsilon(1e-9));
        CHECK(a.p_two_sided == doctest::Approx(b.p_two_sided).epsilon(1e-8));
    }
    SUBCASE("degenerate sample") {
        const std::vector<double> x(5, 0.25);
        const auto r = one_sample_t(x, 0.2);
        CHECK(r.degenerate);
        CHECK(r.t_stat == 0.0);
        CHECK(r.p_two_sided == 1.0);
        CHECK_FALSE(r.significant_at_05);
        CHECK(r.mean_difference == doctest::Approx(0.05));
        CHECK(r.ci95.first == r.mean_difference);
        CHECK(r.ci95.second == r.mean_difference);
    }
    SUBCASE("too few samples") {
        const std::vector<double> x{1.0};
        CHECK_THROWS_AS(one_sample_t(x, 0.0), PreconditionError);
        CHECK_THROWS_AS(one_sample_t(std::span<const double>{}, 0.0), PreconditionError);
    }
}

TEST_CASE("Shapiro-Wilk") {
    struct Case {
        std::vector<double> x;
        double w;
        double p;
    };
    std::vector<double> normal_scores;
    for (int i = 1; i <= 10; ++i) normal_scores.push_back(normal_quantile((i - 0.375) / 10.25));
    const std::vector<Case> cases{
        {{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236}, 0.7888146948631716, 0.006703814061898823},
        {normal_scores, 0.9965048684184032, 0.999961373132172},
        {{1, 2, 4}, 0.9642857142857142, 0.6368868450289689},
        {{2.1, 3.5, 3.6, 4.0, 5.9, 6.2, 7.7, 8.1, 9.9, 12.0, 13.5, 15.1, 20.2}, 0.9301670792470125, 0.342541068237056},
        {{1, 2, 3, 4, 5, 100}, 0.5313019459001229, 6.213526799295419e-05},
    };
    for (const auto& c : cases) {
        const auto r = shapiro_wilk(c.x);
        INFO("n=", c.x.size());
        CHECK(r.w == doctest::Approx(c.w).epsilon(1e-6));
        CHECK(r.p_value == doctest::Approx(c.p).epsilon(1e-4));
    }
    // Weights example from the original publication, W reported as 0.79.
    CHECK(std::round(shapiro_wilk(cases[0].x).w * 100) / 100 == doctest::Approx(0.79));

    SUBCASE("invariant under affine maps and ordering") {
        std::vector<double> x = cases[3].x;
        const double w = shapiro_wilk(x).w;
        std::vector<double> y;
        for (double v : x) y.push_back(-3.0 * v + 17.0);
        std::reverse(y.begin(), y.end());
        std::swap(y[1], y[7]);
        CHECK(shapiro_wilk(y).w == doctest::Approx(w).epsilon(1e-12));
    }
    SUBCASE("W is in (0, 1] and p in [0, 1] on random samples") {
        std::mt19937_64 gen(5);
        std::exponential_distribution<double> e(1.0);
        for (std::size_t n = 3; n <= 50; ++n) {
            std::vector<double> x(n);
            for (double& v : x) v = e(gen);
            const auto r = shapiro_wilk(x);
            CHECK(r.w > 0.0);
            CHECK(r.w <= 1.0);
            CHECK(r.p_value >= 0.0);
            CHECK(r.p_value <= 1.0);
        }
    }
    SUBCASE("constant sample and size limits") {
        const std::vector<double> flat(8, 2.0);
        const auto r = shapiro_wilk(flat);
        CHECK(r.degenerate);
        CHECK(r.p_value == 1.0);
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), PreconditionError);
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(51, 0.0)), PreconditionError);
    }
}

TEST_CASE("Pearson correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> up, down;
    for (double v : x) {
        up.push_back(2.5 * v - 1);
        down.push_back(-0.5 * v + 8);
    }
    CHECK(pearson(x, up).r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, down).r == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(pearson(x, up).p_value == doctest::Approx(0.0).epsilon(1e-12));

    SUBCASE("brute-force oracle") {
        std::mt19937_64 gen(11);
        std::uniform_real_distribution<double> u(-10, 10);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 3 + trial;
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = u(gen);
                b[i] = 0.3 * a[i] + u(gen);
            }
            const Moments ma = moments(a), mb = moments(b);
            long double sxy = 0;
            for (std::size_t i = 0; i < n; ++i) sxy += (a[i] - ma.mean) * (b[i] - mb.mean);
            const double r = double(sxy / (n - 1)) / (ma.sd * mb.sd);
            const double t = r * std::sqrt((n - 2) / (1 - r * r));
            const double p = 2 * boost::math::cdf(boost::math::students_t(double(n - 2)), -std::abs(t));
            const auto got = pearson(a, b);
            INFO("trial ", trial);
            CHECK(got.r == doctest::Approx(r).epsilon(1e-12));
            CHECK(got.p_value == doctest::Approx(p).epsilon(1e-8));
            CHECK(got.n == n);
        }
    }
    SUBCASE("invariant under positive affine maps") {
        const std::vector<double> a{0.2, 0.9, 0.4, 1.7, 1.1};
        const std::vector<double> b{3.0, 2.0, 4.5, 1.0, 2.2};
        std::vector<double> a2, b2;
        for (double v : a) a2.push_back(4 * v + 100);
        for (double v : b) b2.push_back(0.01 * v - 3);
        CHECK(pearson(a, b).r == doctest::Approx(pearson(a2, b2).r).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<double> c(6, 1.0);
        CHECK_THROWS_AS(pearson(x, c), PreconditionError);
        CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), PreconditionError);
        CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 3}), PreconditionError);
    }
}

TEST_CASE("linear trend") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(3.0 * i - 5.0);
    }
    auto t = linear_trend(x, y);
    CHECK(t.slope == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(t.intercept == doctest::Approx(-5.0).epsilon(1e-14));
    CHECK(t.r_squared == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<double> flat(10, 4.0);
    t = linear_trend(x, flat);
    CHECK(t.slope == 0.0);
    CHECK(t.intercept == doctest::Approx(4.0));
    CHECK(t.r_squared == 0.0);

    SUBCASE("normal equations oracle") {
        std::mt19937_64 gen(99);
        std::uniform_real_distribution<double> u(0, 1);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 3 + 2 * trial;
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = 10 * u(gen);
                b[i] = -0.7 * a[i] + 2 + u(gen);
            }
            long double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sx += a[i];
                sy += b[i];
                sxx += (long double)a[i] * a[i];
                sxy += (long double)a[i] * b[i];
            }
            const long double det = n * sxx - sx * sx;
            const double slope = double((n * sxy - sx * sy) / det);
            const double intercept = double((sy * sxx - sx * sxy) / det);
            const auto got = linear_trend(a, b);
            INFO("trial ", trial);
            CHECK(got.slope == doctest::Approx(slope).epsilon(1e-10));
            CHECK(got.intercept == doctest::Approx(intercept).epsilon(1e-10));
            const double r = pearson(a, b).r;
            CHECK(std::abs(got.r_squared - r * r) <= 1e-12);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(linear_trend(std::vector<double>{1.0}, std::vector<double>{2.0}), PreconditionError);
        CHECK_THROWS_AS(linear_trend(x, std::vector<double>{1, 2, 3}), PreconditionError);
        CHECK_THROWS_AS(linear_trend(flat, x), PreconditionError);
    }
}

}  // TEST_SUITE
