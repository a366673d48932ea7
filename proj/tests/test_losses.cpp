#include "doctest.h"
#include "oracles.hpp"

#include "aerofuse/losses.hpp"

#include <cmath>
#include <random>

using namespace aerofuse::losses;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> v(n);
    double s = 0;
    for (auto& x : v) s += (x = u(rng));
    for (auto& x : v) x /= s;
    return v;
}

}  // namespace

TEST_CASE("weighted cross-entropy on a uniform prediction") {
    const std::vector<double> y{0, 0, 1, 0}, p(4, 0.25), a(4, 1.0);
    CHECK(std::abs(weighted_ce(y, p, a) - std::log(4.0)) < 1e-12);
    const std::vector<double> a2{1, 1, 3, 1};
    CHECK(weighted_ce(y, p, a2) == doctest::Approx(3 * std::log(4.0)));
}

TEST_CASE("weighted cross-entropy clamps zero probabilities") {
    const std::vector<double> y{1, 0}, p{0, 1}, a{1, 1};
    CHECK(weighted_ce(y, p, a) == doctest::Approx(-std::log(1e-7)));
    CHECK_THROWS_AS(weighted_ce(y, std::vector<double>{1.0}, a), LossError);
}

TEST_CASE("weighted cross-entropy gradient against finite differences") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto p = random_simplex(rng, 5);
        const auto y = random_simplex(rng, 5);
        const auto a = random_simplex(rng, 5);
        const auto g = weighted_ce_gradient(y, p, a);
        for (std::size_t i = 0; i < 5; ++i) {
            const auto f = [&](double v) {
                auto q = p;
                q[i] = v;
                return weighted_ce(y, q, a);
            };
            CHECK(oracle::close_relative(g[i], oracle::central_difference(f, p[i]), 1e-4));
        }
    }
}

TEST_CASE("focal loss reference values") {
    // 0.25 * 0.25 * ln 2
    const std::vector<double> p{0.5, 0.5};
    CHECK(focal_loss(p, 0) == doctest::Approx(0.25 * 0.25 * std::log(2.0)).epsilon(1e-12));
    CHECK(focal_loss(p, 0, 2.0, 1.0) == doctest::Approx(0.173287).epsilon(1e-5));
    const std::vector<double> sure{0.0, 1.0};
    CHECK(focal_loss(sure, 1) == 0.0);
}

TEST_CASE("focal loss with gamma 0 and alpha 1 is cross-entropy") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        const auto p = random_simplex(rng, 3);
        std::vector<double> y(3, 0.0), a(3, 1.0);
        y[1] = 1.0;
        CHECK(std::abs(focal_loss(p, 1, 0.0, 1.0) - weighted_ce(y, p, a)) < 1e-12);
    }
}

TEST_CASE("focal derivative against finite differences") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 0.99), g(0.0, 4.0);
    for (int t = 0; t < 100; ++t) {
        const double pt = u(rng), gamma = g(rng);
        const auto f = [&](double v) {
            const std::vector<double> q{1 - v, v};
            return focal_loss(q, 1, gamma, 0.25);
        };
        CHECK(oracle::close_relative(focal_loss_derivative(pt, gamma, 0.25), oracle::central_difference(f, pt), 1e-4));
        const std::vector<double> q{1 - pt, pt};
        const auto grad = focal_loss_gradient(q, 1, gamma, 0.25);
        CHECK(grad[0] == 0.0);
        CHECK(grad[1] == focal_loss_derivative(pt, gamma, 0.25));
    }
}

TEST_CASE("smooth L1 values, continuity and derivative") {
    CHECK(smooth_l1(0.0) == 0.0);
    CHECK(smooth_l1(0.5) == doctest::Approx(0.125));
    CHECK(smooth_l1(3.0) == doctest::Approx(2.5));
    CHECK(smooth_l1(-3.0) == doctest::Approx(2.5));
    CHECK(std::abs(smooth_l1(std::nextafter(1.0, 2.0)) - smooth_l1(1.0)) < 1e-12);
    CHECK(smooth_l1_derivative(1.0) == 1.0);
    CHECK(smooth_l1_derivative(0.25) == 0.25);
    CHECK(smooth_l1_derivative(-7.0) == -1.0);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int t = 0; t < 100; ++t) {
        double x = u(rng);
        if (std::abs(std::abs(x) - 1.0) < 1e-3) x += 0.01;
        CHECK(oracle::close_relative(smooth_l1_derivative(x), oracle::central_difference(smooth_l1, x), 1e-4));
    }
}

TEST_CASE("detection loss weights classification by 1.5") {
    CHECK(detection_loss(2.0, 1.0) == doctest::Approx(4.0));
    CHECK(kClassificationWeight == 1.5);
}

TEST_CASE("median frequency weights") {
    const std::vector<std::uint64_t> equal{5, 5, 5};
    CHECK(median_frequency_weights(equal) == std::vector<double>{1.0, 1.0, 1.0});
    // frequencies 0.1, 0.2, 0.7 -> median 0.2
    const std::vector<std::uint64_t> c{10, 20, 70};
    const auto w = median_frequency_weights(c);
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(0.2 / 0.7));
    // absent classes do not enter the median
    const std::vector<std::uint64_t> absent{1, 0};
    CHECK(median_frequency_weights(absent) == std::vector<double>{1.0, 0.0});
    const std::vector<std::uint64_t> none{0, 0};
    CHECK_THROWS_AS(median_frequency_weights(none), LossError);
}

TEST_CASE("median frequency weights equalize alpha times frequency") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::uint64_t> count(0, 1000000);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint64_t> c(2 + t % 7);
        for (auto& v : c) v = count(rng) * (t % 3 == 0 && &v == &c[0] ? 0 : 1);
        if (std::all_of(c.begin(), c.end(), [](auto v) { return v == 0; })) c[1] = 1;
        const auto w = median_frequency_weights(c);
        double total = 0;
        for (auto v : c) total += static_cast<double>(v);
        double product = -1;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] == 0) {
                CHECK(w[i] == 0.0);
                continue;
            }
            const double p = w[i] * static_cast<double>(c[i]) / total;
            if (product < 0) product = p;
            CHECK(std::abs(p - product) < 1e-10);
        }
    }
}

TEST_CASE("training metadata") {
    CHECK(std::string(TrainingMetadata::optimizer) == "adam");
    CHECK(TrainingMetadata::segmentation_initial_lr == 0.001);
    CHECK(TrainingMetadata::detection_initial_lr == 0.0004);
}
