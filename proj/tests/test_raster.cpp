#include "doctest.h"
#include "oracles.hpp"

#include "aerofuse/pmap_io.hpp"
#include "aerofuse/raster.hpp"

#include <random>

using namespace aerofuse;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution on(density);
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.set(x, y, on(rng));
    }
    return m;
}

PredictionMap random_map(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> fg(static_cast<std::size_t>(w) * h);
    for (auto& v : fg) v = u(rng);
    return PredictionMap::from_foreground(w, h, fg);
}

}  // namespace

TEST_CASE("prediction maps reject values outside [0, 1]") {
    CHECK_THROWS_AS(PredictionMap(Raster(2, 2, 2, 1.5f)), RasterError);
    CHECK_THROWS_AS(PredictionMap(Raster(2, 2, 1, -0.1f)), RasterError);
    CHECK_NOTHROW(PredictionMap(Raster(2, 2, 2, 0.5f)));
}

TEST_CASE("from_foreground builds a normalized two-channel map") {
    const std::vector<float> fg{0.0f, 0.25f, 1.0f, 0.5f};
    const auto m = PredictionMap::from_foreground(2, 2, fg);
    CHECK(m.channels() == 2);
    CHECK(m.is_normalized());
    CHECK(m.foreground(1, 0) == doctest::Approx(0.25));
    CHECK(m.foreground(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("threshold uses foreground >= t") {
    const std::vector<float> fg{0.49f, 0.5f, 0.51f, 0.0f};
    const auto m = threshold(PredictionMap::from_foreground(4, 1, fg), 0.5);
    CHECK(!m.get(0, 0));
    CHECK(m.get(1, 0));
    CHECK(m.get(2, 0));
    CHECK(!m.get(3, 0));
    CHECK(threshold(PredictionMap::from_foreground(4, 1, fg), 0.0).count() == 4);
}

TEST_CASE("threshold is monotone") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const auto map = random_map(rng, 24, 24);
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const auto lo = threshold(map, a), hi = threshold(map, b);
        for (int y = 0; y < 24; ++y) {
            for (int x = 0; x < 24; ++x) {
                if (hi.get(x, y)) CHECK(lo.get(x, y));
            }
        }
    }
}

TEST_CASE("connected components agree with flood fill") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto m = random_mask(rng, 32, 32, 0.1 + 0.05 * (i % 10));
        int n = 0;
        const auto labels = oracle::flood_fill_labels(m, n);
        const auto regions = connected_components(m);
        REQUIRE(regions.size() == static_cast<std::size_t>(n));
        std::vector<std::size_t> sizes(static_cast<std::size_t>(n) + 1, 0);
        for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < regions.size(); ++k) {
            CHECK(regions[k].area() == sizes[k + 1]);
            for (const auto& p : regions[k].pixels) CHECK(labels[static_cast<std::size_t>(p.y) * 32 + p.x] == static_cast<int>(k) + 1);
        }
    }
}

TEST_CASE("diagonal pixels are one component") {
    BinaryMask m(3, 3);
    m.set(0, 0, true);
    m.set(1, 1, true);
    m.set(2, 2, true);
    const auto r = connected_components(m);
    REQUIRE(r.size() == 1);
    CHECK(r[0].box == Box{0, 0, 3, 3});
    CHECK(r[0].centroid_x == doctest::Approx(1.5));
}

TEST_CASE("filter_min_size drops small regions") {
    BinaryMask m(10, 1);
    for (int x : {0, 1, 2, 5, 6, 9}) m.set(x, 0, true);
    const auto kept = filter_min_size(connected_components(m), 2);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].area() == 3);
    CHECK(kept[1].area() == 2);
    CHECK(filter_min_size(connected_components(m), 0).size() == 3);
}

TEST_CASE("erase clears the cells a box touches") {
    BinaryMask m(10, 10, true);
    const auto e = erase(m, Box{2.5, 2.5, 4.0, 4.0});
    CHECK(e.count() == 100 - 4);
    CHECK(!e.get(2, 2));
    CHECK(!e.get(3, 3));
    CHECK(e.get(4, 4));
    CHECK(erase(m, Box{3, 3, 3, 8}).count() == 100);  // zero width
    CHECK(erase(m, Box{-5, -5, 50, 50}).count() == 0);
}

TEST_CASE("mean foreground and count_set over a region") {
    const std::vector<float> fg{0.2f, 0.4f, 0.0f, 0.0f};
    const auto map = PredictionMap::from_foreground(2, 2, fg);
    const auto r = Region::from_pixels({{1, 0}, {0, 0}});
    CHECK(mean_foreground(map, r) == doctest::Approx(0.3));
    BinaryMask m(2, 2);
    m.set(0, 0, true);
    CHECK(count_set(m, r) == 1);
}

TEST_CASE("pmap round trip and malformed input") {
    std::mt19937_64 rng(1);
    const auto map = random_map(rng, 7, 5);
    const auto bytes = pmap::encode(map.raster());
    CHECK(bytes.size() == 16 + 7 * 5 * 2 * 4);
    CHECK(bytes.substr(0, 4) == "PMAP");
    CHECK(pmap::decode(bytes) == map.raster());
    CHECK_THROWS_AS(pmap::decode("PMAQ" + bytes.substr(4)), RasterError);
    CHECK_THROWS_AS(pmap::decode(bytes.substr(0, bytes.size() - 1)), RasterError);
    CHECK_THROWS_AS(pmap::decode(bytes + "x"), RasterError);
    CHECK_THROWS_AS(pmap::decode("PM"), RasterError);
}

TEST_CASE("pmap header is little-endian") {
    const auto bytes = pmap::encode(Raster(258, 1, 1));
    CHECK(static_cast<unsigned char>(bytes[4]) == 2);
    CHECK(static_cast<unsigned char>(bytes[5]) == 1);
}
