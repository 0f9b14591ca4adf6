#include "keypos/geo.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using keypos::GeoCoordinate;

TEST_SUITE("geo") {

TEST_CASE("identical points have zero distance") {
    const GeoCoordinate p{30.25, 120.15};
    CHECK(keypos::haversineMeters(p, p) == 0.0);
    CHECK(keypos::degreeDistance(p, p) == 0.0);
}

TEST_CASE("one millidegree of longitude at the equator") {
    const GeoCoordinate a{0.0, 0.0};
    const GeoCoordinate b{0.0, 0.001};
    const double d = keypos::haversineMeters(a, b);
    // pi/180 * 1e-3 * 6371000
    CHECK(d == doctest::Approx(111.19492664455875).epsilon(1e-12));
    CHECK(std::abs(d - 111.195) < 0.01);
}

TEST_CASE("haversine agrees with the law-of-cosines oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> lat(-60.0, 60.0);
    std::uniform_real_distribution<double> lon(-179.0, 179.0);
    std::uniform_real_distribution<double> delta(-0.05, 0.05);
    for (int i = 0; i < 200; ++i) {
        const GeoCoordinate a{lat(rng), lon(rng)};
        const GeoCoordinate b{a.lat + delta(rng), a.lon + delta(rng)};
        const double h = keypos::haversineMeters(a, b);
        const double o = oracle::lawOfCosinesMeters(a, b);
        CHECK(h == doctest::Approx(o).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("haversine is symmetric") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-80.0, 80.0);
    std::uniform_real_distribution<double> lon(-179.0, 179.0);
    for (int i = 0; i < 100; ++i) {
        const GeoCoordinate a{lat(rng), lon(rng)};
        const GeoCoordinate b{lat(rng), lon(rng)};
        CHECK(keypos::haversineMeters(a, b) == keypos::haversineMeters(b, a));
    }
}

TEST_CASE("degree distance is plain euclidean in degree space") {
    const GeoCoordinate a{0.0, 0.0};
    const GeoCoordinate b{0.03, 0.04};
    CHECK(keypos::degreeDistance(a, b) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("coordinate validity bounds") {
    CHECK(keypos::geoValid({0.0, 0.0}));
    CHECK(keypos::geoValid({90.0, 180.0}));
    CHECK(keypos::geoValid({-90.0, -180.0}));
    CHECK_FALSE(keypos::geoValid({90.0001, 0.0}));
    CHECK_FALSE(keypos::geoValid({0.0, 180.0001}));
    CHECK_FALSE(keypos::geoValid({-91.0, 0.0}));
}

} // TEST_SUITE
