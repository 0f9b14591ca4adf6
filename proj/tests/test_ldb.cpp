#include "keypos/ldb.hpp"

#include "keypos/errors.hpp"
#include "keypos/preprocess.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using keypos::BitVector;
using keypos::GrayImage;
using keypos::LdbDescriptor;

namespace {

// Reference LDB written straight from the descriptor contract: per grid
// level, per-cell mean intensity and mean central-difference gradients
// (one-sided at cell borders), then strict > comparisons for every row-major
// cell pair i<j, three bits per pair in I, Gx, Gy order.
std::vector<bool> referenceLdb(const GrayImage& img) {
    std::vector<bool> bits;
    for (int g : {2, 3, 4, 5}) {
        const int cell = 60 / g;
        std::vector<double> mi, mgx, mgy;
        for (int gy = 0; gy < g; ++gy) {
            for (int gx = 0; gx < g; ++gx) {
                const int x0 = gx * cell, y0 = gy * cell;
                double si = 0.0, sgx = 0.0, sgy = 0.0;
                for (int y = y0; y < y0 + cell; ++y) {
                    for (int x = x0; x < x0 + cell; ++x) {
                        si += img.at(x, y);
                        const int xl = std::max(x - 1, x0);
                        const int xr = std::min(x + 1, x0 + cell - 1);
                        sgx += (img.at(xr, y) - img.at(xl, y)) / (xr - xl);
                        const int yu = std::max(y - 1, y0);
                        const int yd = std::min(y + 1, y0 + cell - 1);
                        sgy += (img.at(x, yd) - img.at(x, yu)) / (yd - yu);
                    }
                }
                const double n = static_cast<double>(cell) * cell;
                mi.push_back(si / n);
                mgx.push_back(sgx / n);
                mgy.push_back(sgy / n);
            }
        }
        for (int i = 0; i < g * g; ++i) {
            for (int j = i + 1; j < g * g; ++j) {
                bits.push_back(mi[i] > mi[j]);
                bits.push_back(mgx[i] > mgx[j]);
                bits.push_back(mgy[i] > mgy[j]);
            }
        }
    }
    return bits;
}

GrayImage texturedPatch(std::uint64_t seed) {
    GrayImage img = keypos::makeGray(60, 60);
    std::mt19937_64 rng(seed);
    for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 60; ++x) {
            img.at(x, y) = static_cast<float>(
                0.5 + 0.3 * std::sin(0.31 * x + 0.11 * y) +
                0.1 * (static_cast<double>(rng() % 1000) / 999.0 - 0.5));
        }
    }
    return img;
}

} // namespace

TEST_SUITE("ldb") {

TEST_CASE("single-modality descriptor has 1386 bits") {
    // 3 * (C(4,2) + C(9,2) + C(16,2) + C(25,2)) = 3 * (6 + 36 + 120 + 300)
    CHECK(keypos::kLdbBitsPerModality == 1386);
    const BitVector bits = keypos::ldbSingle(texturedPatch(1));
    CHECK(bits.size() == 1386);
}

TEST_CASE("wrong patch size is rejected") {
    CHECK_THROWS_AS(keypos::ldbSingle(keypos::makeGray(64, 64, 0.5f)), keypos::ConfigError);
}

TEST_CASE("bits match the reference implementation") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const GrayImage img = texturedPatch(seed);
        const BitVector bits = keypos::ldbSingle(img);
        const std::vector<bool> ref = referenceLdb(img);
        REQUIRE(bits.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(bits.test(i) == ref[i]);
    }
}

TEST_CASE("constant patches produce all-zero bits") {
    const BitVector bits = keypos::ldbSingle(keypos::makeGray(60, 60, 0.4f));
    CHECK(bits.popcount() == 0);
}

TEST_CASE("negating the image flips nearly every bit") {
    const GrayImage img = texturedPatch(5);
    GrayImage neg = img;
    for (auto& v : neg.values) v = 1.0f - v;
    const BitVector a = keypos::ldbSingle(img);
    const BitVector b = keypos::ldbSingle(neg);
    const std::size_t flipped = BitVector::hamming(a, b);
    CHECK(flipped >= a.size() * 99 / 100);
}

TEST_CASE("compound descriptor concatenates rgb, depth, ir") {
    const keypos::Trajectory& traj = fixtures::sharedTrajectory();
    const LdbDescriptor d = keypos::ldbCompound(traj.frames[3], keypos::Modalities::RgbIrD);
    CHECK(d.bits.size() == 3 * 1386);
    REQUIRE(d.layout.size() == 3);
    CHECK(d.layout[0].modality == keypos::Modality::Rgb);
    CHECK(d.layout[1].modality == keypos::Modality::Depth);
    CHECK(d.layout[2].modality == keypos::Modality::Ir);
    CHECK(d.layout[0].bitOffset == 0);
    CHECK(d.layout[1].bitOffset == 1386);
    CHECK(d.layout[2].bitOffset == 2772);

    const LdbDescriptor rgbOnly = keypos::ldbCompound(traj.frames[3], keypos::Modalities::Rgb);
    CHECK(rgbOnly.bits.size() == 1386);
    for (std::size_t i = 0; i < 1386; ++i) CHECK(rgbOnly.bits.test(i) == d.bits.test(i));
}

TEST_CASE("missing modality raises a validation error") {
    const keypos::Trajectory& traj = fixtures::sharedTrajectory();
    keypos::FrameRecord frame = traj.frames[0];
    frame.depth.reset();
    CHECK_THROWS_AS(keypos::ldbCompound(frame, keypos::Modalities::RgbIrD),
                    keypos::ValidationError);
}

TEST_CASE("uniform scaling flips almost no compound bits") {
    const keypos::Trajectory& traj = fixtures::sharedTrajectory();
    keypos::FrameRecord frame = traj.frames[8];
    // Multiples of 4 in [16, 124] so scaling by 0.5 or 2 stays exact 8-bit.
    for (auto& v : frame.rgb.samples) {
        v = static_cast<std::uint16_t>(16 + 4 * ((v * 27u) / 255u));
    }
    const LdbDescriptor ref = keypos::ldbCompound(frame, keypos::Modalities::RgbIrD);
    for (double s : {0.5, 2.0}) {
        keypos::FrameRecord scaled = frame;
        for (auto& v : scaled.rgb.samples) {
            v = static_cast<std::uint16_t>(std::lround(v * s));
        }
        const LdbDescriptor out = keypos::ldbCompound(scaled, keypos::Modalities::RgbIrD);
        const int dist = keypos::ldbDistance(ref, out);
        CHECK(dist <= static_cast<int>(ref.bits.size() / 100));
    }
}

TEST_CASE("distance equals the per-bit oracle") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 10; ++t) {
        LdbDescriptor a, b;
        a.bits = BitVector(1386);
        b.bits = BitVector(1386);
        for (std::size_t i = 0; i < 1386; ++i) {
            if (rng() & 1) a.bits.set(i);
            if (rng() & 1) b.bits.set(i);
        }
        a.layout.push_back({keypos::Modality::Rgb, 0, 1386});
        b.layout = a.layout;
        CHECK(keypos::ldbDistance(a, b) == static_cast<int>(oracle::hammingBits(a.bits, b.bits)));
    }
}

TEST_CASE("layout mismatch is rejected") {
    LdbDescriptor a, b;
    a.bits = BitVector(1386);
    b.bits = BitVector(1386);
    a.layout.push_back({keypos::Modality::Rgb, 0, 1386});
    b.layout.push_back({keypos::Modality::Ir, 0, 1386});
    CHECK_THROWS_AS(keypos::ldbDistance(a, b), keypos::ConfigError);
}

} // TEST_SUITE
