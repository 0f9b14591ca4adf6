#pragma once

#include "keypos/image.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

namespace keypos {

inline constexpr double kFastThreshold = 20.0 / 255.0;
inline constexpr int kFastMaxKeypoints = 500;
inline constexpr int kOrbPyramidLevels = 4;
inline constexpr double kOrbScaleFactor = 1.2;
inline constexpr int kOrbPatchRadius = 15;
inline constexpr int kOrbDescriptorBits = 256;

/// Seed of the frozen BRIEF test pattern; persisted in vocabulary files so a
/// vocabulary is only ever used with the pattern it was trained with.
inline constexpr std::uint64_t kOrbPatternSeed = 0x1a2b3c4d5e6f7081ULL;

struct Keypoint {
    float x = 0.0f; // full-resolution coordinates
    float y = 0.0f;
    float response = 0.0f;
    float angle = 0.0f; // radians in [0, 2*pi)
    int octave = 0;
};

struct OrbDescriptor {
    std::array<std::uint64_t, 4> words{};

    bool testBit(int i) const { return (words[i >> 6] >> (i & 63)) & 1u; }
    void setBit(int i) { words[i >> 6] |= std::uint64_t{1} << (i & 63); }
    auto operator<=>(const OrbDescriptor&) const = default;
};

int orbHamming(const OrbDescriptor& a, const OrbDescriptor& b);

/// FAST-9 corners over a 4-level pyramid (scale 1.2). Keypoints keep a 15 px
/// margin at their own level, are ranked response desc / y asc / x asc and
/// truncated to maxKeypoints. Coordinates are reported at full resolution.
std::vector<Keypoint> detectFast(const GrayImage& gray, double threshold = kFastThreshold,
                                 int maxKeypoints = kFastMaxKeypoints);

struct OrbResult {
    std::vector<Keypoint> keypoints; // the described subset, input order kept
    std::vector<OrbDescriptor> descriptors;
    int skipped = 0; // keypoints dropped for violating the border margin
};

/// Rotated BRIEF: orientation from the intensity centroid of a radius-15
/// patch, then 256 pairwise tests from the frozen pattern rotated by that
/// angle. Keypoints too close to the border at their octave are skipped.
OrbResult orbDescribe(const GrayImage& gray, const std::vector<Keypoint>& keypoints);

/// detect + describe in one call.
OrbResult orbExtract(const GrayImage& gray, double threshold = kFastThreshold,
                     int maxKeypoints = kFastMaxKeypoints);

} // namespace keypos
