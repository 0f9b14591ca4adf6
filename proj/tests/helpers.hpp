// Shared fixtures for the unit suites. The database fixture is expensive
// (vocabulary training plus three descriptor channels over 142 frames), so
// it is built once per process and reused across suites.
#pragma once

#include "keypos/database.hpp"
#include "keypos/image.hpp"
#include "keypos/orb.hpp"
#include "keypos/synth.hpp"
#include "keypos/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fixtures {

inline keypos::SynthSpec standardSpec(int frames, std::uint64_t seed,
                                      std::vector<keypos::KeySpan> spans) {
    keypos::SynthSpec spec;
    spec.frameCount = frames;
    spec.noiseSeed = seed;
    spec.keySpans = std::move(spans);
    // ~1 m spacing heading east along the equator.
    spec.geoPath = {{0.0, 0.0}, {0.0, frames * 1.0e-5 * 0.9}};
    return spec;
}

inline const keypos::Trajectory& sharedTrajectory() {
    static const keypos::Trajectory traj = keypos::synthTrajectory(
        standardSpec(142, 1, {{20, 27, 1}, {70, 77, 2}, {110, 117, 3}}));
    return traj;
}

inline const keypos::Vocabulary& sharedVocabulary() {
    static const keypos::Vocabulary vocab = [] {
        const keypos::Trajectory& traj = sharedTrajectory();
        std::vector<std::vector<keypos::OrbDescriptor>> corpus(traj.frames.size());
        for (std::size_t i = 0; i < traj.frames.size(); ++i) {
            corpus[i] = keypos::orbExtract(keypos::toGrayscale(traj.frames[i].rgb)).descriptors;
        }
        return keypos::trainVocabulary(corpus, keypos::kVocabBranching, keypos::kVocabDepth, 7);
    }();
    return vocab;
}

inline const keypos::TrajectoryDatabase& sharedDatabase() {
    static const keypos::TrajectoryDatabase db =
        keypos::buildDatabase(sharedTrajectory(), sharedVocabulary());
    return db;
}

/// Photometric perturbation: gain and additive Gaussian noise on RGB,
/// noise only on IR (active sensing is unaffected by ambient light),
/// depth untouched. sigma255 is the noise std in 8-bit counts.
inline keypos::FrameRecord perturbFrame(const keypos::FrameRecord& frame, double sigma255,
                                        double gain, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma255);
    keypos::FrameRecord out = frame;
    for (auto& v : out.rgb.samples) {
        const double nv = v * gain + (sigma255 > 0.0 ? noise(rng) : 0.0);
        v = static_cast<std::uint16_t>(std::clamp(std::lround(nv), 0L, 255L));
    }
    if (out.infrared.has_value() && sigma255 > 0.0) {
        for (auto& v : out.infrared->samples) {
            const double nv = v + noise(rng);
            v = static_cast<std::uint16_t>(std::clamp(std::lround(nv), 0L, 255L));
        }
    }
    return out;
}

inline keypos::Trajectory perturbTrajectory(const keypos::Trajectory& traj, double sigma255,
                                            double gain, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    keypos::Trajectory out;
    out.name = traj.name + "-perturbed";
    out.frames.reserve(traj.frames.size());
    for (const auto& f : traj.frames) out.frames.push_back(perturbFrame(f, sigma255, gain, rng));
    return out;
}

/// Uniformly random ORB descriptors for vocabulary unit tests.
inline std::vector<keypos::OrbDescriptor> randomDescriptors(int count, std::mt19937_64& rng) {
    std::vector<keypos::OrbDescriptor> out(count);
    for (auto& d : out) {
        for (auto& w : d.words) w = rng();
    }
    return out;
}

} // namespace fixtures
