#pragma once

#include "keypos/bow.hpp"
#include "keypos/frame.hpp"
#include "keypos/gist.hpp"
#include "keypos/ldb.hpp"
#include "keypos/vocabulary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace keypos {

/// Everything a query needs to re-derive descriptor layouts; persisted in the
/// database header so files are self-describing.
struct DescriptorConfig {
    Modalities gistModalities = Modalities::Rgb;
    Modalities ldbModalities = Modalities::RgbIrD;
    double illuminationAlpha = kIlluminationAlpha;
    int gistScales = 3;
    std::vector<int> gistOrientations = kGistOrientations;
    int gistWorkSize = kGistWorkSize;
    int ldbPatchSize = kLdbPatchSize;
    std::vector<int> ldbGrids = kLdbGrids;

    bool operator==(const DescriptorConfig&) const = default;
};

struct FrameMeta {
    std::uint32_t index = 0;
    double timestamp = 0.0;
    GeoCoordinate geo;
    std::optional<int> keyPositionId;
    std::optional<int> viewTag;

    bool isKeyPosition() const { return keyPositionId.has_value(); }
};

struct TrajectoryDatabase {
    DescriptorConfig config;
    Vocabulary vocab;
    GaborBank bank; // rebuilt deterministically from config
    std::vector<FrameMeta> frames;
    std::vector<GistDescriptor> gistVectors;
    std::vector<LdbDescriptor> ldbVectors;
    std::vector<BowVector> bowVectors;
    InverseIndex invIndex;

    int size() const { return static_cast<int>(frames.size()); }
};

/// Extracts GIST (prefiltered modalities), compounded LDB (illumination-
/// invariant RGB + D + IR per config) and BoW (grayscale RGB) for every frame,
/// then builds the inverse index. Per-frame extraction runs in parallel; the
/// result is independent of scheduling.
TrajectoryDatabase buildDatabase(const Trajectory& traj, const Vocabulary& vocab,
                                 const DescriptorConfig& config = {});

void saveDatabase(const TrajectoryDatabase& db, const std::string& path);
TrajectoryDatabase loadDatabase(const std::string& path);

/// Inspection dump; descriptor blocks are included only when requested.
std::string databaseToJson(const TrajectoryDatabase& db, bool includeDescriptors = false);

} // namespace keypos
