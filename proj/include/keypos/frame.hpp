#pragma once

#include "keypos/geo.hpp"
#include "keypos/image.hpp"

#include <optional>
#include <string>
#include <vector>

namespace keypos {

/// Which image planes a descriptor channel consumes.
enum class Modalities : std::uint8_t {
    Rgb = 1,
    RgbIr = 2,
    RgbIrD = 3,
};

enum class Modality : std::uint8_t {
    Rgb = 0,
    Ir = 1,
    Depth = 2,
};

const char* modalitiesName(Modalities m);
std::optional<Modalities> modalitiesFromName(const std::string& name);
bool usesIr(Modalities m);
bool usesDepth(Modalities m);

inline constexpr int kFrameWidth = 320;
inline constexpr int kFrameHeight = 240;

/// One captured instant: multi-modal images, GNSS fix, optional key label.
struct FrameRecord {
    int index = 0;
    double timestamp = 0.0;
    ImagePlane rgb;
    std::optional<ImagePlane> depth;
    std::optional<ImagePlane> infrared;
    GeoCoordinate geo;
    std::optional<int> keyPositionId;
    std::optional<int> viewTag;

    bool isKeyPosition() const { return keyPositionId.has_value(); }
};

struct Trajectory {
    std::string name;
    std::vector<FrameRecord> frames;
};

/// Free parameters of the retrieval stage.
struct QueryParams {
    int kGist = 5;
    int kLdb = 5;
    int kBow = 5;
    double radius = 30.0;          // meters, unless legacyDegreeRadius
    bool legacyDegreeRadius = false; // treat radius as raw (lat, lon) degrees
    int voteThreshold = 5;         // n: key votes needed for a key prediction
};

/// Throws ConfigError when params violate their invariants.
void validateParams(const QueryParams& p);

/// Returns one message per violated frame invariant; empty means valid.
std::vector<std::string> validateFrame(const FrameRecord& frame);

} // namespace keypos
