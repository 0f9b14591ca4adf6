#pragma once

#include "keypos/frame.hpp"

#include <cstdint>
#include <vector>

namespace keypos {

/// Inclusive frame range labeled with one key-position id.
struct KeySpan {
    int first = 0;
    int last = 0;
    int keyId = 0;
};

struct SynthSpec {
    int frameCount = 0;
    std::vector<KeySpan> keySpans;
    std::vector<GeoCoordinate> geoPath; // polyline; frames spaced by arc length
    std::uint64_t noiseSeed = 0;
};

/// Deterministic synthetic trajectory: procedurally textured 320x240
/// RGB/depth/IR planes plus GNSS points interpolated along the polyline.
///
/// Non-key frames sample a slowly scrolling background world, so visual
/// similarity decays smoothly with index distance. Frames inside a key span
/// render a separate per-key-id scene family (shifted per view), which makes
/// the views of one key position resemble each other far more than any
/// background frame. Identical specs produce bit-identical trajectories.
Trajectory synthTrajectory(const SynthSpec& spec);

} // namespace keypos
