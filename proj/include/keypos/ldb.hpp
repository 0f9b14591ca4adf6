#pragma once

#include "keypos/bitvec.hpp"
#include "keypos/frame.hpp"
#include "keypos/image.hpp"
#include "keypos/preprocess.hpp"

#include <vector>

namespace keypos {

inline constexpr int kLdbPatchSize = 60; // divisible by every grid level
inline const std::vector<int> kLdbGrids = {2, 3, 4, 5};
inline constexpr int kLdbBitsPerModality = 1386; // 3 * sum C(g^2, 2)

struct LdbLayoutEntry {
    Modality modality;
    int bitOffset = 0;
    int bitLength = 0;

    bool operator==(const LdbLayoutEntry&) const = default;
};

struct LdbDescriptor {
    BitVector bits;
    std::vector<LdbLayoutEntry> layout;
};

/// Single-modality LDB on a 60x60 patch: for each grid level g the patch is
/// split into g x g cells; each unordered cell pair (i<j, row-major) emits
/// three comparison bits (mean intensity, mean x-gradient, mean y-gradient),
/// strict '>' with equal meaning 0. Bit order: grid ascending, pair ascending,
/// test order I, Gx, Gy.
BitVector ldbSingle(const GrayImage& image);

/// Compounded descriptor, concatenated in fixed order RGB, D, IR. The RGB
/// channel passes through the illumination-invariance transform first; depth
/// and IR come from their [0,1] gray mappings. Each modality image is resized
/// to the patch size before description.
LdbDescriptor ldbCompound(const FrameRecord& frame, Modalities modalities,
                          double alpha = kIlluminationAlpha);

/// Hamming distance; layouts must match.
int ldbDistance(const LdbDescriptor& a, const LdbDescriptor& b);

} // namespace keypos
