#pragma once

#include "keypos/frame.hpp"
#include "keypos/image.hpp"

#include <vector>

namespace keypos {

/// Frequency-domain Gabor transfer functions, one grid per (scale, orientation).
struct GaborBank {
    int workSize = 0;
    std::vector<int> scaleOfFilter;
    std::vector<int> orientationOfFilter;
    std::vector<std::vector<float>> filters; // workSize*workSize, row-major

    int filterCount() const { return static_cast<int>(filters.size()); }
};

inline constexpr int kGistWorkSize = 128;
inline constexpr int kGistBlocks = 4;
inline const std::vector<int> kGistOrientations = {8, 8, 4};

/// Log-Gabor bank: orientations evenly spaced in [0, pi); center frequency
/// halves per scale starting at workSize/4 cycles per image. Every transfer
/// grid has zero DC response, so constant images map to zero descriptors.
GaborBank buildGaborBank(int scales, const std::vector<int>& orientationsPerScale, int workSize);

struct GistLayoutEntry {
    Modality modality;
    int offset = 0;
    int length = 0;

    bool operator==(const GistLayoutEntry&) const = default;
};

struct GistDescriptor {
    std::vector<float> values;
    std::vector<GistLayoutEntry> layout;
};

/// Single-modality GIST: filter in the frequency domain, block-average the
/// response magnitudes over a blocks x blocks grid, concatenate filter-major.
/// The input must already be prefiltered and sized to bank.workSize.
std::vector<float> gistDescriptor(const GrayImage& image, const GaborBank& bank,
                                  int blocks = kGistBlocks);

/// Full per-frame pipeline over the requested modalities, concatenated in
/// fixed order RGB, IR, D. Each modality is grayscaled, resized to the bank
/// resolution, prefiltered, then described.
GistDescriptor gistMultimodal(const FrameRecord& frame, const GaborBank& bank,
                              Modalities modalities);

/// Euclidean distance; layouts must match.
double gistDistance(const GistDescriptor& a, const GistDescriptor& b);

} // namespace keypos
