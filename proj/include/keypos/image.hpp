#pragma once

#include <cstdint>
#include <vector>

namespace keypos {

/// Raw multi-modal image plane as stored in the dataset. Samples are kept in
/// uint16 regardless of depthBits; 8-bit planes use the range [0, 255].
struct ImagePlane {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 or 3
    int depthBits = 8; // 8 or 16
    std::vector<std::uint16_t> samples; // row-major, interleaved channels

    std::uint16_t at(int x, int y, int c = 0) const
    {
        return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint16_t& at(int x, int y, int c = 0)
    {
        return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool sizeConsistent() const
    {
        return samples.size() ==
               static_cast<std::size_t>(width) * height * channels;
    }
};

ImagePlane makePlane(int width, int height, int channels, int depthBits);

/// Real-valued single-channel working image used by all descriptor channels.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> values; // row-major

    float at(int x, int y) const
    {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    float& at(int x, int y)
    {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

GrayImage makeGray(int width, int height, float fill = 0.0f);

/// Rec.601 luma of an 8-bit RGB plane, scaled to [0, 1].
GrayImage toGrayscale(const ImagePlane& rgb);

/// 8-bit single-channel plane scaled to [0, 1].
GrayImage irToGray(const ImagePlane& ir);

/// 16-bit depth in millimeters, clamped at clampMm and mapped to [0, 1].
/// Zero samples ("no reading") map to 0.
GrayImage depthToGray(const ImagePlane& depth, float clampMm = 10000.0f);

/// Bilinear resampling with half-pixel centers and edge clamping.
GrayImage resizeBilinear(const GrayImage& src, int dstWidth, int dstHeight);

} // namespace keypos
