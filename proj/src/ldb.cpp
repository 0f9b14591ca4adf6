#include "keypos/ldb.hpp"

#include "keypos/errors.hpp"

#include <vector>

namespace keypos {

namespace {

struct CellStats {
    double meanI = 0.0;
    double meanGx = 0.0;
    double meanGy = 0.0;
};

// Gradients use central differences inside the cell, one-sided at its borders,
// so each cell is self-contained.
CellStats cellStats(const GrayImage& img, int x0, int y0, int w, int h) {
    CellStats s;
    double sumI = 0.0, sumGx = 0.0, sumGy = 0.0;
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            sumI += img.at(x, y);
            const int xl = x > x0 ? x - 1 : x;
            const int xr = x < x0 + w - 1 ? x + 1 : x;
            sumGx += (img.at(xr, y) - img.at(xl, y)) / (xr - xl);
            const int yu = y > y0 ? y - 1 : y;
            const int yd = y < y0 + h - 1 ? y + 1 : y;
            sumGy += (img.at(x, yd) - img.at(x, yu)) / (yd - yu);
        }
    }
    const double n = static_cast<double>(w) * h;
    s.meanI = sumI / n;
    s.meanGx = sumGx / n;
    s.meanGy = sumGy / n;
    return s;
}

} // namespace

BitVector ldbSingle(const GrayImage& image) {
    if (image.width != kLdbPatchSize || image.height != kLdbPatchSize) {
        throw ConfigError("ldb input must be resized to the 60x60 patch");
    }

    BitVector bits(kLdbBitsPerModality);
    std::size_t bit = 0;
    std::vector<CellStats> cells;
    for (int g : kLdbGrids) {
        const int cell = kLdbPatchSize / g;
        cells.clear();
        cells.reserve(static_cast<std::size_t>(g) * g);
        for (int gy = 0; gy < g; ++gy) {
            for (int gx = 0; gx < g; ++gx) {
                cells.push_back(cellStats(image, gx * cell, gy * cell, cell, cell));
            }
        }
        const int n = g * g;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (cells[i].meanI > cells[j].meanI) bits.set(bit);
                ++bit;
                if (cells[i].meanGx > cells[j].meanGx) bits.set(bit);
                ++bit;
                if (cells[i].meanGy > cells[j].meanGy) bits.set(bit);
                ++bit;
            }
        }
    }
    return bits;
}

namespace {

BitVector ldbForGray(const GrayImage& gray) {
    return ldbSingle(resizeBilinear(gray, kLdbPatchSize, kLdbPatchSize));
}

void appendBits(LdbDescriptor& desc, Modality m, const BitVector& part) {
    LdbLayoutEntry e;
    e.modality = m;
    e.bitOffset = static_cast<int>(desc.bits.size());
    e.bitLength = static_cast<int>(part.size());

    BitVector merged(desc.bits.size() + part.size());
    for (std::size_t i = 0; i < desc.bits.size(); ++i) {
        if (desc.bits.test(i)) merged.set(i);
    }
    for (std::size_t i = 0; i < part.size(); ++i) {
        if (part.test(i)) merged.set(e.bitOffset + i);
    }
    desc.bits = std::move(merged);
    desc.layout.push_back(e);
}

} // namespace

LdbDescriptor ldbCompound(const FrameRecord& frame, Modalities modalities, double alpha) {
    LdbDescriptor desc;
    appendBits(desc, Modality::Rgb, ldbForGray(illuminationInvariant(frame.rgb, alpha)));
    if (usesDepth(modalities)) {
        if (!frame.depth.has_value()) {
            throw ValidationError("frame lacks the depth modality required by the config");
        }
        appendBits(desc, Modality::Depth, ldbForGray(depthToGray(*frame.depth)));
    }
    if (usesIr(modalities)) {
        if (!frame.infrared.has_value()) {
            throw ValidationError("frame lacks the infrared modality required by the config");
        }
        appendBits(desc, Modality::Ir, ldbForGray(irToGray(*frame.infrared)));
    }
    return desc;
}

int ldbDistance(const LdbDescriptor& a, const LdbDescriptor& b) {
    if (a.bits.size() != b.bits.size() || a.layout != b.layout) {
        throw ConfigError("ldb descriptors have mismatched layouts");
    }
    return static_cast<int>(BitVector::hamming(a.bits, b.bits));
}

} // namespace keypos
