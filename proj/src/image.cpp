#include "keypos/image.hpp"

#include "keypos/errors.hpp"

#include <algorithm>
#include <cmath>

namespace keypos {

ImagePlane makePlane(int width, int height, int channels, int depthBits)
{
    ImagePlane p;
    p.width = width;
    p.height = height;
    p.channels = channels;
    p.depthBits = depthBits;
    p.samples.assign(static_cast<std::size_t>(width) * height * channels, 0);
    return p;
}

GrayImage makeGray(int width, int height, float fill)
{
    GrayImage g;
    g.width = width;
    g.height = height;
    g.values.assign(static_cast<std::size_t>(width) * height, fill);
    return g;
}

GrayImage toGrayscale(const ImagePlane& rgb)
{
    if (rgb.channels != 3 || rgb.depthBits != 8)
        throw ConfigError("toGrayscale expects an 8-bit 3-channel plane");
    GrayImage g = makeGray(rgb.width, rgb.height);
    const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rgb.samples[i * 3 + 0];
        const double gg = rgb.samples[i * 3 + 1];
        const double b = rgb.samples[i * 3 + 2];
        g.values[i] = static_cast<float>((0.299 * r + 0.587 * gg + 0.114 * b) / 255.0);
    }
    return g;
}

GrayImage irToGray(const ImagePlane& ir)
{
    if (ir.channels != 1 || ir.depthBits != 8)
        throw ConfigError("irToGray expects an 8-bit 1-channel plane");
    GrayImage g = makeGray(ir.width, ir.height);
    for (std::size_t i = 0; i < g.values.size(); ++i)
        g.values[i] = static_cast<float>(ir.samples[i] / 255.0);
    return g;
}

GrayImage depthToGray(const ImagePlane& depth, float clampMm)
{
    if (depth.channels != 1 || depth.depthBits != 16)
        throw ConfigError("depthToGray expects a 16-bit 1-channel plane");
    GrayImage g = makeGray(depth.width, depth.height);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const float mm = std::min(static_cast<float>(depth.samples[i]), clampMm);
        g.values[i] = mm / clampMm;
    }
    return g;
}

GrayImage resizeBilinear(const GrayImage& src, int dstWidth, int dstHeight)
{
    if (src.width <= 0 || src.height <= 0)
        throw ConfigError("resizeBilinear: empty source image");
    if (dstWidth == src.width && dstHeight == src.height)
        return src;

    GrayImage dst = makeGray(dstWidth, dstHeight);
    const double sx = static_cast<double>(src.width) / dstWidth;
    const double sy = static_cast<double>(src.height) / dstHeight;
    for (int y = 0; y < dstHeight; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        int y1 = y0 + 1;
        y0 = std::clamp(y0, 0, src.height - 1);
        y1 = std::clamp(y1, 0, src.height - 1);
        for (int x = 0; x < dstWidth; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            int x1 = x0 + 1;
            x0 = std::clamp(x0, 0, src.width - 1);
            x1 = std::clamp(x1, 0, src.width - 1);
            const double top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
            const double bot = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
            dst.at(x, y) = static_cast<float>(top * (1.0 - wy) + bot * wy);
        }
    }
    return dst;
}

} // namespace keypos
