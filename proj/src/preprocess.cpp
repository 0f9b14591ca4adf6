#include "keypos/preprocess.hpp"

#include "keypos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace keypos {

GrayImage illuminationInvariant(const ImagePlane& rgb, double alpha) {
    if (rgb.channels != 3 || rgb.depthBits != 8) {
        throw ConfigError("illumination transform needs an 8-bit RGB image");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("illumination alpha must lie in (0,1)");
    }
    GrayImage out = makeGray(rgb.width, rgb.height);
    for (int y = 0; y < rgb.height; ++y) {
        for (int x = 0; x < rgb.width; ++x) {
            const double r = std::max<int>(rgb.at(x, y, 0), 1) / 255.0;
            const double g = std::max<int>(rgb.at(x, y, 1), 1) / 255.0;
            const double b = std::max<int>(rgb.at(x, y, 2), 1) / 255.0;
            out.at(x, y) = static_cast<float>(0.5 + std::log(g) - alpha * std::log(b) -
                                              (1.0 - alpha) * std::log(r));
        }
    }
    return out;
}

namespace {

std::vector<double> gaussianKernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

} // namespace

GrayImage gaussianBlur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) throw ConfigError("blur sigma must be positive");
    const auto kernel = gaussianKernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width;
    const int h = img.height;

    // Accumulating deltas from the center tap keeps constant regions exact
    // (a constant image blurs to itself bitwise), which the whitening step
    // relies on to map constant inputs to exact zeros.
    GrayImage horiz = makeGray(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double center = img.at(x, y);
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xi = std::clamp(x + i, 0, w - 1);
                acc += kernel[i + radius] * (img.at(xi, y) - center);
            }
            horiz.at(x, y) = static_cast<float>(center + acc);
        }
    }
    GrayImage out = makeGray(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double center = horiz.at(x, y);
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yi = std::clamp(y + i, 0, h - 1);
                acc += kernel[i + radius] * (horiz.at(x, yi) - center);
            }
            out.at(x, y) = static_cast<float>(center + acc);
        }
    }
    return out;
}

GrayImage prefilterNormalize(const GrayImage& gray) {
    const int w = gray.width;
    const int h = gray.height;
    GrayImage logImg = makeGray(w, h);
    for (int i = 0; i < w * h; ++i) {
        logImg.values[i] = static_cast<float>(std::log(1.0 + 255.0 * gray.values[i]));
    }

    const GrayImage low = gaussianBlur(logImg, kWhitenSigma);
    GrayImage white = makeGray(w, h);
    GrayImage whiteSq = makeGray(w, h);
    for (int i = 0; i < w * h; ++i) {
        const float d = logImg.values[i] - low.values[i];
        white.values[i] = d;
        whiteSq.values[i] = d * d;
    }

    const GrayImage localVar = gaussianBlur(whiteSq, kWhitenSigma);
    GrayImage out = makeGray(w, h);
    for (int i = 0; i < w * h; ++i) {
        const double var = std::max(0.0, static_cast<double>(localVar.values[i]));
        out.values[i] = static_cast<float>(white.values[i] / (kContrastEpsilon + std::sqrt(var)));
    }
    return out;
}

} // namespace keypos
