#include "keypos/orb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace keypos {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr int kCircleX[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleY[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

int longestCircularRun(const bool flags[16]) {
    int best = 0;
    int run = 0;
    for (int i = 0; i < 32; ++i) {
        if (flags[i & 15]) {
            ++run;
            best = std::max(best, std::min(run, 16));
        } else {
            run = 0;
        }
    }
    return best;
}

struct LevelKeypoint {
    int x = 0;
    int y = 0;
    float response = 0.0f;
};

std::vector<LevelKeypoint> detectAtLevel(const GrayImage& img, double threshold) {
    const int w = img.width;
    const int h = img.height;
    std::vector<float> score(static_cast<std::size_t>(w) * h, 0.0f);
    const int margin = kOrbPatchRadius;

    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            const float p = img.at(x, y);
            bool bright[16];
            bool dark[16];
            float circle[16];
            for (int i = 0; i < 16; ++i) {
                circle[i] = img.at(x + kCircleX[i], y + kCircleY[i]);
                bright[i] = circle[i] > p + threshold;
                dark[i] = circle[i] < p - threshold;
            }
            if (longestCircularRun(bright) < 9 && longestCircularRun(dark) < 9) continue;
            double sBright = 0.0, sDark = 0.0;
            for (int i = 0; i < 16; ++i) {
                if (bright[i]) sBright += circle[i] - p - threshold;
                if (dark[i]) sDark += p - circle[i] - threshold;
            }
            score[static_cast<std::size_t>(y) * w + x] =
                static_cast<float>(std::max(sBright, sDark));
        }
    }

    // 3x3 non-maximum suppression; equal scores resolved in raster order.
    std::vector<LevelKeypoint> out;
    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            const float s = score[static_cast<std::size_t>(y) * w + x];
            if (s <= 0.0f) continue;
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy) {
                for (int dx = -1; dx <= 1 && keep; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const float ns = score[static_cast<std::size_t>(y + dy) * w + (x + dx)];
                    if (ns > s) keep = false;
                    if (ns == s && (dy < 0 || (dy == 0 && dx < 0))) keep = false;
                }
            }
            if (keep) out.push_back({x, y, s});
        }
    }
    return out;
}

double levelScale(const GrayImage& full, int level, int& wl, int& hl) {
    const double factor = std::pow(kOrbScaleFactor, level);
    wl = std::max(2 * kOrbPatchRadius + 2, static_cast<int>(std::lround(full.width / factor)));
    hl = std::max(2 * kOrbPatchRadius + 2, static_cast<int>(std::lround(full.height / factor)));
    return static_cast<double>(full.width) / wl;
}

struct PatternPoint {
    int px, py, qx, qy;
};

// Test points drawn once from a seeded Gaussian (sigma = patch/5) and kept
// inside the radius-13 disc, so rotated samples stay within the 15 px margin.
const std::array<PatternPoint, kOrbDescriptorBits>& orbPattern() {
    static const std::array<PatternPoint, kOrbDescriptorBits> pattern = [] {
        std::array<PatternPoint, kOrbDescriptorBits> out{};
        std::mt19937_64 rng(kOrbPatternSeed);
        const double sigma = 31.0 / 5.0;
        double spare = 0.0;
        bool hasSpare = false;
        auto gauss = [&]() {
            if (hasSpare) {
                hasSpare = false;
                return spare;
            }
            const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double r = std::sqrt(-2.0 * std::log(u1));
            spare = r * std::sin(2.0 * kPi * u2);
            hasSpare = true;
            return r * std::cos(2.0 * kPi * u2);
        };
        auto drawPoint = [&](int& ox, int& oy) {
            for (;;) {
                const int x = static_cast<int>(std::lround(sigma * gauss()));
                const int y = static_cast<int>(std::lround(sigma * gauss()));
                if (x * x + y * y <= 13 * 13) {
                    ox = x;
                    oy = y;
                    return;
                }
            }
        };
        for (auto& p : out) {
            drawPoint(p.px, p.py);
            do {
                drawPoint(p.qx, p.qy);
            } while (p.qx == p.px && p.qy == p.py);
        }
        return out;
    }();
    return pattern;
}

} // namespace

int orbHamming(const OrbDescriptor& a, const OrbDescriptor& b) {
    int d = 0;
    for (int i = 0; i < 4; ++i) d += std::popcount(a.words[i] ^ b.words[i]);
    return d;
}

std::vector<Keypoint> detectFast(const GrayImage& gray, double threshold, int maxKeypoints) {
    std::vector<Keypoint> all;
    GrayImage level = gray;
    for (int l = 0; l < kOrbPyramidLevels; ++l) {
        int wl = 0, hl = 0;
        const double scale = levelScale(gray, l, wl, hl);
        if (l > 0) level = resizeBilinear(gray, wl, hl);
        for (const LevelKeypoint& k : detectAtLevel(level, threshold)) {
            Keypoint kp;
            kp.x = static_cast<float>(k.x * scale);
            kp.y = static_cast<float>(k.y * scale);
            kp.response = k.response;
            kp.octave = l;
            all.push_back(kp);
        }
    }
    std::sort(all.begin(), all.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.octave < b.octave;
    });
    if (static_cast<int>(all.size()) > maxKeypoints) all.resize(maxKeypoints);
    return all;
}

OrbResult orbDescribe(const GrayImage& gray, const std::vector<Keypoint>& keypoints) {
    OrbResult result;
    const auto& pattern = orbPattern();

    // Per-level images are cached since keypoints arrive grouped arbitrarily.
    std::array<GrayImage, kOrbPyramidLevels> levels;
    std::array<bool, kOrbPyramidLevels> built{};
    std::array<double, kOrbPyramidLevels> scales{};
    for (int l = 0; l < kOrbPyramidLevels; ++l) {
        int wl = 0, hl = 0;
        scales[l] = levelScale(gray, l, wl, hl);
    }

    for (const Keypoint& kp : keypoints) {
        if (kp.octave < 0 || kp.octave >= kOrbPyramidLevels) {
            ++result.skipped;
            continue;
        }
        const int l = kp.octave;
        if (!built[l]) {
            int wl = 0, hl = 0;
            levelScale(gray, l, wl, hl);
            levels[l] = l == 0 ? gray : resizeBilinear(gray, wl, hl);
            built[l] = true;
        }
        const GrayImage& img = levels[l];
        const int cx = static_cast<int>(std::lround(kp.x / scales[l]));
        const int cy = static_cast<int>(std::lround(kp.y / scales[l]));
        if (cx < kOrbPatchRadius || cy < kOrbPatchRadius || cx >= img.width - kOrbPatchRadius ||
            cy >= img.height - kOrbPatchRadius) {
            ++result.skipped;
            continue;
        }

        double m10 = 0.0, m01 = 0.0;
        for (int dy = -kOrbPatchRadius; dy <= kOrbPatchRadius; ++dy) {
            for (int dx = -kOrbPatchRadius; dx <= kOrbPatchRadius; ++dx) {
                if (dx * dx + dy * dy > kOrbPatchRadius * kOrbPatchRadius) continue;
                const double v = img.at(cx + dx, cy + dy);
                m10 += dx * v;
                m01 += dy * v;
            }
        }
        double angle = std::atan2(m01, m10);
        if (angle < 0.0) angle += 2.0 * kPi;

        const double ca = std::cos(angle);
        const double sa = std::sin(angle);
        OrbDescriptor desc;
        for (int i = 0; i < kOrbDescriptorBits; ++i) {
            const PatternPoint& t = pattern[i];
            const int px = static_cast<int>(std::lround(ca * t.px - sa * t.py));
            const int py = static_cast<int>(std::lround(sa * t.px + ca * t.py));
            const int qx = static_cast<int>(std::lround(ca * t.qx - sa * t.qy));
            const int qy = static_cast<int>(std::lround(sa * t.qx + ca * t.qy));
            if (img.at(cx + px, cy + py) < img.at(cx + qx, cy + qy)) desc.setBit(i);
        }

        Keypoint described = kp;
        described.angle = static_cast<float>(angle);
        result.keypoints.push_back(described);
        result.descriptors.push_back(desc);
    }
    return result;
}

OrbResult orbExtract(const GrayImage& gray, double threshold, int maxKeypoints) {
    return orbDescribe(gray, detectFast(gray, threshold, maxKeypoints));
}

} // namespace keypos
