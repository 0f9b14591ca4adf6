#include "keypos/synth.hpp"

#include "keypos/errors.hpp"
#include "keypos/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace keypos {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash2(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(seed ^ splitmix64(a));
}

std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(hash2(seed, a) ^ splitmix64(b + 0x51ed270b0a9cd1edULL));
}

std::uint64_t hash4(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(hash3(seed, a, b) ^ splitmix64(c + 0x2545f4914f6cdd1dULL));
}

double unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi) keyed by the hash.
double range(std::uint64_t h, double lo, double hi) {
    return lo + (hi - lo) * unit(h);
}

double smooth(double t) {
    return t * t * (3.0 - 2.0 * t);
}

// Value noise in [0, 1]: bilinear blend of lattice-point hashes. Row-major
// evaluation keeps the four corner values cached between lattice cells.
class ValueNoise {
public:
    ValueNoise(std::uint64_t seed, int lattice) : seed_(seed), lattice_(lattice) {}

    double at(std::int64_t u, std::int64_t v) const {
        const std::int64_t i0 = floorDiv(u, lattice_);
        const std::int64_t j0 = floorDiv(v, lattice_);
        if (i0 != cellI_ || j0 != cellJ_) {
            cellI_ = i0;
            cellJ_ = j0;
            c00_ = corner(i0, j0);
            c10_ = corner(i0 + 1, j0);
            c01_ = corner(i0, j0 + 1);
            c11_ = corner(i0 + 1, j0 + 1);
        }
        const double tu = smooth(static_cast<double>(u - i0 * lattice_) / lattice_);
        const double tv = smooth(static_cast<double>(v - j0 * lattice_) / lattice_);
        const double top = c00_ + (c10_ - c00_) * tu;
        const double bot = c01_ + (c11_ - c01_) * tu;
        return top + (bot - top) * tv;
    }

private:
    static std::int64_t floorDiv(std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b;
        if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
        return q;
    }

    double corner(std::int64_t i, std::int64_t j) const {
        return unit(hash3(seed_, static_cast<std::uint64_t>(i + (1LL << 32)),
                          static_cast<std::uint64_t>(j + (1LL << 32))));
    }

    std::uint64_t seed_;
    int lattice_;
    mutable std::int64_t cellI_ = INT64_MIN;
    mutable std::int64_t cellJ_ = INT64_MIN;
    mutable double c00_ = 0.0, c10_ = 0.0, c01_ = 0.0, c11_ = 0.0;
};

struct Blob {
    std::int64_t x0 = 0, x1 = 0;
    int y0 = 0, y1 = 0;
    double dr = 0.0, dg = 0.0, db = 0.0;
    double depthMm = 0.0;
    double dIr = 0.0;
};

// Blobs live on a fixed world grid so overlapping frame windows see the very
// same instances. Returns the ones intersecting [uMin, uMax).
std::vector<Blob> blobsInRange(std::uint64_t seed, std::uint64_t tag, std::int64_t uMin,
                               std::int64_t uMax, int cell, double presence, int minSize,
                               int maxSize, double amp) {
    std::vector<Blob> out;
    const std::int64_t c0 = uMin / cell - 2;
    const std::int64_t c1 = uMax / cell + 2;
    for (std::int64_t c = c0; c <= c1; ++c) {
        for (int row = 0; row < 6; ++row) {
            const std::uint64_t h = hash4(seed, tag, static_cast<std::uint64_t>(c + (1LL << 32)),
                                          static_cast<std::uint64_t>(row));
            if (unit(h) > presence) continue;
            Blob b;
            const std::uint64_t hx = splitmix64(h + 1);
            const std::uint64_t hy = splitmix64(h + 2);
            const std::uint64_t hw = splitmix64(h + 3);
            const std::uint64_t hh = splitmix64(h + 4);
            b.x0 = c * cell + static_cast<std::int64_t>(range(hx, 0.0, cell));
            b.y0 = static_cast<int>(range(hy, 0.0, 235.0 - maxSize)) + row * 2;
            b.x1 = b.x0 + minSize + static_cast<std::int64_t>(range(hw, 0.0, maxSize - minSize));
            b.y1 = b.y0 + minSize + static_cast<int>(range(hh, 0.0, maxSize - minSize));
            if (b.x1 < uMin || b.x0 >= uMax) continue;
            b.dr = range(splitmix64(h + 5), -amp, amp);
            b.dg = range(splitmix64(h + 6), -amp, amp);
            b.db = range(splitmix64(h + 7), -amp, amp);
            b.depthMm = range(splitmix64(h + 8), 600.0, 2600.0);
            b.dIr = range(splitmix64(h + 9), -45.0, 45.0);
            out.push_back(b);
        }
    }
    return out;
}

std::uint16_t clampByte(double v, double lo, double hi) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, lo, hi)));
}

struct FramePlanes {
    ImagePlane rgb;
    ImagePlane depth;
    ImagePlane ir;
};

// Background world: smooth low-frequency texture plus sparse rectangles.
// The window scrolls 8 px per frame, so neighbouring frames overlap heavily.
FramePlanes renderBackground(std::uint64_t seed, int frameIndex) {
    FramePlanes out;
    out.rgb = makePlane(kFrameWidth, kFrameHeight, 3, 8);
    out.depth = makePlane(kFrameWidth, kFrameHeight, 1, 16);
    out.ir = makePlane(kFrameWidth, kFrameHeight, 1, 8);

    const std::int64_t u0 = static_cast<std::int64_t>(frameIndex) * 8;
    const ValueNoise lum(hash2(seed, 11), 48);
    const ValueNoise chromaR(hash2(seed, 12), 64);
    const ValueNoise chromaG(hash2(seed, 13), 64);
    const ValueNoise chromaB(hash2(seed, 14), 64);
    const ValueNoise depthN(hash2(seed, 15), 80);
    const ValueNoise irN(hash2(seed, 16), 36);
    const auto blobs = blobsInRange(seed, 21, u0, u0 + kFrameWidth, 24, 0.55, 8, 34, 55.0);

    for (int y = 0; y < kFrameHeight; ++y) {
        for (int x = 0; x < kFrameWidth; ++x) {
            const std::int64_t u = u0 + x;
            double dr = 0.0, dg = 0.0, db = 0.0, dIr = 0.0;
            double depthMm = 2500.0 + 5000.0 * depthN.at(u, y);
            for (const Blob& b : blobs) {
                if (u >= b.x0 && u < b.x1 && y >= b.y0 && y < b.y1) {
                    dr += b.dr;
                    dg += b.dg;
                    db += b.db;
                    dIr += b.dIr;
                    depthMm = b.depthMm;
                }
            }
            const double base = 60.0 + 90.0 * lum.at(u, y);
            const double grain =
                12.0 * (unit(hash4(seed, 31, static_cast<std::uint64_t>(u),
                                   static_cast<std::uint64_t>(y))) -
                        0.5);
            out.rgb.at(x, y, 0) = clampByte(base + 40.0 * (chromaR.at(u, y) - 0.5) + dr + grain, 16.0, 190.0);
            out.rgb.at(x, y, 1) = clampByte(base + 40.0 * (chromaG.at(u, y) - 0.5) + dg + grain, 16.0, 190.0);
            out.rgb.at(x, y, 2) = clampByte(base + 40.0 * (chromaB.at(u, y) - 0.5) + db + grain, 16.0, 190.0);

            const double dj =
                25.0 * (unit(hash4(seed, 32, static_cast<std::uint64_t>(u),
                                   static_cast<std::uint64_t>(y))) -
                        0.5);
            out.depth.at(x, y, 0) = static_cast<std::uint16_t>(
                std::lround(std::clamp(depthMm + dj, 500.0, 9500.0)));

            const double ir = 50.0 + 120.0 * irN.at(u, y) + dIr +
                              10.0 * (unit(hash4(seed, 33, static_cast<std::uint64_t>(u),
                                                 static_cast<std::uint64_t>(y))) -
                                      0.5);
            out.ir.at(x, y, 0) = clampByte(ir, 16.0, 200.0);
        }
    }
    return out;
}

// Key-position scene: a high-contrast plaid plus a dense rectangle grid, all
// parameters hashed from the key id. Views shift the window by 40 px, so
// frames of one span stay close to each other in every descriptor channel.
FramePlanes renderKeyScene(std::uint64_t seed, int keyId, int view) {
    FramePlanes out;
    out.rgb = makePlane(kFrameWidth, kFrameHeight, 3, 8);
    out.depth = makePlane(kFrameWidth, kFrameHeight, 1, 16);
    out.ir = makePlane(kFrameWidth, kFrameHeight, 1, 8);

    const std::uint64_t sk = hash3(seed, 0x6b6579ULL, static_cast<std::uint64_t>(keyId));
    const std::int64_t u0 = static_cast<std::int64_t>(view) * 40;

    const double lam1 = range(hash2(sk, 1), 9.0, 18.0);
    const double lam2 = range(hash2(sk, 2), 9.0, 18.0);
    const double ph1 = range(hash2(sk, 3), 0.0, 2.0 * kPi);
    const double ph2 = range(hash2(sk, 4), 0.0, 2.0 * kPi);
    const double amp1 = range(hash2(sk, 5), 28.0, 40.0);
    const double amp2 = range(hash2(sk, 6), 28.0, 40.0);
    const double base = range(hash2(sk, 7), 85.0, 125.0);
    const double lamD = range(hash2(sk, 8), 24.0, 48.0);
    const double phD = range(hash2(sk, 9), 0.0, 2.0 * kPi);
    const ValueNoise chroma(hash2(sk, 10), 40);
    const ValueNoise irN(hash2(sk, 11), 20);
    const auto blobs = blobsInRange(sk, 22, u0, u0 + kFrameWidth, 18, 0.7, 5, 16, 45.0);

    for (int y = 0; y < kFrameHeight; ++y) {
        const double sy = amp2 * std::sin(2.0 * kPi * y / lam2 + ph2);
        for (int x = 0; x < kFrameWidth; ++x) {
            const std::int64_t u = u0 + x;
            double dr = 0.0, dg = 0.0, db = 0.0, dIr = 0.0;
            double depthMm = 2800.0 + 2300.0 * std::sin(2.0 * kPi * u / lamD + phD);
            for (const Blob& b : blobs) {
                if (u >= b.x0 && u < b.x1 && y >= b.y0 && y < b.y1) {
                    dr += b.dr;
                    dg += b.dg;
                    db += b.db;
                    dIr += b.dIr;
                    depthMm = b.depthMm;
                }
            }
            const double plaid = base + amp1 * std::sin(2.0 * kPi * u / lam1 + ph1) + sy;
            const double grain =
                12.0 * (unit(hash4(sk, 31, static_cast<std::uint64_t>(u),
                                   static_cast<std::uint64_t>(y))) -
                        0.5);
            const double cOff = 46.0 * (chroma.at(u, y) - 0.5);
            out.rgb.at(x, y, 0) = clampByte(plaid + cOff + dr + grain, 16.0, 190.0);
            out.rgb.at(x, y, 1) = clampByte(plaid - cOff + dg + grain, 16.0, 190.0);
            out.rgb.at(x, y, 2) = clampByte(plaid + 0.4 * cOff + db + grain, 16.0, 190.0);

            out.depth.at(x, y, 0) = static_cast<std::uint16_t>(
                std::lround(std::clamp(depthMm, 500.0, 9500.0)));

            const double ir = 60.0 + 130.0 * irN.at(u, y) + dIr;
            out.ir.at(x, y, 0) = clampByte(ir, 16.0, 200.0);
        }
    }
    return out;
}

std::vector<GeoCoordinate> interpolatePath(const std::vector<GeoCoordinate>& path, int count) {
    std::vector<GeoCoordinate> out;
    out.reserve(count);
    if (path.size() == 1) {
        out.assign(count, path.front());
        return out;
    }
    std::vector<double> cum(path.size(), 0.0);
    for (std::size_t i = 1; i < path.size(); ++i) {
        cum[i] = cum[i - 1] + haversineMeters(path[i - 1], path[i]);
    }
    const double total = cum.back();
    for (int i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : total * i / (count - 1);
        std::size_t seg = 1;
        while (seg + 1 < path.size() && cum[seg] < s) ++seg;
        const double span = cum[seg] - cum[seg - 1];
        const double t = span > 0.0 ? (s - cum[seg - 1]) / span : 0.0;
        GeoCoordinate g;
        g.lat = path[seg - 1].lat + t * (path[seg].lat - path[seg - 1].lat);
        g.lon = path[seg - 1].lon + t * (path[seg].lon - path[seg - 1].lon);
        out.push_back(g);
    }
    return out;
}

} // namespace

Trajectory synthTrajectory(const SynthSpec& spec) {
    if (spec.frameCount <= 0) {
        throw ValidationError("synth spec needs a positive frame count");
    }
    if (spec.geoPath.empty()) {
        throw ValidationError("synth spec needs at least one geo point");
    }
    for (const GeoCoordinate& g : spec.geoPath) {
        if (!geoValid(g)) throw ValidationError("synth geo path point out of range");
    }
    std::vector<KeySpan> spans = spec.keySpans;
    std::sort(spans.begin(), spans.end(),
              [](const KeySpan& a, const KeySpan& b) { return a.first < b.first; });
    int prevEnd = -1;
    for (const KeySpan& s : spans) {
        if (s.first < 0 || s.last >= spec.frameCount || s.first > s.last) {
            throw ValidationError("key span outside trajectory range");
        }
        if (s.first <= prevEnd) throw ValidationError("key spans overlap");
        prevEnd = s.last;
    }

    const auto geo = interpolatePath(spec.geoPath, spec.frameCount);

    Trajectory traj;
    traj.name = "synth";
    traj.frames.resize(spec.frameCount);
    for (int i = 0; i < spec.frameCount; ++i) {
        FrameRecord& f = traj.frames[i];
        f.index = i;
        f.timestamp = static_cast<double>(i);
        f.geo = geo[i];

        const KeySpan* inSpan = nullptr;
        for (const KeySpan& s : spans) {
            if (i >= s.first && i <= s.last) {
                inSpan = &s;
                break;
            }
        }
        FramePlanes planes = inSpan
                                 ? renderKeyScene(spec.noiseSeed, inSpan->keyId, i - inSpan->first)
                                 : renderBackground(spec.noiseSeed, i);
        f.rgb = std::move(planes.rgb);
        f.depth = std::move(planes.depth);
        f.infrared = std::move(planes.ir);
        if (inSpan != nullptr) {
            f.keyPositionId = inSpan->keyId;
            f.viewTag = i - inSpan->first;
        }
    }
    return traj;
}

} // namespace keypos
