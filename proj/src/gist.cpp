#include "keypos/gist.hpp"

#include "keypos/errors.hpp"
#include "keypos/preprocess.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace keypos {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadialSigma = 0.35; // log-frequency units

// FFTW plan creation is not thread-safe; plans are cached per size and
// executed through the new-array interface on fftwf_malloc'd buffers.
struct PlanPair {
    fftwf_plan forward = nullptr;
    fftwf_plan inverse = nullptr;
};

PlanPair plansForSize(int n) {
    static std::mutex mutex;
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    fftwf_complex* a = fftwf_alloc_complex(static_cast<std::size_t>(n) * n);
    fftwf_complex* b = fftwf_alloc_complex(static_cast<std::size_t>(n) * n);
    PlanPair p;
    p.forward = fftwf_plan_dft_2d(n, n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inverse = fftwf_plan_dft_2d(n, n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftwf_free(a);
    fftwf_free(b);
    cache.emplace(n, p);
    return p;
}

struct FftwDeleter {
    void operator()(fftwf_complex* p) const { fftwf_free(p); }
};
using ComplexBuf = std::unique_ptr<fftwf_complex[], FftwDeleter>;

ComplexBuf allocComplex(int n) {
    return ComplexBuf(fftwf_alloc_complex(static_cast<std::size_t>(n) * n));
}

double wrapToPi(double a) {
    while (a >= kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

} // namespace

GaborBank buildGaborBank(int scales, const std::vector<int>& orientationsPerScale, int workSize) {
    if (scales != static_cast<int>(orientationsPerScale.size())) {
        throw ConfigError("scale count must match the orientations list");
    }
    if (workSize < 8 || (workSize & (workSize - 1)) != 0) {
        throw ConfigError("gabor work size must be a power of two >= 8");
    }
    for (int o : orientationsPerScale) {
        if (o <= 0) throw ConfigError("every scale needs at least one orientation");
    }

    GaborBank bank;
    bank.workSize = workSize;
    const int n = workSize;
    for (int s = 0; s < scales; ++s) {
        const double f0 = workSize / std::pow(2.0, s + 2); // cycles per image
        const int orientations = orientationsPerScale[s];
        const double sigmaTheta = 0.5 * kPi / orientations;
        for (int o = 0; o < orientations; ++o) {
            const double theta0 = o * kPi / orientations;
            std::vector<float> g(static_cast<std::size_t>(n) * n, 0.0f);
            for (int ky = 0; ky < n; ++ky) {
                const double v = ky <= n / 2 ? ky : ky - n;
                for (int kx = 0; kx < n; ++kx) {
                    const double u = kx <= n / 2 ? kx : kx - n;
                    if (u == 0.0 && v == 0.0) continue; // DC stays zero
                    const double f = std::sqrt(u * u + v * v);
                    const double lr = std::log(f / f0);
                    const double radial = std::exp(-lr * lr / (2.0 * kRadialSigma * kRadialSigma));
                    const double dTheta = wrapToPi(std::atan2(v, u) - theta0);
                    const double angular =
                        std::exp(-dTheta * dTheta / (2.0 * sigmaTheta * sigmaTheta));
                    g[static_cast<std::size_t>(ky) * n + kx] =
                        static_cast<float>(radial * angular);
                }
            }
            bank.filters.push_back(std::move(g));
            bank.scaleOfFilter.push_back(s);
            bank.orientationOfFilter.push_back(o);
        }
    }
    return bank;
}

std::vector<float> gistDescriptor(const GrayImage& image, const GaborBank& bank, int blocks) {
    const int n = bank.workSize;
    if (image.width != n || image.height != n) {
        throw ConfigError("gist input size does not match the bank work size");
    }
    if (blocks <= 0 || n % blocks != 0) {
        throw ConfigError("block grid must divide the work size");
    }

    const PlanPair plans = plansForSize(n);
    ComplexBuf spatial = allocComplex(n);
    ComplexBuf freq = allocComplex(n);
    ComplexBuf filtered = allocComplex(n);
    ComplexBuf response = allocComplex(n);

    const std::size_t total = static_cast<std::size_t>(n) * n;
    for (std::size_t i = 0; i < total; ++i) {
        spatial[i][0] = image.values[i];
        spatial[i][1] = 0.0f;
    }
    fftwf_execute_dft(plans.forward, spatial.get(), freq.get());

    const int blockSize = n / blocks;
    const float invArea = 1.0f / static_cast<float>(total);
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(bank.filterCount()) * blocks * blocks);

    for (const auto& filter : bank.filters) {
        for (std::size_t i = 0; i < total; ++i) {
            filtered[i][0] = freq[i][0] * filter[i];
            filtered[i][1] = freq[i][1] * filter[i];
        }
        fftwf_execute_dft(plans.inverse, filtered.get(), response.get());

        for (int by = 0; by < blocks; ++by) {
            for (int bx = 0; bx < blocks; ++bx) {
                double acc = 0.0;
                for (int y = by * blockSize; y < (by + 1) * blockSize; ++y) {
                    const std::size_t row = static_cast<std::size_t>(y) * n;
                    for (int x = bx * blockSize; x < (bx + 1) * blockSize; ++x) {
                        const float re = response[row + x][0] * invArea;
                        const float im = response[row + x][1] * invArea;
                        acc += std::sqrt(static_cast<double>(re) * re +
                                         static_cast<double>(im) * im);
                    }
                }
                out.push_back(static_cast<float>(acc / (blockSize * blockSize)));
            }
        }
    }
    return out;
}

namespace {

std::vector<float> gistForGray(const GrayImage& gray, const GaborBank& bank) {
    const GrayImage resized = resizeBilinear(gray, bank.workSize, bank.workSize);
    const GrayImage prefiltered = prefilterNormalize(resized);
    return gistDescriptor(prefiltered, bank, kGistBlocks);
}

} // namespace

GistDescriptor gistMultimodal(const FrameRecord& frame, const GaborBank& bank,
                              Modalities modalities) {
    GistDescriptor desc;
    auto append = [&](Modality m, std::vector<float> part) {
        GistLayoutEntry e;
        e.modality = m;
        e.offset = static_cast<int>(desc.values.size());
        e.length = static_cast<int>(part.size());
        desc.layout.push_back(e);
        desc.values.insert(desc.values.end(), part.begin(), part.end());
    };

    append(Modality::Rgb, gistForGray(toGrayscale(frame.rgb), bank));
    if (usesIr(modalities)) {
        if (!frame.infrared.has_value()) {
            throw ValidationError("frame lacks the infrared modality required by the config");
        }
        append(Modality::Ir, gistForGray(irToGray(*frame.infrared), bank));
    }
    if (usesDepth(modalities)) {
        if (!frame.depth.has_value()) {
            throw ValidationError("frame lacks the depth modality required by the config");
        }
        append(Modality::Depth, gistForGray(depthToGray(*frame.depth), bank));
    }
    return desc;
}

double gistDistance(const GistDescriptor& a, const GistDescriptor& b) {
    if (a.values.size() != b.values.size() || a.layout != b.layout) {
        throw ConfigError("gist descriptors have mismatched layouts");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace keypos
