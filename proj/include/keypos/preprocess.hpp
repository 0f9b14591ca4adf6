#pragma once

#include "keypos/image.hpp"

namespace keypos {

/// Log-chromaticity illumination-invariance transform used ahead of LDB.
/// out = 0.5 + log(G') - alpha*log(B') - (1-alpha)*log(R') with channels
/// floored at 1/255 before the log. Invariant (in real arithmetic) to uniform
/// per-image channel scaling since the coefficients sum to zero.
inline constexpr double kIlluminationAlpha = 0.48;

GrayImage illuminationInvariant(const ImagePlane& rgb, double alpha = kIlluminationAlpha);

/// Separable Gaussian blur with replicated borders, kernel radius ceil(3*sigma).
GrayImage gaussianBlur(const GrayImage& img, double sigma);

/// GIST front end: log transform, whitening (subtract Gaussian low-pass) and
/// local contrast normalization (divide by local Gaussian std estimate).
inline constexpr double kWhitenSigma = 4.0;
inline constexpr double kContrastEpsilon = 0.01;

GrayImage prefilterNormalize(const GrayImage& gray);

} // namespace keypos
