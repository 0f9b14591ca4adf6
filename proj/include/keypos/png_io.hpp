#pragma once

#include "keypos/image.hpp"

#include <string>

namespace keypos {

/// Reads a PNG file into an ImagePlane. Supported layouts: 8-bit RGB,
/// 8-bit grayscale, 16-bit grayscale. Anything else raises FormatError.
ImagePlane readPng(const std::string& path);

/// Writes an ImagePlane as PNG. 16-bit planes are stored in PNG network
/// byte order; output bytes are deterministic for identical inputs.
void writePng(const std::string& path, const ImagePlane& plane);

} // namespace keypos
