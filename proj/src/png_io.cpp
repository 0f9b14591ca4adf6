#include "keypos/png_io.hpp"

#include "keypos/errors.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace keypos {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

ImagePlane readPng(const std::string& path)
{
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp)
        throw IoError("cannot open PNG for reading: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<png_bytep> rowPtrs;
    ImagePlane plane;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt or unsupported PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bitDepth = png_get_bit_depth(png, info);
    const int colorType = png_get_color_type(png, info);

    if (colorType == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (bitDepth == 16)
        png_set_swap(png); // host is little-endian

    png_read_update_info(png, info);

    const int outChannels = png_get_channels(png, info);
    const int outDepth = png_get_bit_depth(png, info);
    if (!((outChannels == 3 && outDepth == 8) || (outChannels == 1 && (outDepth == 8 || outDepth == 16)))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG layout (channels=" + std::to_string(outChannels) +
                          ", depth=" + std::to_string(outDepth) + "): " + path);
    }

    plane = makePlane(static_cast<int>(width), static_cast<int>(height), outChannels, outDepth);

    const std::size_t rowBytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> raw(rowBytes * height);
    rowPtrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rowPtrs[y] = raw.data() + y * rowBytes;
    png_read_image(png, rowPtrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = plane.samples.size();
    if (outDepth == 8) {
        for (std::size_t i = 0; i < n; ++i)
            plane.samples[i] = raw[i];
    } else {
        const auto* p = reinterpret_cast<const std::uint16_t*>(raw.data());
        for (std::size_t i = 0; i < n; ++i)
            plane.samples[i] = p[i];
    }
    return plane;
}

void writePng(const std::string& path, const ImagePlane& plane)
{
    if (!plane.sizeConsistent())
        throw ValidationError("writePng: inconsistent plane dimensions");
    const bool rgb8 = plane.channels == 3 && plane.depthBits == 8;
    const bool gray8 = plane.channels == 1 && plane.depthBits == 8;
    const bool gray16 = plane.channels == 1 && plane.depthBits == 16;
    if (!rgb8 && !gray8 && !gray16)
        throw ValidationError("writePng: unsupported plane layout");

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp)
        throw IoError("cannot open PNG for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path);
    }

    png_init_io(png, fp.get());
    // Fixed settings keep the output byte-stream deterministic.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, plane.width, plane.height, plane.depthBits,
                 rgb8 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (plane.depthBits == 16)
        png_set_swap(png);

    const std::size_t rowSamples = static_cast<std::size_t>(plane.width) * plane.channels;
    if (plane.depthBits == 8) {
        std::vector<std::uint8_t> row(rowSamples);
        for (int y = 0; y < plane.height; ++y) {
            const std::uint16_t* src = plane.samples.data() + static_cast<std::size_t>(y) * rowSamples;
            for (std::size_t i = 0; i < rowSamples; ++i)
                row[i] = static_cast<std::uint8_t>(src[i]);
            png_write_row(png, row.data());
        }
    } else {
        for (int y = 0; y < plane.height; ++y) {
            const std::uint16_t* src = plane.samples.data() + static_cast<std::size_t>(y) * rowSamples;
            png_write_row(png, reinterpret_cast<png_const_bytep>(src));
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace keypos
