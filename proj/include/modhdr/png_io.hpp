#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "modhdr/error.hpp"
#include "modhdr/image.hpp"

namespace modhdr {

/// 8- or 16-bit PNG preview of a display-referred raster. Values must
/// already be tone-mapped into [0, 1]; quantization rounds half away
/// from zero (0.5 at 8 bit -> 128).
inline void write_png_preview(const Image& img, const std::string& path, int bits = 8) {
  if (bits != 8 && bits != 16)
    throw InvalidArgument("write_png_preview: bit depth must be 8 or 16");
  if (img.channels != 1 && img.channels != 3)
    throw InvalidArgument("write_png_preview: PNG preview holds 1 or 3 channels");
  for (double v : img.data)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidArgument("write_png_preview: values must lie in [0,1]; tone-map first");

  // Quantize before touching libpng so no C++ throws cross setjmp.
  const long maxq = (1L << bits) - 1;
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels * (bits / 8);
  std::vector<unsigned char> bytes(stride * img.height);
  for (int i = 0; i < img.height; ++i) {
    unsigned char* row = bytes.data() + stride * i;
    for (int j = 0; j < img.width; ++j)
      for (int c = 0; c < img.channels; ++c) {
        const double v = img.data[(static_cast<std::size_t>(c) * img.height + i) * img.width + j];
        const long q = std::lround(v * static_cast<double>(maxq));
        const std::size_t k = (static_cast<std::size_t>(j) * img.channels + c) * (bits / 8);
        if (bits == 8) {
          row[k] = static_cast<unsigned char>(q);
        } else {  // PNG 16-bit samples are big-endian
          row[k] = static_cast<unsigned char>(q >> 8);
          row[k + 1] = static_cast<unsigned char>(q & 0xff);
        }
      }
  }

  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng failed writing: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), bits,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int i = 0; i < img.height; ++i)
    png_write_row(png, reinterpret_cast<png_bytep>(bytes.data() + stride * i));
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw IoError("failed closing PNG file: " + path);
}

}  // namespace modhdr
