#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "modhdr/error.hpp"
#include "modhdr/image.hpp"

namespace modhdr {

static_assert(std::endian::native == std::endian::little,
              "PFM reader/writer assumes a little-endian host");

/// Malformed magic/dimension/scale header.
class PfmFormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Payload shorter than width*height*channels samples.
class PfmTruncatedError : public IoError {
 public:
  using IoError::IoError;
};

/// Positive scale marks big-endian sample data, which is not supported.
class PfmEndiannessError : public IoError {
 public:
  using IoError::IoError;
};

/// Portable Float Map writer: magic "PF" (RGB) or "Pf" (gray), ASCII
/// width/height, scale -1.0 (little-endian), then float32 samples in
/// bottom-to-top row order, pixel-interleaved for RGB.
inline void write_pfm(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw InvalidArgument("write_pfm: PFM holds 1 or 3 channels, got " +
                          std::to_string(img.channels));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << (img.channels == 3 ? "PF" : "Pf") << '\n'
    << img.width << ' ' << img.height << '\n'
    << "-1.0" << '\n';
  std::vector<float> row(static_cast<std::size_t>(img.width) * img.channels);
  for (int i = img.height - 1; i >= 0; --i) {
    for (int j = 0; j < img.width; ++j)
      for (int c = 0; c < img.channels; ++c)
        row[static_cast<std::size_t>(j) * img.channels + c] =
            static_cast<float>(img.at(c, i, j));
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!f) throw IoError("failed writing PFM payload: " + path);
}

inline void write_pfm(const HdrImage& img, const std::string& path) { write_pfm(img.raster, path); }

inline Image read_pfm_raster(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string magic;
  f >> magic;
  int channels;
  if (magic == "PF")
    channels = 3;
  else if (magic == "Pf")
    channels = 1;
  else
    throw PfmFormatError("not a PFM file (bad magic): " + path);
  long long w = 0, h = 0;
  double scale = 0.0;
  if (!(f >> w >> h) || w < 1 || h < 1)
    throw PfmFormatError("bad PFM dimensions: " + path);
  if (!(f >> scale) || scale == 0.0) throw PfmFormatError("bad PFM scale line: " + path);
  if (scale > 0.0)
    throw PfmEndiannessError("big-endian PFM (positive scale) is not supported: " + path);
  // exactly one whitespace byte separates the header from the payload
  const int sep = f.get();
  if (sep == EOF || std::isspace(sep) == 0)
    throw PfmFormatError("missing header/payload separator: " + path);

  Image img(static_cast<int>(h), static_cast<int>(w), channels);
  const double gain = -scale;  // |scale| is a sample multiplier
  std::vector<float> row(static_cast<std::size_t>(w) * channels);
  for (long long i = h - 1; i >= 0; --i) {
    f.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (static_cast<std::size_t>(f.gcount()) != row.size() * sizeof(float))
      throw PfmTruncatedError("PFM payload truncated: " + path);
    for (long long j = 0; j < w; ++j)
      for (int c = 0; c < channels; ++c)
        img.at(c, static_cast<int>(i), static_cast<int>(j)) =
            gain * static_cast<double>(row[static_cast<std::size_t>(j) * channels + c]);
  }
  return img;
}

inline HdrImage read_pfm(const std::string& path) {
  try {
    return HdrImage(read_pfm_raster(path));
  } catch (const InvalidArgument& e) {
    throw IoError("PFM holds values outside the HDR domain (" + std::string(e.what()) +
                  "): " + path);
  }
}

}  // namespace modhdr
