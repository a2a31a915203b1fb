#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "modhdr/error.hpp"
#include "modhdr/image.hpp"

namespace modhdr {

/// NPY v1.0 writer for a planar raster, stored as float64 with shape
/// (channels, height, width) in C order — loadable with numpy.load.
inline void write_npy(const Image& img, const std::string& path) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(img.channels) + ", " + std::to_string(img.height) + ", " +
                     std::to_string(img.width) + "), }";
  // pad with spaces so magic+version+len+dict is a multiple of 64, ending in \n
  const std::size_t unpadded = 6 + 2 + 2 + dict.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  dict.append(padded - unpadded, ' ');
  dict.push_back('\n');

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  const unsigned char magic[8] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  f.write(reinterpret_cast<const char*>(magic), 8);
  const auto hlen = static_cast<std::uint16_t>(dict.size());
  const unsigned char len_le[2] = {static_cast<unsigned char>(hlen & 0xff),
                                   static_cast<unsigned char>(hlen >> 8)};
  f.write(reinterpret_cast<const char*>(len_le), 2);
  f << dict;
  f.write(reinterpret_cast<const char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size() * sizeof(double)));
  if (!f) throw IoError("failed writing NPY: " + path);
}

}  // namespace modhdr
