// Netpbm image I/O: plain (P2/P3) and raw (P5/P6) formats with maxval 255.
#pragma once

#include "bifactor/dense.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bifactor {

struct PortableImage {
  Index width = 0;
  Index height = 0;
  int channels = 1;  // 1 (gray) or 3 (rgb)
  int maxval = 255;
  // channel-major: pixels[c][y * width + x]
  std::vector<std::vector<std::uint8_t>> pixels;
};

// Parse errors carry the byte offset of the offending data.
PortableImage read_pnm(const std::string& path);
void write_pnm(const std::string& path, const PortableImage& image,
               bool binary = true);

// Channel <-> matrix helpers (values clamped to [0, maxval] and rounded on
// the way back).
DenseMatrix channel_to_matrix(const PortableImage& image, int channel);
void matrix_to_channel(const DenseMatrix& m, PortableImage& image,
                       int channel);

}  // namespace bifactor
